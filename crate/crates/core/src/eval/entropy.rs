use std::fmt::Write as _;

use crate::control::smoothed_entropy;
use crate::corpus::Vocabulary;
use crate::decoder::DecodeTrace;
use crate::error::Result;

/// Per generated token: surface form, LM entropy at its step and the
/// chosen token's LM probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenEntropy {
    pub token: String,
    pub e_lm: f64,
    pub lm_prob: f64,
}

/// One row per generated token over all traces. Steps decoded without
/// entropy (static or uncontrolled) get it recomputed from the trace's
/// top-k probabilities at the trace's `τ_lm`.
pub fn export_entropy_summary(
    traces: &[DecodeTrace<f64>],
    vocab: &Vocabulary,
) -> Result<Vec<TokenEntropy>> {
    let mut rows = Vec::new();
    for t in traces {
        for s in &t.steps {
            let e_lm = match s.lm_entropy {
                Some(e) => e,
                None => smoothed_entropy(&s.lm_probs[..s.top_k_len], t.tau_lm, t.smoothing)?,
            };
            rows.push(TokenEntropy {
                token: vocab.token(s.chosen_token()).to_string(),
                e_lm,
                lm_prob: s.lm_probs[s.chosen],
            });
        }
    }
    Ok(rows)
}

pub const ENTROPY_HEADER: &str = "token\te_lm\tlm_prob";

pub fn entropy_tsv(rows: &[TokenEntropy]) -> String {
    let mut out = format!("{ENTROPY_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}", r.token, r.e_lm, r.lm_prob);
    }
    out
}
