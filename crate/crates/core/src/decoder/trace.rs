use std::io::Write;

use crate::control::SmoothingInput;
use crate::corpus::Vocabulary;
use crate::error::Result;
use crate::scalar::Scalar;

use super::config::DecodeMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Eos,
    MaxLen,
}

/// Classifier side of one step. `entropy` is only measured in eco mode.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeStep<T> {
    pub attribute: String,
    pub class: String,
    pub entropy: Option<T>,
    pub alpha: T,
    /// Target-class probability for each candidate, aligned with
    /// [`StepTrace::tokens`].
    pub probs: Vec<T>,
}

/// Everything computed for one decoding step. Candidate columns are
/// aligned; the first `top_k_len` candidates are the LM's top-k in rank
/// order and a trailing `</s>` is present when it fell outside the top-k.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace<T> {
    pub step: usize,
    pub lm_entropy: Option<T>,
    pub alpha_lm: T,
    pub attributes: Vec<AttributeStep<T>>,
    pub tokens: Vec<u32>,
    pub lm_probs: Vec<T>,
    pub top_k_len: usize,
    pub scores: Vec<T>,
    pub chosen: usize,
}

impl<T: Scalar> StepTrace<T> {
    pub fn chosen_token(&self) -> u32 {
        self.tokens[self.chosen]
    }

    pub fn num_candidates(&self) -> usize {
        self.tokens.len()
    }

    pub fn in_top_k(&self, idx: usize) -> bool {
        idx < self.top_k_len
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTrace<T> {
    pub mode: DecodeMode,
    pub lambda: T,
    pub tau_lm: T,
    pub tau_c: T,
    pub smoothing: SmoothingInput,
    /// Generated tokens, including the final `</s>` if one was produced.
    pub response: Vec<u32>,
    pub steps: Vec<StepTrace<T>>,
    pub termination: Termination,
}

impl<T: Scalar> DecodeTrace<T> {
    /// The response without its closing `</s>`.
    pub fn content(&self) -> &[u32] {
        match self.termination {
            Termination::Eos => &self.response[..self.response.len() - 1],
            Termination::MaxLen => &self.response,
        }
    }
}

pub const TRACE_HEADER: &str =
    "step\te_lm\talpha_lm\tattr_name\te_c\talpha_c\ttoken\tlm_prob\tattr_prob\tcombined_log_score\tchosen";

fn opt<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per step, candidate and attribute (a single row with empty
/// attribute columns when decoding is uncontrolled).
pub fn write_trace_tsv<T: Scalar, W: Write>(
    out: &mut W,
    trace: &DecodeTrace<T>,
    vocab: Option<&Vocabulary>,
) -> Result<()> {
    let io = |e| crate::error::Error::io(std::path::Path::new("<trace>"), e);
    writeln!(out, "{TRACE_HEADER}").map_err(io)?;
    for s in &trace.steps {
        let e_lm = opt(s.lm_entropy);
        for i in 0..s.num_candidates() {
            let token = match vocab {
                Some(v) => v.token(s.tokens[i]).to_string(),
                None => s.tokens[i].to_string(),
            };
            let chosen = u8::from(i == s.chosen);
            let mut row = |name: &str, e_c: String, alpha_c: String, p: String| {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    s.step,
                    e_lm,
                    s.alpha_lm,
                    name,
                    e_c,
                    alpha_c,
                    token,
                    s.lm_probs[i],
                    p,
                    s.scores[i],
                    chosen
                )
            };
            if s.attributes.is_empty() {
                row("", String::new(), String::new(), String::new()).map_err(io)?;
            }
            for a in &s.attributes {
                row(
                    &a.attribute,
                    opt(a.entropy),
                    a.alpha.to_string(),
                    a.probs[i].to_string(),
                )
                .map_err(io)?;
            }
        }
    }
    Ok(())
}
