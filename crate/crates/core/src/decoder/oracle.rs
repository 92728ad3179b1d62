//! Brute-force reference for a single decoding step. Shares no scoring,
//! candidate-selection or entropy code with the engine: every candidate's
//! classifier probability is recomputed from a fresh prefix and the
//! products are formed directly.

use crate::control::StrengthKind;
use crate::corpus::{dialogue_context, EOS_ID};
use crate::error::{Error, Result};
use crate::models::{AttributeModel, LanguageModel};
use crate::scalar::Scalar;

use super::config::{DecodeConfig, DecodeMode};
use super::engine::Controller;
use crate::control::SmoothingInput;

fn entropy_direct(values: &[f64], tau: f64, input: SmoothingInput) -> f64 {
    let logits: Vec<f64> = values
        .iter()
        .map(|&v| match input {
            SmoothingInput::Probability => v / tau,
            SmoothingInput::LogProbability => v.ln() / tau,
        })
        .collect();
    let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    -w.iter()
        .map(|x| x / z)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

fn alpha_direct(e: f64, kind: StrengthKind, vocab_size: usize) -> f64 {
    match kind {
        StrengthKind::Reciprocal => 1.0 + 1.0 / (1.0 + e),
        StrengthKind::Exponential => 1.0 + (-e).exp(),
        StrengthKind::Negative => 1.0 + (vocab_size as f64).ln() - e,
    }
}

/// The token the engine should choose next, by exhaustive enumeration.
pub fn brute_force_step_oracle<T: Scalar>(
    lm: &dyn LanguageModel<T>,
    controllers: &[Controller<'_, T>],
    history: &[Vec<u32>],
    prefix: &[u32],
    config: &DecodeConfig<T>,
) -> Result<u32> {
    let v = lm.vocab_size();
    let dist: Vec<f64> = lm
        .next_distribution(&dialogue_context(history, prefix))
        .as_slice()
        .iter()
        .map(|p| p.as_f64())
        .collect();

    let mut order: Vec<u32> = (0..v as u32).collect();
    order.sort_by(|&a, &b| {
        dist[b as usize]
            .partial_cmp(&dist[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    let top: Vec<u32> = order[..config.k.min(v)].to_vec();
    let mut candidates = top.clone();
    if !candidates.contains(&EOS_ID) {
        candidates.push(EOS_ID);
    }

    let mut attr_columns: Vec<Vec<f64>> = Vec::new();
    if config.mode != DecodeMode::Uncontrolled {
        for target in &config.targets {
            let ctl = controllers
                .iter()
                .find(|c| c.attribute == target.attribute)
                .ok_or_else(|| Error::UnknownAttribute(target.attribute.clone()))?;
            let model: &dyn AttributeModel<T> = ctl.model;
            let idx = model
                .class_index(&target.class)
                .ok_or_else(|| Error::UnknownClass(target.class.clone()))?;
            let column = candidates
                .iter()
                .map(|&t| {
                    let mut extended = prefix.to_vec();
                    extended.push(t);
                    let state = model.begin_prefix(history, &extended);
                    model.state_posterior(&state, idx).as_f64()
                })
                .collect();
            attr_columns.push(column);
        }
    }

    let lambda = config.lambda.as_f64();
    let fixed = config.fixed_alpha.map(|a| a.as_f64());
    let alpha_of = |values: &[f64], tau: f64| {
        fixed.unwrap_or_else(|| {
            alpha_direct(
                entropy_direct(values, tau, config.smoothing),
                config.strength,
                v,
            )
        })
    };
    let n_top = top.len();
    let (alpha_lm, alpha_c): (f64, Vec<f64>) = match config.mode {
        DecodeMode::Eco => {
            let lm_top: Vec<f64> = top.iter().map(|&t| dist[t as usize]).collect();
            (
                alpha_of(&lm_top, config.tau_lm.as_f64()),
                attr_columns
                    .iter()
                    .map(|c| alpha_of(&c[..n_top], config.tau_c.as_f64()))
                    .collect(),
            )
        }
        _ => (1.0, vec![1.0; attr_columns.len()]),
    };

    let mut best: Option<(f64, u32)> = None;
    for (i, &t) in candidates.iter().enumerate() {
        let mut score = alpha_lm * dist[t as usize].ln();
        for (col, a) in attr_columns.iter().zip(&alpha_c) {
            score += lambda * a * col[i].ln();
        }
        best = match best {
            Some((s, b)) if s > score || (s == score && b < t) => Some((s, b)),
            _ => Some((score, t)),
        };
    }
    Ok(best.expect("candidate set is never empty").1)
}
