//! Entropy core of the controller: top-k candidate selection, temperature
//! smoothing with Shannon entropy, attribute entropy over the candidate set,
//! and the entropy-to-strength functions.

mod entropy;
mod strength;
mod topk;

pub use entropy::{smooth_and_entropy, smoothed_entropy, SmoothingInput};
pub use strength::{strength, StrengthFunction, StrengthKind};
pub use topk::{top_k_select, top_k_select_at, TopKCandidates};

use crate::error::{Error, Result};
use crate::models::AttributeModel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntropySource {
    Lm,
    Attribute(String),
}

/// One entropy measurement, in nats, with the temperature used to smooth it.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReading<T> {
    pub value: T,
    pub source: EntropySource,
    pub temperature: T,
}

/// Attribute probabilities `P_c([prefix; t], history)` for every candidate
/// `t`, and the entropy of their temperature-smoothed distribution.
#[allow(clippy::too_many_arguments)]
pub fn attribute_entropy<T: Scalar>(
    candidates: &TopKCandidates<T>,
    clf: &dyn AttributeModel<T>,
    attribute: &str,
    history: &[Vec<u32>],
    prefix: &[u32],
    class: &str,
    tau_c: T,
    input: SmoothingInput,
) -> Result<(Vec<T>, EntropyReading<T>)> {
    if candidates.is_empty() {
        return Err(Error::invalid("empty candidate set"));
    }
    let k = clf
        .class_index(class)
        .ok_or_else(|| Error::UnknownClass(class.to_string()))?;
    let state = clf.begin_prefix(history, prefix);
    let probs: Vec<T> = candidates
        .tokens()
        .map(|t| clf.extended_posterior(&state, t, k))
        .collect();
    let value = smoothed_entropy(&probs, tau_c, input)?;
    Ok((
        probs,
        EntropyReading {
            value,
            source: EntropySource::Attribute(attribute.to_string()),
            temperature: tau_c,
        },
    ))
}
