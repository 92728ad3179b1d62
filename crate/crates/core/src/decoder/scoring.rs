//! Combined candidate scores, always in log space.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_inputs<'a, T: Scalar>(
    lm_probs: &[T],
    attrs: impl IntoIterator<Item = &'a [T]>,
) -> Result<()> {
    let positive = |p: &T| *p > T::zero() && p.is_finite();
    if !lm_probs.iter().all(positive) {
        return Err(Error::invalid(
            "scores need strictly positive probabilities",
        ));
    }
    for a in attrs {
        if a.len() != lm_probs.len() {
            return Err(Error::invalid(
                "attribute and LM probability lists differ in length",
            ));
        }
        if !a.iter().all(positive) {
            return Err(Error::invalid(
                "scores need strictly positive probabilities",
            ));
        }
    }
    Ok(())
}

/// `ln lm(t) + Σ_j λ ln attr_j(t)`: classical weighted decoding.
pub fn score_static<T: Scalar>(lm_probs: &[T], attrs: &[&[T]], lambda: T) -> Result<Vec<T>> {
    check_inputs(lm_probs, attrs.iter().copied())?;
    let mut scores: Vec<T> = lm_probs.iter().map(|p| p.ln()).collect();
    for a in attrs {
        for (s, &q) in scores.iter_mut().zip(a.iter()) {
            *s = *s + lambda * q.ln();
        }
    }
    Ok(scores)
}

/// `α_lm ln lm(t) + Σ_j λ α_j ln attr_j(t)`: entropy-controlled weighting.
/// With every `α = 1` this is bit-for-bit [`score_static`].
pub fn score_eco<T: Scalar>(
    lm_probs: &[T],
    alpha_lm: T,
    attrs: &[(&[T], T)],
    lambda: T,
) -> Result<Vec<T>> {
    check_inputs(lm_probs, attrs.iter().map(|a| a.0))?;
    if !(alpha_lm > T::zero()) || attrs.iter().any(|a| !(a.1 > T::zero())) {
        return Err(Error::invalid("strengths must be positive"));
    }
    let mut scores: Vec<T> = lm_probs.iter().map(|p| alpha_lm * p.ln()).collect();
    for &(a, alpha) in attrs {
        let w = lambda * alpha;
        for (s, &q) in scores.iter_mut().zip(a.iter()) {
            *s = *s + w * q.ln();
        }
    }
    Ok(scores)
}

/// Index of the best score; equal scores go to the smaller token id.
pub fn argmax_by_token<T: Scalar>(scores: &[T], tokens: &[u32]) -> usize {
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] > scores[best] || (scores[i] == scores[best] && tokens[i] < tokens[best]) {
            best = i;
        }
    }
    best
}
