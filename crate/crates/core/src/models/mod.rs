//! Probability sources for weighted decoding: a next-token language model and
//! prefix attribute classifiers, behind object-safe traits so the decoder can
//! take any implementation.

mod classifier;
mod ngram;
mod persist;

pub use classifier::{classifier_prob, PrefixClassifier, DEFAULT_BUCKETS};
pub use ngram::{lm_next_distribution, train_ngram_lm, NGramLm, DEFAULT_DISCOUNT, DEFAULT_ORDER};

use crate::error::{Error, Result};
use crate::prob::ProbVector;
use crate::scalar::Scalar;

/// Next-token distribution `P(token | context)` over a closed vocabulary.
pub trait LanguageModel<T: Scalar>: Send + Sync {
    fn vocab_size(&self) -> usize;

    /// Dense, strictly positive distribution over the whole vocabulary.
    fn next_distribution(&self, context: &[u32]) -> ProbVector<T>;

    fn prob(&self, context: &[u32], token: u32) -> T {
        self.next_distribution(context)[token as usize]
    }
}

/// Accumulated per-class unnormalized log scores for one `(history, prefix)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixState<T> {
    pub(crate) log_scores: Vec<T>,
}

impl<T: Scalar> PrefixState<T> {
    pub fn from_log_scores(log_scores: Vec<T>) -> Self {
        Self { log_scores }
    }

    pub fn log_scores(&self) -> &[T] {
        &self.log_scores
    }
}

/// Attribute model that scores partial responses, `P(class | prefix, history)`,
/// with constant-time extension by one token.
pub trait AttributeModel<T: Scalar>: Send + Sync {
    fn classes(&self) -> &[String];

    fn begin_prefix(&self, history: &[Vec<u32>], prefix: &[u32]) -> PrefixState<T>;

    fn extend_in_place(&self, state: &mut PrefixState<T>, token: u32);

    fn state_posterior(&self, state: &PrefixState<T>, class: usize) -> T;

    /// Posterior of `class` after appending `token`, leaving `state` untouched.
    fn extended_posterior(&self, state: &PrefixState<T>, token: u32, class: usize) -> T {
        self.state_posterior(&self.extend_prefix(state, token), class)
    }

    fn extend_prefix(&self, state: &PrefixState<T>, token: u32) -> PrefixState<T> {
        let mut next = state.clone();
        self.extend_in_place(&mut next, token);
        next
    }

    /// Feature-hash seed, if the model has one. Used to keep evaluators and
    /// controllers apart.
    fn hash_seed(&self) -> Option<u64> {
        None
    }

    fn class_index(&self, class: &str) -> Option<usize> {
        self.classes().iter().position(|c| c == class)
    }
}

/// Normalizes per-class log scores and returns the posterior of `class`,
/// clamped into the open interval (0, 1).
pub(crate) fn posterior_of<T: Scalar>(scores: impl Iterator<Item = T> + Clone, target: T) -> T {
    let max = scores.clone().fold(T::neg_infinity(), T::max);
    let z: T = scores.map(|s| (s - max).exp()).sum();
    clamp_open_unit((target - max).exp() / z)
}

#[inline]
pub(crate) fn clamp_open_unit<T: Scalar>(p: T) -> T {
    p.max(T::min_positive_value()).min(T::one() - T::epsilon())
}

/// `exp` of the mean negative log probability of `tokens`, each conditioned
/// on `context` followed by the preceding tokens.
pub fn perplexity_in_context<T: Scalar>(
    lm: &dyn LanguageModel<T>,
    context: &[u32],
    tokens: &[u32],
) -> Result<T> {
    if tokens.is_empty() {
        return Err(Error::invalid("perplexity of an empty sequence"));
    }
    let mut ctx = context.to_vec();
    let mut nll = T::zero();
    for &t in tokens {
        nll = nll - lm.prob(&ctx, t).ln();
        ctx.push(t);
    }
    Ok((nll / T::count(tokens.len() as u64)).exp())
}

/// Perplexity of a standalone sequence (empty left context).
pub fn perplexity<T: Scalar>(lm: &dyn LanguageModel<T>, sequence: &[u32]) -> Result<T> {
    perplexity_in_context(lm, &[], sequence)
}
