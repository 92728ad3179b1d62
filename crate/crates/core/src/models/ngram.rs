//! Interpolated absolute-discounting n-gram language model.
//!
//! For a context `h` of length `n-1` with count `c(h)` and `N1+(h)` distinct
//! continuations,
//!
//! ```text
//! P(w | h) = max(c(h w) - d, 0) / c(h)  +  d * N1+(h) / c(h) * P(w | h')
//! ```
//!
//! where `h'` drops the oldest token. Unseen contexts back off to `P(w | h')`
//! unchanged, and the recursion bottoms out in the uniform distribution over
//! the vocabulary, so every token keeps non-zero mass.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::{Vocabulary, BOS_ID};
use crate::error::{Error, Result};
use crate::prob::ProbVector;
use crate::scalar::Scalar;

use super::LanguageModel;

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_DISCOUNT: f64 = 0.75;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ContextCounts {
    pub(crate) total: u64,
    /// Continuations sorted by token id.
    pub(crate) next: Vec<(u32, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramLm<T> {
    pub(crate) order: usize,
    pub(crate) discount: T,
    pub(crate) vocab_size: usize,
    pub(crate) vocab_hash: String,
    /// `levels[l]` maps contexts of length `l` to their continuation counts.
    pub(crate) levels: Vec<HashMap<Vec<u32>, ContextCounts>>,
}

impl<T: Scalar> NGramLm<T> {
    /// Counts every n-gram of every order up to `order`. Sequences are
    /// left-padded with `<s>`; `<s>` itself is never counted as a prediction.
    pub fn train(
        sequences: &[Vec<u32>],
        order: usize,
        discount: T,
        vocab: &Vocabulary,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("n-gram order must be >= 1"));
        }
        if !(discount > T::zero() && discount < T::one()) {
            return Err(Error::invalid(format!("discount {discount} not in (0,1)")));
        }
        let v = vocab.size();
        let mut raw: Vec<HashMap<Vec<u32>, BTreeMap<u32, u64>>> = vec![HashMap::new(); order];
        let mut seen = 0usize;
        for seq in sequences {
            if let Some(&bad) = seq.iter().find(|&&t| t as usize >= v) {
                return Err(Error::invalid(format!("token id {bad} outside vocabulary")));
            }
            let mut padded = vec![BOS_ID; order - 1];
            padded.extend_from_slice(seq);
            for j in order - 1..padded.len() {
                let w = padded[j];
                if w == BOS_ID {
                    continue;
                }
                seen += 1;
                for (len, level) in raw.iter_mut().enumerate() {
                    *level
                        .entry(padded[j - len..j].to_vec())
                        .or_default()
                        .entry(w)
                        .or_default() += 1;
                }
            }
        }
        if seen == 0 {
            return Err(Error::EmptyCorpus);
        }
        let levels = raw
            .into_iter()
            .map(|level| {
                level
                    .into_iter()
                    .map(|(ctx, next)| {
                        let next: Vec<(u32, u64)> = next.into_iter().collect();
                        let total = next.iter().map(|(_, c)| c).sum();
                        (ctx, ContextCounts { total, next })
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            order,
            discount,
            vocab_size: v,
            vocab_hash: vocab.content_hash(),
            levels,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> T {
        self.discount
    }

    pub fn vocab_hash(&self) -> &str {
        &self.vocab_hash
    }

    /// Context of length `len` ending at the end of `context`, left-padded
    /// with `<s>` when `context` is shorter.
    fn context_key(context: &[u32], len: usize, buf: &mut Vec<u32>) {
        buf.clear();
        let have = context.len().min(len);
        buf.extend(std::iter::repeat_n(BOS_ID, len - have));
        buf.extend_from_slice(&context[context.len() - have..]);
    }

    fn level_weights(&self, counts: &ContextCounts) -> (T, T) {
        let total = T::count(counts.total);
        let gamma = self.discount * T::count(counts.next.len() as u64) / total;
        (gamma, total)
    }
}

impl<T: Scalar> LanguageModel<T> for NGramLm<T> {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn next_distribution(&self, context: &[u32]) -> ProbVector<T> {
        let mut p = vec![T::one() / T::count(self.vocab_size as u64); self.vocab_size];
        let mut key = Vec::with_capacity(self.order);
        for (len, level) in self.levels.iter().enumerate() {
            Self::context_key(context, len, &mut key);
            let Some(counts) = level.get(key.as_slice()) else {
                continue;
            };
            let (gamma, total) = self.level_weights(counts);
            for x in p.iter_mut() {
                *x = *x * gamma;
            }
            for &(w, c) in &counts.next {
                p[w as usize] = p[w as usize] + (T::count(c) - self.discount) / total;
            }
        }
        ProbVector::from_normalized(p)
    }

    fn prob(&self, context: &[u32], token: u32) -> T {
        let mut p = T::one() / T::count(self.vocab_size as u64);
        let mut key = Vec::with_capacity(self.order);
        for (len, level) in self.levels.iter().enumerate() {
            Self::context_key(context, len, &mut key);
            let Some(counts) = level.get(key.as_slice()) else {
                continue;
            };
            let (gamma, total) = self.level_weights(counts);
            p = p * gamma;
            if let Ok(i) = counts.next.binary_search_by_key(&token, |&(w, _)| w) {
                p = p + (T::count(counts.next[i].1) - self.discount) / total;
            }
        }
        p
    }
}

pub fn train_ngram_lm<T: Scalar>(
    sequences: &[Vec<u32>],
    order: usize,
    discount: T,
    vocab: &Vocabulary,
) -> Result<NGramLm<T>> {
    NGramLm::train(sequences, order, discount, vocab)
}

pub fn lm_next_distribution<T: Scalar>(lm: &NGramLm<T>, context: &[u32]) -> ProbVector<T> {
    lm.next_distribution(context)
}
