use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A normalized probability distribution indexed by token id (or candidate
/// position).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<T> {
    probs: Vec<T>,
}

impl<T: Scalar> ProbVector<T> {
    /// Wraps `probs` after checking that every entry is finite, non-negative
    /// and that the total is 1 within `1e-6` (loose enough for `f32`).
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("empty probability vector"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::invalid(
                "probability entries must be finite and >= 0",
            ));
        }
        let total: T = probs.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Wraps without validation. Callers guarantee normalization.
    pub(crate) fn from_normalized(probs: Vec<T>) -> Self {
        Self { probs }
    }

    pub fn uniform(len: usize) -> Self {
        let p = T::one() / T::count(len as u64);
        Self {
            probs: vec![p; len],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<T> {
        self.probs
    }

    pub fn sum(&self) -> T {
        self.probs.iter().copied().sum()
    }

    /// Index of the largest entry; ties go to the smallest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

impl<T> Index<usize> for ProbVector<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.probs[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized() {
        assert!(ProbVector::new(vec![0.5f64, 0.4]).is_err());
        assert!(ProbVector::new(vec![1.5f64, -0.5]).is_err());
        assert!(ProbVector::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index_on_tie() {
        let p = ProbVector::new(vec![0.2f64, 0.4, 0.4]).unwrap();
        assert_eq!(p.argmax(), 1);
    }
}
