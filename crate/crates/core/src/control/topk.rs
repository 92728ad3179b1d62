use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::prob::ProbVector;
use crate::scalar::Scalar;

/// The `k` most probable tokens of one decoding step, most probable first.
/// Equal probabilities are ordered by ascending token id.
#[derive(Debug, Clone, PartialEq)]
pub struct TopKCandidates<T> {
    pub step: usize,
    entries: Vec<(u32, T)>,
}

impl<T: Scalar> TopKCandidates<T> {
    pub fn entries(&self) -> &[(u32, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn probs(&self) -> impl Iterator<Item = T> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn contains(&self, token: u32) -> bool {
        self.entries.iter().any(|e| e.0 == token)
    }
}

#[inline]
fn rank<T: Scalar>(p: &[T], a: u32, b: u32) -> Ordering {
    p[b as usize]
        .partial_cmp(&p[a as usize])
        .unwrap_or(Ordering::Equal)
        .then(a.cmp(&b))
}

pub fn top_k_select<T: Scalar>(p: &ProbVector<T>, k: usize) -> Result<TopKCandidates<T>> {
    top_k_select_at(p, k, 0)
}

/// `top_k_select` tagged with the decoding step it belongs to.
pub fn top_k_select_at<T: Scalar>(
    p: &ProbVector<T>,
    k: usize,
    step: usize,
) -> Result<TopKCandidates<T>> {
    let v = p.len();
    if k < 2 || k > v {
        return Err(Error::invalid(format!("top-k size {k} outside [2, {v}]")));
    }
    let probs = p.as_slice();
    let mut ids: Vec<u32> = (0..v as u32).collect();
    if k < v {
        ids.select_nth_unstable_by(k - 1, |&a, &b| rank(probs, a, b));
        ids.truncate(k);
    }
    ids.sort_unstable_by(|&a, &b| rank(probs, a, b));
    let entries: Vec<(u32, T)> = ids.into_iter().map(|t| (t, probs[t as usize])).collect();
    if entries.iter().any(|e| !(e.1 > T::zero())) {
        return Err(Error::invalid(
            "top-k candidate with non-positive probability",
        ));
    }
    Ok(TopKCandidates { step, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(x: &[f64]) -> ProbVector<f64> {
        ProbVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn picks_highest() {
        let c = top_k_select(&pv(&[0.5, 0.3, 0.2]), 2).unwrap();
        assert_eq!(c.entries(), &[(0, 0.5), (1, 0.3)]);
    }

    #[test]
    fn ties_prefer_small_ids() {
        let c = top_k_select(&ProbVector::<f64>::uniform(7), 3).unwrap();
        assert_eq!(c.tokens().collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn k_equal_to_vocab_keeps_everything() {
        let c = top_k_select(&pv(&[0.1, 0.6, 0.3]), 3).unwrap();
        assert_eq!(c.tokens().collect::<Vec<_>>(), vec![1, 2, 0]);
    }

    #[test]
    fn k_out_of_range() {
        assert!(top_k_select(&pv(&[0.5, 0.5]), 1).is_err());
        assert!(top_k_select(&pv(&[0.5, 0.5]), 3).is_err());
    }

    proptest! {
        #[test]
        fn matches_full_sort(w in proptest::collection::vec(1u32..6, 2..40), k_frac in 0.0f64..1.0) {
            // Small integer weights produce many ties.
            let total: u32 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|&x| x as f64 / total as f64).collect();
            let k = 2 + ((w.len() - 2) as f64 * k_frac) as usize;
            let got = top_k_select(&ProbVector::new(p.clone()).unwrap(), k).unwrap();
            let mut all: Vec<u32> = (0..p.len() as u32).collect();
            all.sort_by(|&a, &b| p[b as usize].partial_cmp(&p[a as usize]).unwrap().then(a.cmp(&b)));
            prop_assert_eq!(got.tokens().collect::<Vec<_>>(), all[..k].to_vec());
        }
    }
}
