//! Multinomial naive Bayes over hashed bag-of-token features of
//! `(history, response prefix)`, trained on every response prefix.
//!
//! History tokens and prefix tokens hash into the bucket space under
//! different segment tags, so the same word contributes a different feature
//! on each side of the history/response boundary. Likelihoods use add-one
//! smoothing over the buckets.

use crate::corpus::PrefixInstance;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{posterior_of, AttributeModel, PrefixState};

pub const DEFAULT_BUCKETS: usize = 1024;

const SEGMENT_HISTORY: u64 = 0;
const SEGMENT_RESPONSE: u64 = 1;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrefixClassifier<T> {
    pub(crate) classes: Vec<String>,
    pub(crate) hash_seed: u64,
    pub(crate) num_buckets: usize,
    pub(crate) class_instances: Vec<u64>,
    /// `feature_counts[class][bucket]`.
    pub(crate) feature_counts: Vec<Vec<u64>>,
    log_prior: Vec<T>,
    /// Bucket-major: `log_lik[bucket * C + class]`.
    log_lik: Vec<T>,
}

impl<T: Scalar> PrefixClassifier<T> {
    pub fn train(
        instances: &[PrefixInstance],
        class_set: &[String],
        hash_seed: u64,
        num_buckets: usize,
    ) -> Result<Self> {
        if class_set.is_empty() {
            return Err(Error::invalid("empty class set"));
        }
        if num_buckets == 0 {
            return Err(Error::invalid("num_buckets must be positive"));
        }
        let c = class_set.len();
        let mut class_instances = vec![0u64; c];
        let mut feature_counts = vec![vec![0u64; num_buckets]; c];
        for inst in instances {
            let k = class_set
                .iter()
                .position(|x| *x == inst.label)
                .ok_or_else(|| Error::UnknownClass(inst.label.clone()))?;
            class_instances[k] += 1;
            let counts = &mut feature_counts[k];
            for utt in &inst.history {
                for &t in utt {
                    counts[bucket(hash_seed, num_buckets, SEGMENT_HISTORY, t)] += 1;
                }
            }
            for &t in &inst.prefix {
                counts[bucket(hash_seed, num_buckets, SEGMENT_RESPONSE, t)] += 1;
            }
        }
        if let Some(k) = class_instances.iter().position(|&n| n == 0) {
            return Err(Error::MissingClass(class_set[k].clone()));
        }
        Self::from_counts(
            class_set.to_vec(),
            class_instances,
            feature_counts,
            hash_seed,
        )
    }

    /// Builds a classifier directly from sufficient statistics.
    pub fn from_counts(
        classes: Vec<String>,
        class_instances: Vec<u64>,
        feature_counts: Vec<Vec<u64>>,
        hash_seed: u64,
    ) -> Result<Self> {
        let c = classes.len();
        if c == 0 || class_instances.len() != c || feature_counts.len() != c {
            return Err(Error::invalid("class statistics have inconsistent shapes"));
        }
        let num_buckets = feature_counts[0].len();
        if num_buckets == 0 || feature_counts.iter().any(|f| f.len() != num_buckets) {
            return Err(Error::invalid(
                "feature count rows must share a positive width",
            ));
        }
        let n: u64 = class_instances.iter().sum();
        if n == 0 || class_instances.contains(&0) {
            return Err(Error::invalid("every class needs at least one instance"));
        }
        let log_prior = class_instances
            .iter()
            .map(|&k| (T::count(k) / T::count(n)).ln())
            .collect();
        let mut log_lik = vec![T::zero(); num_buckets * c];
        for (k, row) in feature_counts.iter().enumerate() {
            let denom = T::count(row.iter().sum::<u64>() + num_buckets as u64);
            for (b, &cnt) in row.iter().enumerate() {
                log_lik[b * c + k] = (T::count(cnt + 1) / denom).ln();
            }
        }
        Ok(Self {
            classes,
            hash_seed,
            num_buckets,
            class_instances,
            feature_counts,
            log_prior,
            log_lik,
        })
    }

    pub fn num_buckets(&self) -> usize {
        self.num_buckets
    }

    pub fn seed(&self) -> u64 {
        self.hash_seed
    }

    #[inline]
    fn response_row(&self, token: u32) -> &[T] {
        let c = self.classes.len();
        let b = bucket(self.hash_seed, self.num_buckets, SEGMENT_RESPONSE, token);
        &self.log_lik[b * c..(b + 1) * c]
    }

    fn history_row(&self, token: u32) -> &[T] {
        let c = self.classes.len();
        let b = bucket(self.hash_seed, self.num_buckets, SEGMENT_HISTORY, token);
        &self.log_lik[b * c..(b + 1) * c]
    }

    /// Full posterior over classes for `(history, prefix)`.
    pub fn posterior(&self, history: &[Vec<u32>], prefix: &[u32]) -> Vec<T> {
        let state = self.begin_prefix(history, prefix);
        (0..self.classes.len())
            .map(|k| self.state_posterior(&state, k))
            .collect()
    }

    /// Class with the highest posterior; ties go to the lower class index.
    pub fn predict(&self, history: &[Vec<u32>], prefix: &[u32]) -> usize {
        let state = self.begin_prefix(history, prefix);
        let mut best = 0;
        for k in 1..self.classes.len() {
            if state.log_scores[k] > state.log_scores[best] {
                best = k;
            }
        }
        best
    }
}

#[inline]
fn bucket(seed: u64, num_buckets: usize, segment: u64, token: u32) -> usize {
    let h = mix64(seed ^ mix64((segment << 32) | token as u64));
    (h % num_buckets as u64) as usize
}

impl<T: Scalar> AttributeModel<T> for PrefixClassifier<T> {
    fn classes(&self) -> &[String] {
        &self.classes
    }

    fn begin_prefix(&self, history: &[Vec<u32>], prefix: &[u32]) -> PrefixState<T> {
        let mut scores = self.log_prior.clone();
        for utt in history {
            for &t in utt {
                for (s, &l) in scores.iter_mut().zip(self.history_row(t)) {
                    *s = *s + l;
                }
            }
        }
        let mut state = PrefixState { log_scores: scores };
        for &t in prefix {
            self.extend_in_place(&mut state, t);
        }
        state
    }

    #[inline]
    fn extend_in_place(&self, state: &mut PrefixState<T>, token: u32) {
        for (s, &l) in state.log_scores.iter_mut().zip(self.response_row(token)) {
            *s = *s + l;
        }
    }

    fn state_posterior(&self, state: &PrefixState<T>, class: usize) -> T {
        posterior_of(state.log_scores.iter().copied(), state.log_scores[class])
    }

    #[inline]
    fn extended_posterior(&self, state: &PrefixState<T>, token: u32, class: usize) -> T {
        let row = self.response_row(token);
        let scores = state.log_scores.iter().zip(row).map(|(&s, &l)| s + l);
        posterior_of(scores, state.log_scores[class] + row[class])
    }

    fn hash_seed(&self) -> Option<u64> {
        Some(self.hash_seed)
    }
}

/// `P(class | prefix, history)` computed from scratch.
pub fn classifier_prob<T: Scalar>(
    clf: &PrefixClassifier<T>,
    history: &[Vec<u32>],
    prefix: &[u32],
    class: &str,
) -> Result<T> {
    let k = clf
        .class_index(class)
        .ok_or_else(|| Error::UnknownClass(class.to_string()))?;
    Ok(clf.state_posterior(&clf.begin_prefix(history, prefix), k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn classes(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn inst(prefix: &[u32], label: &str) -> PrefixInstance {
        PrefixInstance {
            history: vec![],
            prefix: prefix.to_vec(),
            label: label.into(),
        }
    }

    #[test]
    fn separable_corpus_is_learned() {
        let data = vec![
            inst(&[10, 11], "pos"),
            inst(&[10, 12], "pos"),
            inst(&[11, 12], "pos"),
            inst(&[20, 21], "neg"),
            inst(&[20, 22], "neg"),
            inst(&[21, 22], "neg"),
        ];
        let clf =
            PrefixClassifier::<f64>::train(&data, &classes(&["pos", "neg"]), 3, 4096).unwrap();
        let correct = data
            .iter()
            .filter(|i| clf.classes[clf.predict(&i.history, &i.prefix)] == i.label)
            .count();
        assert_eq!(correct, data.len());
    }

    #[test]
    fn uninformative_features_give_priors() {
        let data = vec![inst(&[5, 6], "a"), inst(&[5, 6], "b"), inst(&[5, 6], "c")];
        let clf = PrefixClassifier::<f64>::train(&data, &classes(&["a", "b", "c"]), 1, 64).unwrap();
        for p in clf.posterior(&[], &[5, 6]) {
            assert!((p - 1.0 / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn empty_input_returns_priors() {
        let data = vec![
            inst(&[5], "a"),
            inst(&[6], "a"),
            inst(&[7], "a"),
            inst(&[8], "b"),
        ];
        let clf = PrefixClassifier::<f64>::train(&data, &classes(&["a", "b"]), 9, 64).unwrap();
        let p = clf.posterior(&[], &[]);
        assert!((p[0] - 0.75).abs() < 1e-12 && (p[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn single_class_is_never_exactly_one() {
        let data: Vec<_> = (0..10).map(|i| inst(&[i], "only")).collect();
        let clf = PrefixClassifier::<f64>::train(&data, &classes(&["only"]), 0, 32).unwrap();
        let p = classifier_prob(&clf, &[], &[3], "only").unwrap();
        assert!(p > 0.99 && p < 1.0);
    }

    #[test]
    fn missing_and_unknown_classes() {
        let data = vec![inst(&[1], "a")];
        match PrefixClassifier::<f64>::train(&data, &classes(&["a", "b"]), 0, 8) {
            Err(Error::MissingClass(c)) => assert_eq!(c, "b"),
            other => panic!("unexpected {other:?}"),
        }
        let data = vec![inst(&[1], "a"), inst(&[2], "b")];
        let clf = PrefixClassifier::<f64>::train(&data, &classes(&["a", "b"]), 0, 8).unwrap();
        assert!(classifier_prob(&clf, &[], &[1], "z").is_err());
    }

    /// Two buckets, one token per bucket; Bayes rule evaluated by hand.
    #[test]
    fn matches_brute_force_bayes() {
        let clf = PrefixClassifier::<f64>::from_counts(
            classes(&["a", "b"]),
            vec![3, 1],
            vec![vec![4, 1], vec![1, 2]],
            17,
        )
        .unwrap();
        let tok = 5u32;
        let b = bucket(17, 2, SEGMENT_RESPONSE, tok);
        let lik_a = [(4.0 + 1.0) / 7.0, (1.0 + 1.0) / 7.0][b];
        let lik_b = [(1.0 + 1.0) / 5.0, (2.0 + 1.0) / 5.0][b];
        let joint_a = 0.75 * lik_a * lik_a;
        let joint_b = 0.25 * lik_b * lik_b;
        let expected = joint_a / (joint_a + joint_b);
        let got = classifier_prob(&clf, &[], &[tok, tok], "a").unwrap();
        assert!((got - expected).abs() < 1e-14);
    }

    fn random_classifier(rng: &mut ChaCha8Rng, c: usize, buckets: usize) -> PrefixClassifier<f64> {
        PrefixClassifier::from_counts(
            (0..c).map(|i| format!("c{i}")).collect(),
            (0..c).map(|_| rng.gen_range(1..50)).collect(),
            (0..c)
                .map(|_| (0..buckets).map(|_| rng.gen_range(0..30)).collect())
                .collect(),
            rng.gen(),
        )
        .unwrap()
    }

    #[test]
    fn incremental_extension_matches_from_scratch() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let clf = random_classifier(&mut rng, 4, 64);
        let history = vec![vec![3, 4, 5], vec![9]];
        let mut prefix: Vec<u32> = vec![];
        let mut state = clf.begin_prefix(&history, &prefix);
        let mut max_rel = 0.0f64;
        for _ in 0..1000 {
            let t = rng.gen_range(0..40);
            let k = rng.gen_range(0..4);
            let peek = clf.extended_posterior(&state, t, k);
            clf.extend_in_place(&mut state, t);
            prefix.push(t);
            let scratch = clf.state_posterior(&clf.begin_prefix(&history, &prefix), k);
            let inc = clf.state_posterior(&state, k);
            max_rel = max_rel
                .max(((inc - scratch) / scratch).abs())
                .max(((peek - scratch) / scratch).abs());
        }
        assert!(max_rel < 1e-12, "max relative error {max_rel}");
    }

    #[test]
    fn extend_by_unk_and_twice() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let clf = random_classifier(&mut rng, 3, 16);
        let h = vec![vec![7]];
        let s = clf.begin_prefix(&h, &[4]);
        let once = clf.extend_prefix(&s, crate::corpus::UNK_ID);
        assert_eq!(once, clf.begin_prefix(&h, &[4, crate::corpus::UNK_ID]));
        let twice = clf.extend_prefix(&once, 9);
        assert_eq!(twice, clf.begin_prefix(&h, &[4, crate::corpus::UNK_ID, 9]));
    }

    #[test]
    fn different_seeds_disagree_somewhere_on_noisy_data() {
        // Overlapping vocabularies make the corpus non-separable; with few
        // buckets the two hash layouts collide differently.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let make = |rng: &mut ChaCha8Rng, n: usize| -> Vec<PrefixInstance> {
            (0..n)
                .map(|_| {
                    let label = rng.gen_range(0..2);
                    let base = if label == 0 { 10 } else { 25 };
                    let prefix = (0..6)
                        .map(|_| rng.gen_range(base..base + 30))
                        .collect::<Vec<u32>>();
                    inst(&prefix, ["x", "y"][label])
                })
                .collect()
        };
        let train = make(&mut rng, 400);
        let held = make(&mut rng, 400);
        let cs = classes(&["x", "y"]);
        let a = PrefixClassifier::<f64>::train(&train, &cs, 1, 32).unwrap();
        let b = PrefixClassifier::<f64>::train(&train, &cs, 2, 32).unwrap();
        let disagree = held
            .iter()
            .filter(|i| a.predict(&i.history, &i.prefix) != b.predict(&i.history, &i.prefix))
            .count();
        assert!(disagree > 0);
    }

    #[test]
    fn training_is_deterministic() {
        let data = vec![inst(&[1, 2], "a"), inst(&[3], "b"), inst(&[2, 3], "a")];
        let cs = classes(&["a", "b"]);
        let a = PrefixClassifier::<f64>::train(&data, &cs, 4, 128).unwrap();
        let b = PrefixClassifier::<f64>::train(&data, &cs, 4, 128).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn posterior_is_normalized_and_open(
            seed in any::<u64>(),
            prefix in proptest::collection::vec(0u32..100, 0..30),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let clf = random_classifier(&mut rng, 5, 32);
            let p = clf.posterior(&[vec![1, 2]], &prefix);
            let s: f64 = p.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }
}
