use std::collections::{HashMap, HashSet};
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::models::{AttributeModel, PrefixClassifier};

/// Fraction of responses the evaluator assigns to their target class.
///
/// The evaluator must not share a hash seed with any controller.
pub fn attribute_accuracy(
    evaluator: &PrefixClassifier<f64>,
    controllers: &[&dyn AttributeModel<f64>],
    histories: &[&[Vec<u32>]],
    responses: &[&[u32]],
    targets: &[&str],
) -> Result<f64> {
    if let Some(seed) = controllers
        .iter()
        .filter_map(|c| c.hash_seed())
        .find(|&s| s == evaluator.seed())
    {
        return Err(Error::SeedCollision(seed));
    }
    if responses.is_empty() {
        return Err(Error::invalid("accuracy of an empty response list"));
    }
    if histories.len() != responses.len() || targets.len() != responses.len() {
        return Err(Error::invalid(
            "histories, responses and targets differ in length",
        ));
    }
    let mut hits = 0usize;
    for ((h, r), t) in histories.iter().zip(responses).zip(targets) {
        let want = evaluator
            .class_index(t)
            .ok_or_else(|| Error::UnknownClass(t.to_string()))?;
        if evaluator.predict(h, r) == want {
            hits += 1;
        }
    }
    Ok(hits as f64 / responses.len() as f64)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n-gram order must be >= 1"));
    }
    Ok(())
}

/// Corpus-level Dist-n: unique n-grams over total n-grams, pooled across
/// responses. Responses shorter than `n` contribute nothing.
pub fn distinct_n<S: AsRef<[W]>, W: Eq + Hash>(responses: &[S], n: usize) -> Result<f64> {
    check_n(n)?;
    if responses.is_empty() {
        return Err(Error::invalid("distinct-n of an empty response list"));
    }
    let mut seen: HashSet<&[W]> = HashSet::new();
    let mut total = 0usize;
    for r in responses {
        for g in r.as_ref().windows(n) {
            seen.insert(g);
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::invalid(format!(
            "every response is shorter than {n}"
        )));
    }
    Ok(seen.len() as f64 / total as f64)
}

/// Mean of per-response Dist-n over the responses long enough to have an
/// n-gram, and the number of responses that were skipped.
pub fn distinct_n_per_response<S: AsRef<[W]>, W: Eq + Hash>(
    responses: &[S],
    n: usize,
) -> Result<(f64, usize)> {
    check_n(n)?;
    let mut sum = 0.0;
    let mut counted = 0usize;
    for r in responses {
        let r = r.as_ref();
        if r.len() < n {
            continue;
        }
        let grams: HashSet<&[W]> = r.windows(n).collect();
        sum += grams.len() as f64 / (r.len() + 1 - n) as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::invalid(format!(
            "every response is shorter than {n}"
        )));
    }
    Ok((sum / counted as f64, responses.len() - counted))
}

fn f1(overlap: usize, hyp_len: usize, ref_len: usize) -> f64 {
    if overlap == 0 {
        return 0.0;
    }
    let p = overlap as f64 / hyp_len as f64;
    let r = overlap as f64 / ref_len as f64;
    2.0 * p * r / (p + r)
}

fn check_ref<W>(reference: &[W]) -> Result<()> {
    if reference.is_empty() {
        return Err(Error::invalid("ROUGE against an empty reference"));
    }
    Ok(())
}

/// Unigram-overlap F1 with clipped counts.
pub fn rouge1<W: Eq + Hash>(hyp: &[W], reference: &[W]) -> Result<f64> {
    check_ref(reference)?;
    let mut counts: HashMap<&W, usize> = HashMap::new();
    for w in reference {
        *counts.entry(w).or_default() += 1;
    }
    let mut overlap = 0;
    for w in hyp {
        if let Some(c) = counts.get_mut(w) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    Ok(f1(overlap, hyp.len(), reference.len()))
}

pub fn lcs_len<W: Eq>(a: &[W], b: &[W]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { above.max(row[j]) };
            diag = above;
        }
    }
    row[b.len()]
}

/// Longest-common-subsequence F1.
pub fn rouge_l<W: Eq>(hyp: &[W], reference: &[W]) -> Result<f64> {
    check_ref(reference)?;
    Ok(f1(lcs_len(hyp, reference), hyp.len(), reference.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn rouge_hand_case() {
        let (h, r) = (w("a b c"), w("a c d"));
        assert_eq!(rouge1(&h, &r).unwrap(), 2.0 / 3.0);
        assert_eq!(lcs_len(&h, &r), 2);
        assert_eq!(rouge_l(&h, &r).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn rouge_edges() {
        assert_eq!(rouge1(&w("x y"), &w("x y")).unwrap(), 1.0);
        assert_eq!(rouge_l(&w("x y"), &w("x y")).unwrap(), 1.0);
        assert_eq!(rouge1(&w("x y"), &w("p q")).unwrap(), 0.0);
        assert_eq!(rouge_l(&w("x y"), &w("p q")).unwrap(), 0.0);
        assert_eq!(rouge1(&w(""), &w("p q")).unwrap(), 0.0);
        assert!(rouge1(&w("p"), &w("")).is_err());
        assert!(rouge_l(&w("p"), &w("")).is_err());
        // clipping: "a a a" against "a b" overlaps once
        assert_eq!(
            rouge1(&w("a a a"), &w("a b")).unwrap(),
            2.0 * (1.0 / 3.0) * 0.5 / (1.0 / 3.0 + 0.5)
        );
    }

    #[test]
    fn distinct_cases() {
        assert_eq!(distinct_n(&[w("a b c")], 1).unwrap(), 1.0);
        assert_eq!(distinct_n(&[w("a a a")], 1).unwrap(), 1.0 / 3.0);
        assert_eq!(distinct_n(&[w("a b"), w("a b")], 2).unwrap(), 0.5);
        assert_eq!(distinct_n(&[w("a"), w("a b")], 2).unwrap(), 1.0);
        assert!(distinct_n(&[w("a"), w("b")], 2).is_err());
        assert!(distinct_n::<Vec<&str>, &str>(&[], 1).is_err());
        assert!(distinct_n(&[w("a")], 0).is_err());
        let (m, skipped) = distinct_n_per_response(&[w("a a"), w("b c"), w("d")], 1).unwrap();
        assert_eq!(m, 2.5 / 3.0);
        assert_eq!(skipped, 0);
        let (m, skipped) = distinct_n_per_response(&[w("a b"), w("d")], 2).unwrap();
        assert_eq!((m, skipped), (1.0, 1));
    }

    fn lcs_brute(a: &[u8], b: &[u8]) -> usize {
        // longest subsequence of `a` that is also a subsequence of `b`
        let is_sub = |s: &[u8]| {
            let mut it = b.iter();
            s.iter().all(|c| it.any(|x| x == c))
        };
        let mut best = 0;
        for mask in 0u32..(1 << a.len()) {
            let s: Vec<u8> = (0..a.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| a[i])
                .collect();
            if s.len() > best && is_sub(&s) {
                best = s.len();
            }
        }
        best
    }

    proptest! {
        #[test]
        fn lcs_matches_enumeration(a in proptest::collection::vec(0u8..3, 0..9), b in proptest::collection::vec(0u8..3, 0..9)) {
            prop_assert_eq!(lcs_len(&a, &b), lcs_brute(&a, &b));
        }

        #[test]
        fn rouge_bounds(a in proptest::collection::vec(0u8..5, 1..15), b in proptest::collection::vec(0u8..5, 1..15)) {
            for v in [rouge1(&a, &b).unwrap(), rouge_l(&a, &b).unwrap()] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert_eq!(rouge1(&a, &a).unwrap(), 1.0);
            prop_assert_eq!(rouge_l(&a, &a).unwrap(), 1.0);
            prop_assert!((rouge1(&a, &b).unwrap() - rouge1(&b, &a).unwrap()).abs() < 1e-15);
        }

        #[test]
        fn distinct_is_one_iff_unique(rs in proptest::collection::vec(proptest::collection::vec(0u8..4, 1..6), 1..5), n in 1usize..3) {
            if let Ok(d) = distinct_n(&rs, n) {
                prop_assert!(d <= 1.0 && d > 0.0);
                let all: Vec<&[u8]> = rs.iter().flat_map(|r| r.windows(n)).collect();
                let unique: HashSet<&[u8]> = all.iter().cloned().collect();
                prop_assert_eq!(d == 1.0, unique.len() == all.len());
            }
        }
    }
}
