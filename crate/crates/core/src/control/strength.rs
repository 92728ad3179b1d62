use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Decreasing map from entropy to control strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum StrengthKind {
    /// `1 + 1 / (1 + e)`
    #[default]
    Reciprocal,
    /// `1 + exp(-e)`
    Exponential,
    /// `1 + (ln V - e)`
    Negative,
}

impl StrengthKind {
    pub const ALL: [StrengthKind; 3] = [Self::Reciprocal, Self::Exponential, Self::Negative];

    pub fn name(self) -> &'static str {
        match self {
            Self::Reciprocal => "reciprocal",
            Self::Exponential => "exponential",
            Self::Negative => "negative",
        }
    }
}

impl fmt::Display for StrengthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrengthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strength function `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrengthFunction {
    pub kind: StrengthKind,
    /// Only read by [`StrengthKind::Negative`].
    pub vocab_size: usize,
}

impl StrengthFunction {
    pub fn new(kind: StrengthKind, vocab_size: usize) -> Self {
        Self { kind, vocab_size }
    }

    pub fn reciprocal() -> Self {
        Self::new(StrengthKind::Reciprocal, 0)
    }

    pub fn exponential() -> Self {
        Self::new(StrengthKind::Exponential, 0)
    }

    pub fn negative(vocab_size: usize) -> Self {
        Self::new(StrengthKind::Negative, vocab_size)
    }

    pub fn apply<T: Scalar>(&self, e: T) -> Result<T> {
        strength(e, *self)
    }
}

/// Control strength `α >= 1` for entropy `e` (nats).
pub fn strength<T: Scalar>(e: T, f: StrengthFunction) -> Result<T> {
    if !(e >= T::zero()) {
        return Err(Error::invalid(format!("entropy {e} must be >= 0")));
    }
    let one = T::one();
    Ok(match f.kind {
        StrengthKind::Reciprocal => one + one / (one + e),
        StrengthKind::Exponential => one + (-e).exp(),
        StrengthKind::Negative => {
            if f.vocab_size < 2 {
                return Err(Error::invalid(
                    "negative strength needs a vocabulary size >= 2",
                ));
            }
            let ln_v = T::count(f.vocab_size as u64).ln();
            if e > ln_v {
                return Err(Error::invalid(format!("entropy {e} exceeds ln V = {ln_v}")));
            }
            one + (ln_v - e)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let r = StrengthFunction::reciprocal();
        let x = StrengthFunction::exponential();
        assert_eq!(strength(0.0f64, r).unwrap(), 2.0);
        assert_eq!(strength(1.0f64, r).unwrap(), 1.5);
        assert_eq!(strength(0.0f64, x).unwrap(), 2.0);
        assert!((strength(2f64.ln(), x).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn negative_spans_one_to_one_plus_ln_v() {
        let n = StrengthFunction::negative(8);
        let ln8 = 8f64.ln();
        assert!((strength(ln8, n).unwrap() - 1.0).abs() < 1e-15);
        assert!((strength(0.0f64, n).unwrap() - 3.0794).abs() < 1e-4);
        assert!(strength(ln8 + 0.01, n).is_err());
    }

    #[test]
    fn negative_entropy_is_rejected() {
        for k in StrengthKind::ALL {
            assert!(strength(-0.1f64, StrengthFunction::new(k, 10)).is_err());
            assert!(strength(f64::NAN, StrengthFunction::new(k, 10)).is_err());
        }
    }

    #[test]
    fn strictly_decreasing_on_grid() {
        let v = 50;
        let top = (v as f64).ln();
        for k in StrengthKind::ALL {
            let f = StrengthFunction::new(k, v);
            let a: Vec<f64> = (0..100)
                .map(|i| strength(top * i as f64 / 99.0, f).unwrap())
                .collect();
            assert!(a.windows(2).all(|w| w[1] < w[0]), "{k}");
            assert!(a.iter().all(|&x| x >= 1.0));
        }
    }

    #[test]
    fn names_round_trip() {
        for k in StrengthKind::ALL {
            assert_eq!(k.name().parse::<StrengthKind>().unwrap(), k);
        }
        assert!("linear".parse::<StrengthKind>().is_err());
    }
}
