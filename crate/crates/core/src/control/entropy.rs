use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How candidate values are turned into softmax inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoothingInput {
    /// Softmax over the probabilities themselves divided by the temperature.
    #[default]
    Probability,
    /// Softmax over log-probabilities divided by the temperature, i.e. the
    /// values renormalized after raising them to the power `1/τ`.
    LogProbability,
}

impl std::str::FromStr for SmoothingInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prob" | "probability" => Ok(Self::Probability),
            "log" | "log-prob" | "logit" => Ok(Self::LogProbability),
            _ => Err(Error::invalid(format!("unknown smoothing input `{s}`"))),
        }
    }
}

fn check(values_len: usize, tau: f64) -> Result<()> {
    if values_len == 0 {
        return Err(Error::invalid("entropy of an empty candidate set"));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!(
            "temperature {tau} must be positive"
        )));
    }
    Ok(())
}

/// Temperature softmax of `values` and its Shannon entropy in nats.
pub fn smooth_and_entropy<T: Scalar>(
    values: &[T],
    tau: T,
    input: SmoothingInput,
) -> Result<(Vec<T>, T)> {
    let mut probs = Vec::with_capacity(values.len());
    let e = entropy_impl(values, tau, input, Some(&mut probs))?;
    Ok((probs, e))
}

/// Entropy of the smoothed distribution without materializing it.
pub fn smoothed_entropy<T: Scalar>(values: &[T], tau: T, input: SmoothingInput) -> Result<T> {
    entropy_impl(values, tau, input, None)
}

#[inline]
fn entropy_impl<T: Scalar>(
    values: &[T],
    tau: T,
    input: SmoothingInput,
    out: Option<&mut Vec<T>>,
) -> Result<T> {
    check(values.len(), tau.as_f64())?;
    let inv_tau = T::one() / tau;
    let mut top = T::neg_infinity();
    for &v in values {
        if !v.is_finite() || (input == SmoothingInput::LogProbability && v < T::zero()) {
            return Err(Error::invalid(format!("cannot smooth value {v}")));
        }
        top = top.max(v);
    }
    // Both inputs are increasing in v, so the largest logit belongs to `top`.
    let shift = match input {
        SmoothingInput::Probability => top,
        SmoothingInput::LogProbability => top.ln(),
    };
    if shift == T::neg_infinity() {
        return Err(Error::invalid("all candidate values are zero"));
    }
    let delta = |v: T| match input {
        SmoothingInput::Probability => (v - shift) * inv_tau,
        SmoothingInput::LogProbability => (v.ln() - shift) * inv_tau,
    };
    // H = ln Z - sum_i p_i * d_i, with d_i = x_i - max and p_i = exp(d_i) / Z.
    let mut z = T::zero();
    let mut weighted = T::zero();
    for &v in values {
        let d = delta(v);
        let w = d.exp();
        z = z + w;
        if w > T::zero() {
            weighted = weighted + w * d;
        }
    }
    if let Some(out) = out {
        out.clear();
        out.extend(values.iter().map(|&v| delta(v).exp() / z));
    }
    let h = z.ln() - weighted / z;
    let ln_k = T::count(values.len() as u64).ln();
    Ok(h.max(T::zero()).min(ln_k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{strength, StrengthFunction};
    use proptest::prelude::*;

    #[test]
    fn equal_values_are_uniform() {
        for tau in [0.1, 1.0, 7.0] {
            let (p, e) =
                smooth_and_entropy(&[0.3f64; 5], tau, SmoothingInput::Probability).unwrap();
            assert!(p.iter().all(|&x| (x - 0.2).abs() < 1e-15));
            assert!((e - 5f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_case_matches_direct_evaluation() {
        let (p, e) = smooth_and_entropy(&[0.6f64, 0.4], 1.0, SmoothingInput::Probability).unwrap();
        let a = 1.0 / (1.0 + (-0.2f64).exp());
        let direct = -(a * a.ln() + (1.0 - a) * (1.0 - a).ln());
        assert!((p[0] - a).abs() < 1e-15 && (p[1] - (1.0 - a)).abs() < 1e-15);
        assert!((p[0] - 0.5498).abs() < 1e-4);
        assert!((e - direct).abs() < 1e-15);
    }

    #[test]
    fn huge_temperature_flattens() {
        let (p, _) =
            smooth_and_entropy(&[0.9f64, 0.05, 0.05], 1e9, SmoothingInput::Probability).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-6));
    }

    #[test]
    fn log_input_with_tiny_temperature_collapses() {
        let e =
            smoothed_entropy(&[0.5f64, 0.3, 0.2], 1e-3, SmoothingInput::LogProbability).unwrap();
        assert!(e < 1e-200);
        assert_eq!(strength(e, StrengthFunction::reciprocal()).unwrap(), 2.0);
    }

    #[test]
    fn log_input_at_unit_temperature_is_plain_renormalization() {
        let (p, _) =
            smooth_and_entropy(&[0.2f64, 0.1, 0.1], 1.0, SmoothingInput::LogProbability).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(smoothed_entropy(&[0.5f64], 0.0, SmoothingInput::Probability).is_err());
        assert!(smoothed_entropy(&[0.5f64], -1.0, SmoothingInput::Probability).is_err());
        assert!(smoothed_entropy::<f64>(&[], 1.0, SmoothingInput::Probability).is_err());
        assert!(smoothed_entropy(&[0.0f64, 0.0], 1.0, SmoothingInput::LogProbability).is_err());
    }

    proptest! {
        #[test]
        fn both_entry_points_agree(v in proptest::collection::vec(0.001f64..1.0, 1..60), tau in 0.05f64..20.0) {
            for input in [SmoothingInput::Probability, SmoothingInput::LogProbability] {
                let (p, e) = smooth_and_entropy(&v, tau, input).unwrap();
                prop_assert_eq!(e, smoothed_entropy(&v, tau, input).unwrap());
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let direct: f64 = -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>();
                prop_assert!((e - direct.clamp(0.0, (v.len() as f64).ln())).abs() < 1e-12);
            }
        }
    }
}
