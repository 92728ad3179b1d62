use std::fmt;
use std::str::FromStr;

use crate::control::{SmoothingInput, StrengthKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_K: usize = 50;
pub const DEFAULT_LAMBDA: f64 = 4.0;
pub const DEFAULT_MAX_LEN: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DecodeMode {
    /// Plain greedy decoding from the language model.
    Uncontrolled,
    /// Fixed exponent `λ` on every attribute probability.
    Static,
    /// Entropy-derived exponents on the LM and on each attribute.
    #[default]
    Eco,
}

impl DecodeMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Uncontrolled => "none",
            Self::Static => "static",
            Self::Eco => "eco",
        }
    }
}

impl fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "uncontrolled" => Ok(Self::Uncontrolled),
            "static" => Ok(Self::Static),
            "eco" => Ok(Self::Eco),
            _ => Err(Error::invalid(format!("unknown decode mode `{s}`"))),
        }
    }
}

/// A requested attribute value, e.g. `emotion=happiness`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Target {
    pub attribute: String,
    pub class: String,
}

impl Target {
    pub fn new(attribute: &str, class: &str) -> Self {
        Self {
            attribute: attribute.to_string(),
            class: class.to_string(),
        }
    }

    /// Parses `attr=class[,attr=class...]`.
    pub fn parse_list(s: &str) -> Result<Vec<Target>> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let (a, c) = p
                    .split_once('=')
                    .ok_or_else(|| Error::invalid(format!("target `{p}` is not attr=class")))?;
                Ok(Target::new(a.trim(), c.trim()))
            })
            .collect()
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attribute, self.class)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeConfig<T> {
    pub mode: DecodeMode,
    /// Strength scale on the attribute terms.
    pub lambda: T,
    /// Size of the top-k candidate set.
    pub k: usize,
    pub tau_lm: T,
    pub tau_c: T,
    pub strength: StrengthKind,
    pub smoothing: SmoothingInput,
    pub max_len: usize,
    pub targets: Vec<Target>,
    /// Replaces every entropy-derived strength with this constant. With
    /// `Some(1)` eco scoring reduces to static scoring; meant for
    /// diagnostics and tests.
    pub fixed_alpha: Option<T>,
}

impl<T: Scalar> Default for DecodeConfig<T> {
    fn default() -> Self {
        Self {
            mode: DecodeMode::Eco,
            lambda: T::lit(DEFAULT_LAMBDA),
            k: DEFAULT_K,
            tau_lm: T::one(),
            tau_c: T::one(),
            strength: StrengthKind::Reciprocal,
            smoothing: SmoothingInput::Probability,
            max_len: DEFAULT_MAX_LEN,
            targets: Vec::new(),
            fixed_alpha: None,
        }
    }
}

impl<T: Scalar> DecodeConfig<T> {
    pub fn with_mode(mut self, mode: DecodeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_targets(mut self, targets: Vec<Target>) -> Self {
        self.targets = targets;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_len == 0 {
            return Err(Error::invalid("max_len must be >= 1"));
        }
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!(
                "lambda {} must be finite and >= 0",
                self.lambda
            )));
        }
        if self.k < 2 {
            return Err(Error::invalid("k must be >= 2"));
        }
        for (name, tau) in [("tau_lm", self.tau_lm), ("tau_c", self.tau_c)] {
            if !(tau > T::zero()) || !tau.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if let Some(a) = self.fixed_alpha {
            if !(a > T::zero()) {
                return Err(Error::invalid("fixed_alpha must be positive"));
            }
        }
        if self.mode != DecodeMode::Uncontrolled && self.targets.is_empty() {
            return Err(Error::invalid(format!(
                "mode {} needs at least one target",
                self.mode
            )));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if self.targets[..i].iter().any(|u| u.attribute == t.attribute) {
                return Err(Error::invalid(format!(
                    "attribute `{}` targeted twice",
                    t.attribute
                )));
            }
        }
        Ok(())
    }
}
