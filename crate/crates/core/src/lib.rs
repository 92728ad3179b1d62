//! Controllable text decoding with entropy-based dynamic control strength.
//!
//! Weighted decoding multiplies a language model's next-token probabilities
//! by attribute-classifier probabilities raised to a control strength. The
//! entropy-controlled variant ("eco") derives per-step exponents from the
//! entropies of the LM's top-k distribution and of each classifier's scores
//! over the same candidates, so confident distributions weigh more.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below name the common instantiations.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod corpus;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod models;
pub mod prob;
pub mod scalar;

pub use error::{Error, Result};
pub use prob::ProbVector;
pub use scalar::Scalar;

pub type ProbVector64 = ProbVector<f64>;
pub type ProbVector32 = ProbVector<f32>;
pub type NGramLm64 = models::NGramLm<f64>;
pub type NGramLm32 = models::NGramLm<f32>;
pub type PrefixClassifier64 = models::PrefixClassifier<f64>;
pub type PrefixClassifier32 = models::PrefixClassifier<f32>;
pub type DecodeConfig64 = decoder::DecodeConfig<f64>;
pub type DecodeConfig32 = decoder::DecodeConfig<f32>;
pub type DecodeTrace64 = decoder::DecodeTrace<f64>;
pub type DecodeTrace32 = decoder::DecodeTrace<f32>;
