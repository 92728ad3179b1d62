//! Weighted decoding: static and entropy-controlled scoring, the greedy
//! decode loop, step traces, and a brute-force reference step.

mod config;
mod engine;
mod oracle;
mod scoring;
mod trace;

pub use config::{DecodeConfig, DecodeMode, Target, DEFAULT_K, DEFAULT_LAMBDA, DEFAULT_MAX_LEN};
pub use engine::{decode, decode_step, greedy_lm_decode, Controller, Decoder, Session};
pub use oracle::brute_force_step_oracle;
pub use scoring::{argmax_by_token, score_eco, score_static};
pub use trace::{
    write_trace_tsv, AttributeStep, DecodeTrace, StepTrace, Termination, TRACE_HEADER,
};
