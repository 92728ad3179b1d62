//! Evaluation: metrics with an independent evaluator, the experiment
//! harness, λ and τ sweeps, latency benchmarking and entropy export.
//! Everything here runs in `f64`.

mod entropy;
mod experiment;
mod latency;
mod metrics;
mod report;
mod sweep;

pub use entropy::{entropy_tsv, export_entropy_summary, TokenEntropy, ENTROPY_HEADER};
pub use experiment::{
    classifier_accuracy, corpus_perplexity, gold_targets, prepare_splits, train_classifier,
    train_lm, Experiment, ExperimentSettings, Splits,
};
pub use latency::{latency_benchmark, latency_tsv, BenchInput, LatencyReport, LATENCY_HEADER};
pub use metrics::{
    attribute_accuracy, distinct_n, distinct_n_per_response, lcs_len, rouge1, rouge_l,
};
pub use report::{accuracy_for, evaluate, format_report, EvalReport, REPORT_HEADER};
pub use sweep::{
    ablation_summary, ablation_tsv, baseline_point, compare_modes, lambda_sweep, strength_ablation,
    sweep_svg, sweep_tsv, tau_sweep, tau_tsv, MatchedPoint, ModeComparison, SweepPoint, SweepSpec,
    TauPoint, ABLATION_HEADER, SWEEP_HEADER, TAU_HEADER,
};
