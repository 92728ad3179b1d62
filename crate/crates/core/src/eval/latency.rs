use std::time::Instant;

use crate::decoder::{Controller, DecodeConfig, DecodeMode, Decoder, Target};
use crate::error::{Error, Result};
use crate::models::LanguageModel;

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyReport {
    pub baseline_mode: DecodeMode,
    pub candidate_mode: DecodeMode,
    /// Median per-token milliseconds.
    pub baseline_ms: f64,
    pub candidate_ms: f64,
    /// `candidate_ms / baseline_ms`.
    pub ratio: f64,
    pub repetitions: usize,
    pub baseline_tokens: usize,
    pub candidate_tokens: usize,
}

/// One decoding input: dialogue history and its targets.
pub struct BenchInput<'a> {
    pub history: &'a [Vec<u32>],
    pub targets: Vec<Target>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn run_once(
    lm: &dyn LanguageModel<f64>,
    controllers: &[Controller<'_, f64>],
    inputs: &[BenchInput<'_>],
    config: &DecodeConfig<f64>,
) -> Result<(f64, usize)> {
    let decoders = inputs
        .iter()
        .map(|i| {
            Decoder::new(
                lm,
                controllers,
                config.clone().with_targets(i.targets.clone()),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let start = Instant::now();
    let mut tokens = 0;
    for (d, i) in decoders.iter().zip(inputs) {
        tokens += d.decode(i.history)?.response.len();
    }
    Ok((start.elapsed().as_secs_f64() * 1e3, tokens))
}

/// Per-token wall-clock time of `candidate` relative to `baseline` on
/// identical inputs. Runs one untimed warm-up pass per mode, then
/// alternates the two modes for `repetitions` timed passes and reports
/// medians. Decoding is single-threaded.
pub fn latency_benchmark(
    lm: &dyn LanguageModel<f64>,
    controllers: &[Controller<'_, f64>],
    inputs: &[BenchInput<'_>],
    base: &DecodeConfig<f64>,
    baseline: DecodeMode,
    candidate: DecodeMode,
    repetitions: usize,
) -> Result<LatencyReport> {
    if repetitions < 3 {
        return Err(Error::invalid(
            "latency benchmark needs at least 3 repetitions",
        ));
    }
    if inputs.is_empty() {
        return Err(Error::invalid("latency benchmark needs at least one input"));
    }
    let cfg_a = base.clone().with_mode(baseline);
    let cfg_b = base.clone().with_mode(candidate);
    run_once(lm, controllers, inputs, &cfg_a)?;
    run_once(lm, controllers, inputs, &cfg_b)?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    let (mut ta, mut tb) = (0, 0);
    for rep in 0..repetitions {
        // alternate which mode goes first to cancel drift
        let order = if rep % 2 == 0 {
            [false, true]
        } else {
            [true, false]
        };
        for second in order {
            let (cfg, times, toks) = if second {
                (&cfg_b, &mut b, &mut tb)
            } else {
                (&cfg_a, &mut a, &mut ta)
            };
            let (ms, n) = run_once(lm, controllers, inputs, cfg)?;
            if n == 0 {
                return Err(Error::invalid("benchmark produced no tokens"));
            }
            times.push(ms / n as f64);
            *toks = n;
        }
    }
    let baseline_ms = median(a);
    let candidate_ms = median(b);
    Ok(LatencyReport {
        baseline_mode: baseline,
        candidate_mode: candidate,
        baseline_ms,
        candidate_ms,
        ratio: candidate_ms / baseline_ms,
        repetitions,
        baseline_tokens: ta,
        candidate_tokens: tb,
    })
}

pub const LATENCY_HEADER: &str = "mode\tper_token_ms\ttokens\trepetitions";

pub fn latency_tsv(r: &LatencyReport) -> String {
    format!(
        "{LATENCY_HEADER}\n{}\t{}\t{}\t{}\n{}\t{}\t{}\t{}\nratio\t{}\t\t\n",
        r.baseline_mode,
        r.baseline_ms,
        r.baseline_tokens,
        r.repetitions,
        r.candidate_mode,
        r.candidate_ms,
        r.candidate_tokens,
        r.repetitions,
        r.ratio
    )
}
