use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{Settings, UsageError};

#[derive(Parser)]
#[command(
    name = "ecodec",
    version,
    about = "Entropy-controlled weighted decoding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON-lines dialogue dataset.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    model_dir: Option<PathBuf>,
    /// Any config key, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Default)]
struct DecodeFlags {
    /// none, static or eco.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tau_lm: Option<f64>,
    #[arg(long)]
    tau_c: Option<f64>,
    /// reciprocal, exponential or negative.
    #[arg(long = "strength-fn")]
    strength_fn: Option<String>,
    /// prob or log: what the entropy softmax is applied to.
    #[arg(long)]
    smoothing: Option<String>,
    #[arg(long)]
    max_len: Option<usize>,
}

#[derive(Args, Default)]
struct ExperimentFlags {
    /// Comma-separated attributes controlled together.
    #[arg(long)]
    attributes: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the templated toy dialogue corpus.
    GenToy {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = ecodec::corpus::toy::DEFAULT_TOY_SIZE)]
        n: usize,
        #[arg(long, default_value_t = ecodec::corpus::toy::DEFAULT_TOY_SEED)]
        seed: u64,
    },
    /// Train the n-gram LM on the train split.
    TrainLm {
        #[command(flatten)]
        common: Common,
    },
    /// Train prefix classifiers, optionally with independent evaluators.
    TrainClf {
        #[command(flatten)]
        common: Common,
        /// Attributes to train; defaults to every schema attribute.
        #[arg(long, value_delimiter = ',')]
        attribute: Vec<String>,
        #[arg(long)]
        evaluator: bool,
    },
    /// Generate one response.
    Decode {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decode: DecodeFlags,
        /// A history utterance, oldest first. Repeatable.
        #[arg(long)]
        history: Vec<String>,
        /// attr=class[,attr=class...]
        #[arg(long)]
        targets: Option<String>,
        /// Write the per-step trace TSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// λ sweep for each mode on the test split.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decode: DecodeFlags,
        #[command(flatten)]
        exp: ExperimentFlags,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        modes: Option<String>,
    },
    /// Eco decoding over a grid of smoothing temperatures.
    TauSweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decode: DecodeFlags,
        #[command(flatten)]
        exp: ExperimentFlags,
        #[arg(long)]
        taus: Option<String>,
    },
    /// Per-token latency of eco against static decoding.
    Bench {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decode: DecodeFlags,
        #[command(flatten)]
        exp: ExperimentFlags,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Metric suite on the test split for one decoding configuration.
    Eval {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decode: DecodeFlags,
        #[command(flatten)]
        exp: ExperimentFlags,
    },
    /// Per-token LM entropy of eco decodes on the test split.
    EntropyDump {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decode: DecodeFlags,
        #[command(flatten)]
        exp: ExperimentFlags,
    },
    /// The λ sweep repeated for each strength function.
    Ablation {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        decode: DecodeFlags,
        #[command(flatten)]
        exp: ExperimentFlags,
        #[arg(long)]
        grid: Option<String>,
    },
}

fn settings(
    common: &Common,
    decode: Option<&DecodeFlags>,
    extra: &[(&str, Option<String>)],
) -> anyhow::Result<Settings> {
    let mut s = Settings::new();
    if let Some(p) = &common.config {
        s.load_file(p)?;
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| config::usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        s.set(k, v)?;
    }
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    s.set_opt("out", path(&common.out))?;
    s.set_opt("data", path(&common.data))?;
    s.set_opt("model_dir", path(&common.model_dir))?;
    if let Some(d) = decode {
        s.set_opt("mode", d.mode.clone())?;
        s.set_opt("lambda", d.lambda)?;
        s.set_opt("k", d.k)?;
        s.set_opt("tau_lm", d.tau_lm)?;
        s.set_opt("tau_c", d.tau_c)?;
        s.set_opt("strength", d.strength_fn.clone())?;
        s.set_opt("smoothing", d.smoothing.clone())?;
        s.set_opt("max_len", d.max_len)?;
    }
    for (k, v) in extra {
        s.set_opt(k, v.clone())?;
    }
    Ok(s)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenToy { output, n, seed } => commands::gen_toy(&output, n, seed),
        Command::TrainLm { common } => commands::train_lm(&settings(&common, None, &[])?),
        Command::TrainClf {
            common,
            attribute,
            evaluator,
        } => commands::train_clf(&settings(&common, None, &[])?, &attribute, evaluator),
        Command::Decode {
            common,
            decode,
            history,
            targets,
            trace,
        } => {
            let s = settings(&common, Some(&decode), &[("targets", targets)])?;
            commands::decode(&s, &history, trace.as_deref())
        }
        Command::Sweep {
            common,
            decode,
            exp,
            grid,
            modes,
        } => {
            let extra = [
                ("attributes", exp.attributes),
                ("grid", grid),
                ("modes", modes),
            ];
            commands::sweep(&settings(&common, Some(&decode), &extra)?)
        }
        Command::TauSweep {
            common,
            decode,
            exp,
            taus,
        } => {
            let extra = [("attributes", exp.attributes), ("taus", taus)];
            commands::tau_sweep(&settings(&common, Some(&decode), &extra)?)
        }
        Command::Bench {
            common,
            decode,
            exp,
            reps,
        } => {
            let extra = [
                ("attributes", exp.attributes),
                ("reps", reps.map(|r| r.to_string())),
            ];
            commands::bench(&settings(&common, Some(&decode), &extra)?)
        }
        Command::Eval {
            common,
            decode,
            exp,
        } => commands::eval(&settings(
            &common,
            Some(&decode),
            &[("attributes", exp.attributes)],
        )?),
        Command::EntropyDump {
            common,
            decode,
            exp,
        } => {
            let s = settings(&common, Some(&decode), &[("attributes", exp.attributes)])?;
            commands::entropy_dump(&s)
        }
        Command::Ablation {
            common,
            decode,
            exp,
            grid,
        } => {
            let extra = [("attributes", exp.attributes), ("grid", grid)];
            commands::ablation(&settings(&common, Some(&decode), &extra)?)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() || err.downcast_ref::<ecodec::Error>().is_some() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
