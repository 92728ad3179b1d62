use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use ecodec::control::StrengthKind;
use ecodec::corpus::{
    load_dataset, toy::generate_toy_corpus, write_dataset, AttributeSchema, Vocabulary,
};
use ecodec::decoder::{write_trace_tsv, Controller, DecodeMode, Decoder};
use ecodec::eval::{
    ablation_summary, ablation_tsv, baseline_point, classifier_accuracy, compare_modes,
    corpus_perplexity, entropy_tsv, evaluate, export_entropy_summary, format_report, gold_targets,
    lambda_sweep, latency_benchmark, latency_tsv, prepare_splits, strength_ablation, sweep_svg,
    sweep_tsv, tau_sweep as run_tau_sweep, tau_tsv, train_classifier, train_lm as fit_lm,
    BenchInput, Experiment, SweepSpec,
};
use ecodec::models::{NGramLm, PrefixClassifier};

use crate::config::{usage, Settings};

const VOCAB_FILE: &str = "vocab.txt";
const LM_FILE: &str = "lm.json";

fn clf_file(attribute: &str, evaluator: bool) -> String {
    let kind = if evaluator { "eval" } else { "clf" };
    format!("{kind}-{attribute}.json")
}

fn write_out(dir: &Path, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
    Ok(p)
}

fn schema() -> AttributeSchema {
    AttributeSchema::daily_dialog()
}

fn load_raw(s: &Settings) -> anyhow::Result<Vec<ecodec::corpus::RawDialogue>> {
    let data = s.path("data")?;
    if !data.exists() {
        return Err(usage(format!("dataset {} does not exist", data.display())));
    }
    Ok(load_dataset(&data, &schema())?)
}

fn experiment(s: &Settings) -> anyhow::Result<Experiment> {
    let raw = load_raw(s)?;
    Ok(Experiment::build(&raw, schema(), &s.experiment()?)?)
}

pub fn gen_toy(output: &Path, n: usize, seed: u64) -> anyhow::Result<()> {
    if n == 0 {
        return Err(usage("--n must be positive"));
    }
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    write_dataset(output, &generate_toy_corpus(n, seed))?;
    println!("wrote {n} dialogues to {}", output.display());
    Ok(())
}

pub fn train_lm(s: &Settings) -> anyhow::Result<()> {
    let raw = load_raw(s)?;
    let settings = s.experiment()?;
    let splits = prepare_splits(&raw, &settings)?;
    let lm = fit_lm(&splits.train, &splits.vocab, &settings)?;
    let dir = s.path("model_dir")?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    splits.vocab.save(&dir.join(VOCAB_FILE))?;
    lm.save(&dir.join(LM_FILE))?;
    println!("vocab_size\t{}", splits.vocab.size());
    println!(
        "train_perplexity\t{}",
        corpus_perplexity(&lm, &splits.train)?
    );
    if !splits.valid.is_empty() {
        println!(
            "valid_perplexity\t{}",
            corpus_perplexity(&lm, &splits.valid)?
        );
    }
    println!("model\t{}", dir.join(LM_FILE).display());
    Ok(())
}

pub fn train_clf(s: &Settings, attributes: &[String], evaluator: bool) -> anyhow::Result<()> {
    let schema = schema();
    let names: Vec<String> = schema.names().map(str::to_string).collect();
    let wanted: Vec<String> = if attributes.is_empty() {
        names.clone()
    } else {
        attributes.to_vec()
    };
    let settings = s.experiment()?;
    if evaluator {
        settings.check_seeds(names.len())?;
    }
    let raw = load_raw(s)?;
    let splits = prepare_splits(&raw, &settings)?;
    let dir = s.path("model_dir")?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    splits.vocab.save(&dir.join(VOCAB_FILE))?;
    for attr in &wanted {
        let idx = names
            .iter()
            .position(|n| n == attr)
            .ok_or_else(|| usage(format!("unknown attribute `{attr}`")))?;
        let mut roles = vec![(false, settings.controller_seed_for(idx))];
        if evaluator {
            roles.push((true, settings.evaluator_seed_for(idx)));
        }
        for (is_eval, seed) in roles {
            let clf = train_classifier(&splits.train, &schema, attr, seed, settings.buckets)?;
            let path = dir.join(clf_file(attr, is_eval));
            clf.save(&path, &splits.vocab)?;
            let acc = classifier_accuracy(&clf, &splits.valid, attr)
                .map(|a| a.to_string())
                .unwrap_or_else(|| "n/a".into());
            let role = if is_eval { "evaluator" } else { "controller" };
            println!(
                "{attr}\t{role}\tseed={seed}\tvalid_accuracy={acc}\t{}",
                path.display()
            );
        }
    }
    Ok(())
}

pub fn decode(s: &Settings, history: &[String], trace: Option<&Path>) -> anyhow::Result<()> {
    let dir = s.path("model_dir")?;
    let vocab_path = dir.join(VOCAB_FILE);
    if !vocab_path.exists() {
        return Err(usage(format!(
            "no vocabulary at {}; run train-lm first",
            vocab_path.display()
        )));
    }
    let vocab = Vocabulary::load(&vocab_path)?;
    let lm = NGramLm::<f64>::load(&dir.join(LM_FILE), &vocab)?;
    let cfg = s.decode()?;
    let mut classifiers: Vec<(String, PrefixClassifier<f64>)> = Vec::new();
    if cfg.mode != DecodeMode::Uncontrolled {
        for t in &cfg.targets {
            if schema().get(&t.attribute).is_none() {
                return Err(usage(format!("unknown attribute `{}`", t.attribute)));
            }
            let p = dir.join(clf_file(&t.attribute, false));
            if !p.exists() {
                return Err(usage(format!(
                    "no classifier at {}; run train-clf",
                    p.display()
                )));
            }
            classifiers.push((t.attribute.clone(), PrefixClassifier::load(&p, &vocab)?));
        }
    }
    let controllers: Vec<Controller<'_, f64>> = classifiers
        .iter()
        .map(|(a, c)| Controller::new(a.as_str(), c))
        .collect();
    let history: Vec<Vec<u32>> = history.iter().map(|h| vocab.tokenize(h)).collect();
    let out = Decoder::new(&lm, &controllers, cfg)?.decode(&history)?;
    println!("{}", vocab.render(&out.response));
    if let Some(path) = trace {
        let mut buf = Vec::new();
        write_trace_tsv(&mut buf, &out, Some(&vocab))?;
        fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn sweep_spec(s: &Settings) -> anyhow::Result<SweepSpec> {
    let grid: Vec<f64> = s.list("grid")?;
    let modes: Vec<DecodeMode> = s.list("modes")?;
    if grid.is_empty() || modes.is_empty() {
        return Err(usage("grid and modes must be non-empty"));
    }
    Ok(SweepSpec {
        grid,
        modes,
        attributes: s.attributes()?,
        base: s.decode()?,
    })
}

pub fn sweep(s: &Settings) -> anyhow::Result<()> {
    let exp = experiment(s)?;
    let spec = sweep_spec(s)?;
    let baseline = baseline_point(&exp, &spec.attributes, &spec.base)?;
    let points = lambda_sweep(&exp, &spec)?;
    let out = s.path("out")?;
    write_out(
        &out,
        "baseline.tsv",
        &sweep_tsv(std::slice::from_ref(&baseline)),
    )?;
    let table = write_out(&out, "sweep.tsv", &sweep_tsv(&points))?;
    write_out(&out, "sweep.svg", &sweep_svg(&points))?;
    let c = compare_modes(&baseline, &points, s.get("tolerance")?);
    print!("{}", sweep_tsv(&points));
    println!(
        "matched {} eco_wins {} dominated_eco_points {}",
        c.matched.len(),
        c.eco_wins(),
        c.dominated_eco_points.len()
    );
    println!("wrote {}", table.display());
    Ok(())
}

pub fn tau_sweep(s: &Settings) -> anyhow::Result<()> {
    let exp = experiment(s)?;
    let cfg = s.decode()?;
    let rows = run_tau_sweep(
        &exp,
        &s.list::<f64>("taus")?,
        cfg.lambda,
        &s.attributes()?,
        &cfg,
    )?;
    let text = tau_tsv(&rows);
    let p = write_out(&s.path("out")?, "tau_sweep.tsv", &text)?;
    print!("{text}");
    println!("wrote {}", p.display());
    Ok(())
}

pub fn bench(s: &Settings) -> anyhow::Result<()> {
    let exp = experiment(s)?;
    let attributes = s.attributes()?;
    let examples = exp.eval_examples(&attributes);
    let inputs = examples
        .iter()
        .map(|e| {
            Ok(BenchInput {
                history: &e.history,
                targets: gold_targets(e, &attributes)?,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let controllers = exp.controller_refs();
    let r = latency_benchmark(
        &exp.lm,
        &controllers,
        &inputs,
        &s.decode()?,
        DecodeMode::Static,
        DecodeMode::Eco,
        s.get("reps")?,
    )?;
    let text = latency_tsv(&r);
    let p = write_out(&s.path("out")?, "latency.tsv", &text)?;
    print!("{text}");
    println!("wrote {}", p.display());
    Ok(())
}

pub fn eval(s: &Settings) -> anyhow::Result<()> {
    let exp = experiment(s)?;
    let attributes = s.attributes()?;
    let examples = exp.eval_examples(&attributes);
    let traces = exp.decode_examples(&examples, &attributes, &s.decode()?)?;
    let report = evaluate(&exp, &examples, &traces, &attributes)?;
    let out = s.path("out")?;
    let text = format_report(&report);
    let p = write_out(&out, "eval.tsv", &text)?;
    let responses: String = traces
        .iter()
        .map(|t| format!("{}\n", exp.vocab.render(&t.response)))
        .collect();
    write_out(&out, "responses.txt", &responses)?;
    print!("{text}");
    println!("wrote {}", p.display());
    Ok(())
}

pub fn entropy_dump(s: &Settings) -> anyhow::Result<()> {
    let exp = experiment(s)?;
    let attributes = s.attributes()?;
    let examples = exp.eval_examples(&attributes);
    let traces = exp.decode_examples(&examples, &attributes, &s.decode()?)?;
    let rows = export_entropy_summary(&traces, &exp.vocab)?;
    let p = write_out(&s.path("out")?, "entropy.tsv", &entropy_tsv(&rows))?;
    println!("{} tokens\nwrote {}", rows.len(), p.display());
    Ok(())
}

pub fn ablation(s: &Settings) -> anyhow::Result<()> {
    let exp = experiment(s)?;
    let spec = sweep_spec(s)?;
    let baseline = baseline_point(&exp, &spec.attributes, &spec.base)?;
    let runs = strength_ablation(&exp, &spec, &StrengthKind::ALL)?;
    let out = s.path("out")?;
    let p = write_out(&out, "ablation.tsv", &ablation_tsv(&runs))?;
    let summary = ablation_summary(&baseline, &runs, s.get("tolerance")?);
    write_out(&out, "ablation_summary.tsv", &summary)?;
    print!("{summary}");
    println!("wrote {}", p.display());
    Ok(())
}
