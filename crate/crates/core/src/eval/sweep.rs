use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::control::StrengthKind;
use crate::corpus::DialogueExample;
use crate::decoder::{DecodeConfig, DecodeMode};
use crate::error::{Error, Result};

use super::experiment::Experiment;
use super::report::evaluate;

/// One (λ, mode) operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub mode: DecodeMode,
    pub accuracy: BTreeMap<String, f64>,
    pub perplexity: f64,
    pub dist1: f64,
    pub dist2: f64,
}

impl SweepPoint {
    pub fn mean_accuracy(&self) -> f64 {
        self.accuracy.values().sum::<f64>() / self.accuracy.len().max(1) as f64
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub grid: Vec<f64>,
    pub modes: Vec<DecodeMode>,
    /// Attributes controlled together; each example targets its gold labels.
    pub attributes: Vec<String>,
    /// Every other decoding parameter.
    pub base: DecodeConfig<f64>,
}

fn point(
    exp: &Experiment,
    examples: &[&DialogueExample],
    attributes: &[String],
    config: &DecodeConfig<f64>,
) -> Result<SweepPoint> {
    let traces = exp.decode_examples(examples, attributes, config)?;
    let r = evaluate(exp, examples, &traces, attributes)?;
    Ok(SweepPoint {
        lambda: config.lambda,
        mode: config.mode,
        accuracy: r.accuracy,
        perplexity: r.perplexity,
        dist1: r.dist1,
        dist2: r.dist2,
    })
}

fn examples_for<'e>(
    exp: &'e Experiment,
    attributes: &[String],
) -> Result<Vec<&'e DialogueExample>> {
    if attributes.is_empty() {
        return Err(Error::invalid("no attributes to control"));
    }
    let ex = exp.eval_examples(attributes);
    if ex.is_empty() {
        return Err(Error::invalid(
            "no test example carries every requested attribute",
        ));
    }
    Ok(ex)
}

/// Uncontrolled greedy decoding on the same examples a sweep uses.
pub fn baseline_point(
    exp: &Experiment,
    attributes: &[String],
    base: &DecodeConfig<f64>,
) -> Result<SweepPoint> {
    let examples = examples_for(exp, attributes)?;
    let cfg = base
        .clone()
        .with_mode(DecodeMode::Uncontrolled)
        .with_lambda(0.0);
    point(exp, &examples, attributes, &cfg)
}

/// Decodes the test examples once per (λ, mode), λ-major.
pub fn lambda_sweep(exp: &Experiment, spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    if spec.grid.is_empty() || spec.modes.is_empty() {
        return Err(Error::invalid("empty sweep grid"));
    }
    let examples = examples_for(exp, &spec.attributes)?;
    let mut out = Vec::with_capacity(spec.grid.len() * spec.modes.len());
    for &lambda in &spec.grid {
        for &mode in &spec.modes {
            let cfg = spec.base.clone().with_mode(mode).with_lambda(lambda);
            out.push(point(exp, &examples, &spec.attributes, &cfg)?);
        }
    }
    Ok(out)
}

pub const SWEEP_HEADER: &str = "lambda\tmode\tattr\taccuracy\tperplexity\tdist1\tdist2";

/// One row per point and attribute.
pub fn sweep_tsv(points: &[SweepPoint]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for p in points {
        for (attr, acc) in &p.accuracy {
            let _ = writeln!(
                out,
                "{}\t{}\t{attr}\t{acc}\t{}\t{}\t{}",
                p.lambda, p.mode, p.perplexity, p.dist1, p.dist2
            );
        }
    }
    out
}

/// Accuracy (x) against perplexity (y), one colored series per mode.
pub fn sweep_svg(points: &[SweepPoint]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 50.0;
    let xs: Vec<f64> = points.iter().map(SweepPoint::mean_accuracy).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.perplexity).collect();
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let color = |m: DecodeMode| match m {
        DecodeMode::Static => "#1f77b4",
        DecodeMode::Eco => "#d62728",
        DecodeMode::Uncontrolled => "#555555",
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{M}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{M}" y1="{M}" x2="{M}" y2="{b}" stroke="black"/>"#,
        b = H - M,
        r = W - M
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">accuracy ({x0:.3} to {x1:.3})</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">perplexity ({y0:.2} to {y1:.2})</text>"#,
        H / 2.0,
        H / 2.0
    );
    let mut modes: Vec<DecodeMode> = Vec::new();
    for p in points {
        if !modes.contains(&p.mode) {
            modes.push(p.mode);
        }
    }
    for (i, &m) in modes.iter().enumerate() {
        let _ = writeln!(s, r#"<g fill="{}"><title>{m}</title>"#, color(m));
        for (j, p) in points.iter().enumerate().filter(|(_, p)| p.mode == m) {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4"><title>{m} lambda={}</title></circle>"#,
                sx(xs[j]),
                sy(ys[j]),
                p.lambda
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{m}</text></g>"#,
            W - M - 40.0,
            M + 14.0 * i as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauPoint {
    pub tau: f64,
    pub accuracy: BTreeMap<String, f64>,
    pub perplexity: f64,
}

/// Eco decoding at fixed λ with `τ_lm = τ_c = τ` for each grid value.
pub fn tau_sweep(
    exp: &Experiment,
    taus: &[f64],
    lambda: f64,
    attributes: &[String],
    base: &DecodeConfig<f64>,
) -> Result<Vec<TauPoint>> {
    if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid(
            "temperature grid must be non-empty and positive",
        ));
    }
    let examples = examples_for(exp, attributes)?;
    taus.iter()
        .map(|&tau| {
            let mut cfg = base.clone().with_mode(DecodeMode::Eco).with_lambda(lambda);
            cfg.tau_lm = tau;
            cfg.tau_c = tau;
            let p = point(exp, &examples, attributes, &cfg)?;
            Ok(TauPoint {
                tau,
                accuracy: p.accuracy,
                perplexity: p.perplexity,
            })
        })
        .collect()
}

pub const TAU_HEADER: &str = "tau\tattr\taccuracy\tperplexity";

pub fn tau_tsv(points: &[TauPoint]) -> String {
    let mut out = format!("{TAU_HEADER}\n");
    for p in points {
        for (attr, acc) in &p.accuracy {
            let _ = writeln!(out, "{}\t{attr}\t{acc}\t{}", p.tau, p.perplexity);
        }
    }
    out
}

/// A λ at which both modes stay within the fluency tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPoint {
    pub lambda: f64,
    pub static_accuracy: BTreeMap<String, f64>,
    pub eco_accuracy: BTreeMap<String, f64>,
    pub static_perplexity: f64,
    pub eco_perplexity: f64,
}

impl MatchedPoint {
    /// Eco accuracy at least the static accuracy on every attribute.
    pub fn eco_holds(&self) -> bool {
        self.eco_accuracy.iter().all(|(a, e)| {
            *e >= self
                .static_accuracy
                .get(a)
                .copied()
                .unwrap_or(f64::INFINITY)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub matched: Vec<MatchedPoint>,
    /// Eco Pareto points that some static point strictly dominates.
    pub dominated_eco_points: Vec<f64>,
}

impl ModeComparison {
    pub fn eco_wins(&self) -> usize {
        self.matched.iter().filter(|m| m.eco_holds()).count()
    }

    pub fn win_rate(&self) -> Option<f64> {
        (!self.matched.is_empty()).then(|| self.eco_wins() as f64 / self.matched.len() as f64)
    }
}

fn dominates(a: &SweepPoint, b: &SweepPoint) -> bool {
    let (aa, ba) = (a.mean_accuracy(), b.mean_accuracy());
    aa >= ba && a.perplexity <= b.perplexity && (aa > ba || a.perplexity < b.perplexity)
}

/// Compares static and eco points of one sweep. A λ is matched when
/// neither mode's perplexity exceeds the baseline's by more than
/// `tolerance` (relative); being more fluent than the baseline is allowed.
/// λ = 0 is left out since both modes equal the baseline there.
pub fn compare_modes(
    baseline: &SweepPoint,
    points: &[SweepPoint],
    tolerance: f64,
) -> ModeComparison {
    let within = |p: &SweepPoint| p.perplexity <= (1.0 + tolerance) * baseline.perplexity;
    let of = |m: DecodeMode| points.iter().filter(move |p| p.mode == m);
    let mut matched = Vec::new();
    for s in of(DecodeMode::Static).filter(|p| p.lambda != 0.0) {
        if let Some(e) = of(DecodeMode::Eco).find(|e| e.lambda == s.lambda) {
            if within(s) && within(e) {
                matched.push(MatchedPoint {
                    lambda: s.lambda,
                    static_accuracy: s.accuracy.clone(),
                    eco_accuracy: e.accuracy.clone(),
                    static_perplexity: s.perplexity,
                    eco_perplexity: e.perplexity,
                });
            }
        }
    }
    let eco: Vec<&SweepPoint> = of(DecodeMode::Eco).collect();
    let dominated_eco_points = eco
        .iter()
        .filter(|e| !eco.iter().any(|o| dominates(o, e)))
        .filter(|e| of(DecodeMode::Static).any(|s| dominates(s, e)))
        .map(|e| e.lambda)
        .collect();
    ModeComparison {
        matched,
        dominated_eco_points,
    }
}

/// Runs the same λ sweep once per strength function.
pub fn strength_ablation(
    exp: &Experiment,
    spec: &SweepSpec,
    kinds: &[StrengthKind],
) -> Result<Vec<(StrengthKind, Vec<SweepPoint>)>> {
    kinds
        .iter()
        .map(|&kind| {
            let mut s = spec.clone();
            s.base.strength = kind;
            Ok((kind, lambda_sweep(exp, &s)?))
        })
        .collect()
}

pub const ABLATION_HEADER: &str =
    "strength\tlambda\tmode\tattr\taccuracy\tperplexity\tdist1\tdist2";

pub fn ablation_tsv(runs: &[(StrengthKind, Vec<SweepPoint>)]) -> String {
    let mut out = format!("{ABLATION_HEADER}\n");
    for (kind, points) in runs {
        for line in sweep_tsv(points).lines().skip(1) {
            let _ = writeln!(out, "{kind}\t{line}");
        }
    }
    out
}

/// Per strength function: matched λ count, eco wins among them and the
/// number of dominated eco Pareto points.
pub fn ablation_summary(
    baseline: &SweepPoint,
    runs: &[(StrengthKind, Vec<SweepPoint>)],
    tolerance: f64,
) -> String {
    let mut out = String::from("strength\tmatched\teco_wins\tdominated_eco_points\n");
    for (kind, points) in runs {
        let c = compare_modes(baseline, points, tolerance);
        let _ = writeln!(
            out,
            "{kind}\t{}\t{}\t{}",
            c.matched.len(),
            c.eco_wins(),
            c.dominated_eco_points.len()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(lambda: f64, mode: DecodeMode, acc: f64, ppl: f64) -> SweepPoint {
        SweepPoint {
            lambda,
            mode,
            accuracy: [("a".to_string(), acc)].into(),
            perplexity: ppl,
            dist1: 0.5,
            dist2: 0.5,
        }
    }

    #[test]
    fn matched_points_and_dominance() {
        use DecodeMode::*;
        let base = sp(0.0, Uncontrolled, 0.3, 10.0);
        let pts = vec![
            sp(0.0, Static, 0.3, 10.0),
            sp(0.0, Eco, 0.3, 10.0),
            sp(0.5, Static, 0.35, 9.0),
            sp(0.5, Eco, 0.33, 9.5),
            sp(1.0, Static, 0.4, 10.1),
            sp(1.0, Eco, 0.45, 10.15),
            sp(2.0, Static, 0.5, 10.5),
            sp(2.0, Eco, 0.55, 10.1),
            sp(4.0, Static, 0.7, 11.0),
            sp(4.0, Eco, 0.6, 11.5),
        ];
        let c = compare_modes(&base, &pts, 0.02);
        assert_eq!(
            c.matched.iter().map(|m| m.lambda).collect::<Vec<_>>(),
            vec![0.5, 1.0]
        );
        assert_eq!(c.eco_wins(), 1);
        assert_eq!(c.win_rate(), Some(0.5));
        // both eco points sit on the eco frontier and a static point beats each
        assert_eq!(c.dominated_eco_points, vec![0.5, 4.0]);
    }

    #[test]
    fn tables_have_fixed_headers() {
        let pts = vec![sp(1.0, DecodeMode::Eco, 0.5, 9.0)];
        let t = sweep_tsv(&pts);
        assert_eq!(
            t,
            "lambda\tmode\tattr\taccuracy\tperplexity\tdist1\tdist2\n1\teco\ta\t0.5\t9\t0.5\t0.5\n"
        );
        let svg = sweep_svg(&pts);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
