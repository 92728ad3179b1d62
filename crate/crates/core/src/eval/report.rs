use std::collections::BTreeMap;

use crate::corpus::DialogueExample;
use crate::decoder::DecodeTrace;
use crate::error::{Error, Result};
use crate::models::AttributeModel;

use super::experiment::Experiment;
use super::metrics::{attribute_accuracy, distinct_n, rouge1, rouge_l};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: BTreeMap<String, f64>,
    pub dist1: f64,
    pub dist2: f64,
    pub rouge1: f64,
    pub rouge_l: f64,
    /// Mean per-response perplexity under the reference LM.
    pub perplexity: f64,
    pub n: usize,
}

/// Evaluator accuracy against each example's gold label for `attribute`.
pub fn accuracy_for(
    exp: &Experiment,
    examples: &[&DialogueExample],
    responses: &[&[u32]],
    attribute: &str,
) -> Result<f64> {
    let evaluator = exp
        .evaluators
        .get(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
    let controllers: Vec<&dyn AttributeModel<f64>> = exp
        .controllers
        .values()
        .map(|c| c as &dyn AttributeModel<f64>)
        .collect();
    let histories: Vec<&[Vec<u32>]> = examples.iter().map(|e| e.history.as_slice()).collect();
    let targets = examples
        .iter()
        .map(|e| {
            e.label(attribute)
                .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))
        })
        .collect::<Result<Vec<&str>>>()?;
    attribute_accuracy(evaluator, &controllers, &histories, responses, &targets)
}

/// Full metric suite over decoded responses. Accuracy is measured on the
/// response with its `</s>`; diversity and ROUGE on its content tokens.
pub fn evaluate(
    exp: &Experiment,
    examples: &[&DialogueExample],
    traces: &[DecodeTrace<f64>],
    attributes: &[String],
) -> Result<EvalReport> {
    if traces.is_empty() || traces.len() != examples.len() {
        return Err(Error::invalid("need one non-empty decode per example"));
    }
    let responses: Vec<&[u32]> = traces.iter().map(|t| t.response.as_slice()).collect();
    let content: Vec<&[u32]> = traces.iter().map(|t| t.content()).collect();
    let mut accuracy = BTreeMap::new();
    for a in attributes {
        accuracy.insert(a.clone(), accuracy_for(exp, examples, &responses, a)?);
    }
    let (mut r1, mut rl) = (0.0, 0.0);
    for (ex, hyp) in examples.iter().zip(&content) {
        let reference = &ex.response[..ex.response.len() - 1];
        r1 += rouge1(hyp, reference)?;
        rl += rouge_l(hyp, reference)?;
    }
    let n = traces.len();
    Ok(EvalReport {
        accuracy,
        dist1: distinct_n(&content, 1)?,
        dist2: distinct_n(&content, 2)?,
        rouge1: r1 / n as f64,
        rouge_l: rl / n as f64,
        perplexity: exp.fluency(examples, &responses)?,
        n,
    })
}

pub const REPORT_HEADER: &str = "attr\taccuracy\tperplexity\tdist1\tdist2\trouge1\trougeL\tn";

pub fn format_report(r: &EvalReport) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for (attr, acc) in &r.accuracy {
        out.push_str(&format!(
            "{attr}\t{acc}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            r.perplexity, r.dist1, r.dist2, r.rouge1, r.rouge_l, r.n
        ));
    }
    out
}
