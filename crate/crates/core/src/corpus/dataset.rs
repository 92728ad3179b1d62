use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{split_words, Vocabulary, BOS_ID, EOS_ID};
use crate::error::{Error, Result};

/// One JSON-lines record before tokenization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDialogue {
    pub history: Vec<String>,
    pub response: String,
    pub attributes: BTreeMap<String, String>,
}

/// Class set of one attribute. Labels listed in `null_labels` (e.g. the
/// DailyDialog "no emotion" tag) are accepted on input but dropped, so the
/// example carries no label for that attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeClasses {
    pub classes: Vec<String>,
    pub null_labels: Vec<String>,
}

impl AttributeClasses {
    pub fn new<S: AsRef<str>>(classes: &[S]) -> Self {
        Self {
            classes: classes.iter().map(|c| c.as_ref().to_string()).collect(),
            null_labels: Vec::new(),
        }
    }

    pub fn with_null_labels<S: AsRef<str>>(mut self, labels: &[S]) -> Self {
        self.null_labels = labels.iter().map(|c| c.as_ref().to_string()).collect();
        self
    }

    pub fn index_of(&self, class: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == class)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: BTreeMap<String, AttributeClasses>,
}

pub const EMOTION_CLASSES: [&str; 6] = [
    "anger",
    "disgust",
    "fear",
    "happiness",
    "sadness",
    "surprise",
];
pub const DIALOG_ACT_CLASSES: [&str; 4] = ["inform", "question", "directive", "commissive"];

impl AttributeSchema {
    pub fn new() -> Self {
        Self::default()
    }

    /// Six emotions (without "no emotion") and four dialog acts.
    pub fn daily_dialog() -> Self {
        Self::new()
            .with(
                "emotion",
                AttributeClasses::new(&EMOTION_CLASSES).with_null_labels(&["no emotion"]),
            )
            .with("dialog-act", AttributeClasses::new(&DIALOG_ACT_CLASSES))
    }

    pub fn with(mut self, name: &str, classes: AttributeClasses) -> Self {
        self.attributes.insert(name.to_string(), classes);
        self
    }

    pub fn get(&self, name: &str) -> Option<&AttributeClasses> {
        self.attributes.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&AttributeClasses> {
        self.get(name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attributes.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

/// Reads a JSON-lines dialogue file and validates every record against
/// `schema`. Blank lines are skipped; line numbers in errors are 1-based.
pub fn load_dataset(path: &Path, schema: &AttributeSchema) -> Result<Vec<RawDialogue>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: RawDialogue =
            serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })?;
        validate(&mut rec, schema, line_no)?;
        out.push(rec);
    }
    Ok(out)
}

fn validate(rec: &mut RawDialogue, schema: &AttributeSchema, line: usize) -> Result<()> {
    if split_words(&rec.response).is_empty() {
        return Err(Error::MalformedLine {
            line,
            message: "empty response".into(),
        });
    }
    let mut kept = BTreeMap::new();
    for (name, label) in std::mem::take(&mut rec.attributes) {
        let classes = schema.get(&name).ok_or_else(|| Error::MalformedLine {
            line,
            message: format!("attribute `{name}` not in schema"),
        })?;
        if classes.null_labels.contains(&label) {
            continue;
        }
        if classes.index_of(&label).is_none() {
            return Err(Error::UnknownLabel {
                line,
                attribute: name,
                label,
            });
        }
        kept.insert(name, label);
    }
    rec.attributes = kept;
    Ok(())
}

pub fn write_dataset(path: &Path, records: &[RawDialogue]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::invalid(e.to_string()))?;
        writeln!(f, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Vocabulary over every history utterance and response of the corpus.
pub fn build_vocabulary(examples: &[RawDialogue], min_count: usize) -> Result<Vocabulary> {
    Vocabulary::from_texts(
        examples.iter().flat_map(|e| {
            e.history
                .iter()
                .map(String::as_str)
                .chain([e.response.as_str()])
        }),
        min_count,
    )
}

/// A tokenized dialogue. `response` always ends with `</s>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueExample {
    pub history: Vec<Vec<u32>>,
    pub response: Vec<u32>,
    pub attributes: BTreeMap<String, String>,
}

impl DialogueExample {
    pub fn encode(raw: &RawDialogue, vocab: &Vocabulary) -> Self {
        let mut response = vocab.tokenize(&raw.response);
        response.push(vocab.eos());
        Self {
            history: raw.history.iter().map(|h| vocab.tokenize(h)).collect(),
            response,
            attributes: raw.attributes.clone(),
        }
    }

    pub fn label(&self, attribute: &str) -> Option<&str> {
        self.attributes.get(attribute).map(String::as_str)
    }

    /// The full sequence the language model is trained on.
    pub fn lm_sequence(&self) -> Vec<u32> {
        dialogue_context(&self.history, &self.response)
    }
}

/// Language-model view of a dialogue: every history utterance closed by
/// `</s>`, then `<s>` and the response so far.
pub fn dialogue_context(history: &[Vec<u32>], response: &[u32]) -> Vec<u32> {
    let len = history.iter().map(|h| h.len() + 1).sum::<usize>() + 1 + response.len();
    let mut out = Vec::with_capacity(len);
    for h in history {
        out.extend_from_slice(h);
        out.push(EOS_ID);
    }
    out.push(BOS_ID);
    out.extend_from_slice(response);
    out
}

pub fn encode_all(raw: &[RawDialogue], vocab: &Vocabulary) -> Vec<DialogueExample> {
    raw.iter()
        .map(|r| DialogueExample::encode(r, vocab))
        .collect()
}

/// Classifier training instance: one response prefix with its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixInstance {
    pub history: Vec<Vec<u32>>,
    pub prefix: Vec<u32>,
    pub label: String,
}

/// Expands an example into one instance per response prefix `r[..=i]`.
pub fn enumerate_prefixes(
    example: &DialogueExample,
    attribute: &str,
) -> Result<Vec<PrefixInstance>> {
    let label = example
        .label(attribute)
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))?;
    Ok((1..=example.response.len())
        .map(|n| PrefixInstance {
            history: example.history.clone(),
            prefix: example.response[..n].to_vec(),
            label: label.to_string(),
        })
        .collect())
}

/// Prefix instances for every example that carries `attribute`; examples
/// whose label was dropped as a null label are skipped.
pub fn prefix_instances(examples: &[DialogueExample], attribute: &str) -> Vec<PrefixInstance> {
    examples
        .iter()
        .filter(|e| e.label(attribute).is_some())
        .flat_map(|e| enumerate_prefixes(e, attribute).unwrap_or_default())
        .collect()
}

/// Deterministic shuffled three-way split. Valid and test sizes are rounded
/// to nearest; the remainder goes to train. Each part keeps input order.
pub fn split_dataset<E: Clone>(
    examples: &[E],
    ratios: [f64; 3],
    seed: u64,
) -> Result<(Vec<E>, Vec<E>, Vec<E>)> {
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::invalid(format!(
            "split ratios {ratios:?} out of [0,1]"
        )));
    }
    let total: f64 = ratios.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "split ratios sum to {total}, expected 1"
        )));
    }
    let n = examples.len();
    let n_valid = (n as f64 * ratios[1]).round() as usize;
    let n_test = ((n as f64 * ratios[2]).round() as usize).min(n - n_valid.min(n));
    let n_valid = n_valid.min(n);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut valid_idx = order[..n_valid].to_vec();
    let mut test_idx = order[n_valid..n_valid + n_test].to_vec();
    let mut train_idx = order[n_valid + n_test..].to_vec();
    for v in [&mut train_idx, &mut valid_idx, &mut test_idx] {
        v.sort_unstable();
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| examples[i].clone()).collect::<Vec<_>>();
    Ok((pick(&train_idx), pick(&valid_idx), pick(&test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn write_tmp(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        fs::write(&p, content).unwrap();
        (dir, p)
    }

    #[test]
    fn loads_single_record() {
        let (_d, p) = write_tmp(
            r#"{"history":["Hi"],"response":"Hello !","attributes":{"emotion":"happiness"}}"#,
        );
        let recs = load_dataset(&p, &AttributeSchema::daily_dialog()).unwrap();
        assert_eq!(recs.len(), 1);
        let vocab = build_vocabulary(&recs, 0).unwrap();
        let ex = DialogueExample::encode(&recs[0], &vocab);
        assert_eq!(ex.response.len(), 3);
        assert_eq!(*ex.response.last().unwrap(), vocab.eos());
        assert_eq!(ex.label("emotion"), Some("happiness"));
    }

    #[test]
    fn empty_file_gives_empty_list() {
        let (_d, p) = write_tmp("");
        assert!(load_dataset(&p, &AttributeSchema::daily_dialog())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn unknown_label_names_label_and_line() {
        let (_d, p) = write_tmp(concat!(
            r#"{"history":[],"response":"ok","attributes":{"emotion":"fear"}}"#,
            "\n",
            r#"{"history":[],"response":"yay","attributes":{"emotion":"joy"}}"#,
        ));
        let err = load_dataset(&p, &AttributeSchema::daily_dialog()).unwrap_err();
        match &err {
            Error::UnknownLabel { line, label, .. } => {
                assert_eq!(*line, 2);
                assert_eq!(label, "joy");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("joy"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let (_d, p) = write_tmp(concat!(
            r#"{"history":[],"response":"ok","attributes":{}}"#,
            "\n\n",
            "{not json",
        ));
        match load_dataset(&p, &AttributeSchema::daily_dialog()) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn null_label_is_dropped() {
        let (_d, p) = write_tmp(
            r#"{"history":[],"response":"ok","attributes":{"emotion":"no emotion","dialog-act":"inform"}}"#,
        );
        let recs = load_dataset(&p, &AttributeSchema::daily_dialog()).unwrap();
        assert!(!recs[0].attributes.contains_key("emotion"));
        assert_eq!(recs[0].attributes["dialog-act"], "inform");
    }

    fn example(resp: &[u32]) -> DialogueExample {
        let mut attributes = BTreeMap::new();
        attributes.insert("emotion".into(), "fear".into());
        attributes.insert("dialog-act".into(), "inform".into());
        DialogueExample {
            history: vec![vec![5, 6]],
            response: resp.to_vec(),
            attributes,
        }
    }

    #[test]
    fn prefixes_cover_every_length() {
        let ex = example(&[7, 8, 1]);
        let inst = enumerate_prefixes(&ex, "emotion").unwrap();
        assert_eq!(
            inst.iter().map(|i| i.prefix.len()).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        assert!(inst.iter().all(|i| i.label == "fear"));
        assert_eq!(
            enumerate_prefixes(&example(&[1]), "emotion").unwrap().len(),
            1
        );
        let acts = enumerate_prefixes(&ex, "dialog-act").unwrap();
        assert!(acts.iter().all(|i| i.label == "inform"));
        assert!(enumerate_prefixes(&ex, "topic").is_err());
    }

    #[test]
    fn split_sizes_and_edge_ratios() {
        let xs: Vec<u32> = (0..10).collect();
        let (a, b, c) = split_dataset(&xs, [0.8, 0.1, 0.1], 7).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (8, 1, 1));
        let (a2, b2, c2) = split_dataset(&xs, [0.8, 0.1, 0.1], 7).unwrap();
        assert_eq!((a, b, c), (a2, b2, c2));
        let (a, b, c) = split_dataset(&xs, [1.0, 0.0, 0.0], 3).unwrap();
        assert_eq!(a, xs);
        assert!(b.is_empty() && c.is_empty());
        assert!(split_dataset(&xs, [0.5, 0.1, 0.1], 3).is_err());
    }

    proptest! {
        #[test]
        fn prefix_count_matches_response(resp in proptest::collection::vec(3u32..50, 1..20)) {
            let ex = example(&resp);
            let inst = enumerate_prefixes(&ex, "emotion").unwrap();
            prop_assert_eq!(inst.len(), resp.len());
            for (j, i) in inst.iter().enumerate() {
                prop_assert_eq!(&i.prefix[..], &resp[..=j]);
            }
        }

        #[test]
        fn split_is_a_partition(n in 0usize..200, seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let valid = a;
            let test = (1.0 - a) * b;
            let ratios = [1.0 - valid - test, valid, test];
            let xs: Vec<usize> = (0..n).collect();
            let (tr, va, te) = split_dataset(&xs, ratios, seed).unwrap();
            let all: HashSet<usize> = tr.iter().chain(&va).chain(&te).copied().collect();
            prop_assert_eq!(all.len(), n);
            prop_assert_eq!(tr.len() + va.len() + te.len(), n);
        }
    }
}
