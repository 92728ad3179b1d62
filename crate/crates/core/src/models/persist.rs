//! Model files: a JSON header line (format, version, hyperparameters, vocab
//! hash) followed by a JSON body line holding the raw counts. Probabilities
//! are recomputed from counts on load, so a round trip is exact.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::ngram::ContextCounts;
use super::{NGramLm, PrefixClassifier};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const FORMAT_VERSION: u32 = 1;
const NGRAM_FORMAT: &str = "ecodec-ngram-lm";
const CLASSIFIER_FORMAT: &str = "ecodec-prefix-classifier";

#[derive(Serialize, Deserialize)]
struct NGramHeader {
    format: String,
    version: u32,
    order: usize,
    discount: f64,
    vocab_size: usize,
    vocab_hash: String,
}

/// One context: `(tokens, total, [(next token, count)])`.
type ContextRow = (Vec<u32>, u64, Vec<(u32, u64)>);

#[derive(Serialize, Deserialize)]
struct NGramBody {
    levels: Vec<Vec<ContextRow>>,
}

#[derive(Serialize, Deserialize)]
struct ClassifierHeader {
    format: String,
    version: u32,
    classes: Vec<String>,
    hash_seed: u64,
    num_buckets: usize,
    vocab_hash: String,
}

#[derive(Serialize, Deserialize)]
struct ClassifierBody {
    class_instances: Vec<u64>,
    feature_counts: Vec<Vec<u64>>,
}

fn to_json<S: Serialize>(value: &S) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::ModelFormat(e.to_string()))
}

fn write_two_lines<H: Serialize, B: Serialize>(path: &Path, header: &H, body: &B) -> Result<()> {
    let text = format!("{}\n{}\n", to_json(header)?, to_json(body)?);
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_two_lines<H: DeserializeOwned, B: DeserializeOwned>(path: &Path) -> Result<(H, B)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("{}: missing {what}", path.display())))
    };
    let header = serde_json::from_str(next("header")?)
        .map_err(|e| Error::ModelFormat(format!("{}: header: {e}", path.display())))?;
    let body = serde_json::from_str(next("body")?)
        .map_err(|e| Error::ModelFormat(format!("{}: body: {e}", path.display())))?;
    Ok((header, body))
}

fn check_header(path: &Path, format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected || version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "{}: expected {expected} v{FORMAT_VERSION}, found {format} v{version}",
            path.display()
        )));
    }
    Ok(())
}

fn check_vocab(path: &Path, stored: &str, vocab: &Vocabulary) -> Result<()> {
    if stored != vocab.content_hash() {
        return Err(Error::ModelFormat(format!(
            "{}: trained with a different vocabulary",
            path.display()
        )));
    }
    Ok(())
}

impl<T: Scalar> NGramLm<T> {
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = NGramHeader {
            format: NGRAM_FORMAT.into(),
            version: FORMAT_VERSION,
            order: self.order,
            discount: self.discount.as_f64(),
            vocab_size: self.vocab_size,
            vocab_hash: self.vocab_hash.clone(),
        };
        let levels = self
            .levels
            .iter()
            .map(|level| {
                let mut rows: Vec<ContextRow> = level
                    .iter()
                    .map(|(ctx, c)| (ctx.clone(), c.total, c.next.clone()))
                    .collect();
                rows.sort_by(|a, b| a.0.cmp(&b.0));
                rows
            })
            .collect();
        write_two_lines(path, &header, &NGramBody { levels })
    }

    pub fn load(path: &Path, vocab: &Vocabulary) -> Result<Self> {
        let (h, body): (NGramHeader, NGramBody) = read_two_lines(path)?;
        check_header(path, &h.format, h.version, NGRAM_FORMAT)?;
        check_vocab(path, &h.vocab_hash, vocab)?;
        if h.vocab_size != vocab.size() || body.levels.len() != h.order || h.order == 0 {
            return Err(Error::ModelFormat(format!(
                "{}: inconsistent shape",
                path.display()
            )));
        }
        let levels = body
            .levels
            .into_iter()
            .map(|rows| {
                rows.into_iter()
                    .map(|(ctx, total, next)| (ctx, ContextCounts { total, next }))
                    .collect::<HashMap<_, _>>()
            })
            .collect();
        Ok(Self {
            order: h.order,
            discount: T::lit(h.discount),
            vocab_size: h.vocab_size,
            vocab_hash: h.vocab_hash,
            levels,
        })
    }
}

impl<T: Scalar> PrefixClassifier<T> {
    pub fn save(&self, path: &Path, vocab: &Vocabulary) -> Result<()> {
        let header = ClassifierHeader {
            format: CLASSIFIER_FORMAT.into(),
            version: FORMAT_VERSION,
            classes: self.classes.clone(),
            hash_seed: self.hash_seed,
            num_buckets: self.num_buckets,
            vocab_hash: vocab.content_hash(),
        };
        let body = ClassifierBody {
            class_instances: self.class_instances.clone(),
            feature_counts: self.feature_counts.clone(),
        };
        write_two_lines(path, &header, &body)
    }

    pub fn load(path: &Path, vocab: &Vocabulary) -> Result<Self> {
        let (h, body): (ClassifierHeader, ClassifierBody) = read_two_lines(path)?;
        check_header(path, &h.format, h.version, CLASSIFIER_FORMAT)?;
        check_vocab(path, &h.vocab_hash, vocab)?;
        let clf = Self::from_counts(
            h.classes,
            body.class_instances,
            body.feature_counts,
            h.hash_seed,
        )?;
        if clf.num_buckets != h.num_buckets {
            return Err(Error::ModelFormat(format!(
                "{}: bucket count mismatch",
                path.display()
            )));
        }
        Ok(clf)
    }
}
