use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::corpus::{
    build_vocabulary, dialogue_context, encode_all, prefix_instances, split_dataset,
    AttributeSchema, DialogueExample, RawDialogue, Vocabulary,
};
use crate::decoder::{Controller, DecodeConfig, DecodeTrace, Decoder, Target};
use crate::error::{Error, Result};
use crate::models::{
    perplexity_in_context, AttributeModel, NGramLm, PrefixClassifier, DEFAULT_BUCKETS,
    DEFAULT_DISCOUNT, DEFAULT_ORDER,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub split: [f64; 3],
    pub split_seed: u64,
    pub min_count: usize,
    pub lm_order: usize,
    pub lm_discount: f64,
    pub buckets: usize,
    /// Controller for the i-th schema attribute uses `controller_seed + i`.
    pub controller_seed: u64,
    /// Evaluator for the i-th schema attribute uses `evaluator_seed + i`.
    pub evaluator_seed: u64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            split: [0.8, 0.1, 0.1],
            split_seed: 13,
            min_count: 2,
            lm_order: DEFAULT_ORDER,
            lm_discount: DEFAULT_DISCOUNT,
            buckets: DEFAULT_BUCKETS,
            controller_seed: 101,
            evaluator_seed: 9001,
        }
    }
}

impl ExperimentSettings {
    pub fn controller_seed_for(&self, attr_index: usize) -> u64 {
        self.controller_seed.wrapping_add(attr_index as u64)
    }

    pub fn evaluator_seed_for(&self, attr_index: usize) -> u64 {
        self.evaluator_seed.wrapping_add(attr_index as u64)
    }

    pub fn check_seeds(&self, num_attributes: usize) -> Result<()> {
        for i in 0..num_attributes {
            let e = self.evaluator_seed_for(i);
            if (0..num_attributes).any(|j| self.controller_seed_for(j) == e) {
                return Err(Error::SeedCollision(e));
            }
        }
        Ok(())
    }
}

/// Everything a decoding experiment needs: splits, the decoding LM,
/// controller classifiers, independent evaluators and the reference LM
/// used as the fluency proxy.
pub struct Experiment {
    pub schema: AttributeSchema,
    pub vocab: Vocabulary,
    pub train: Vec<DialogueExample>,
    pub valid: Vec<DialogueExample>,
    pub test: Vec<DialogueExample>,
    pub lm: NGramLm<f64>,
    pub controllers: BTreeMap<String, PrefixClassifier<f64>>,
    pub evaluators: BTreeMap<String, PrefixClassifier<f64>>,
    /// Trained on the validation split only.
    pub reference_lm: NGramLm<f64>,
}

pub struct Splits {
    pub vocab: Vocabulary,
    pub train: Vec<DialogueExample>,
    pub valid: Vec<DialogueExample>,
    pub test: Vec<DialogueExample>,
}

/// Splits raw dialogues and builds the vocabulary from the train part.
pub fn prepare_splits(raw: &[RawDialogue], settings: &ExperimentSettings) -> Result<Splits> {
    let (train, valid, test) = split_dataset(raw, settings.split, settings.split_seed)?;
    let vocab = build_vocabulary(&train, settings.min_count)?;
    Ok(Splits {
        train: encode_all(&train, &vocab),
        valid: encode_all(&valid, &vocab),
        test: encode_all(&test, &vocab),
        vocab,
    })
}

pub fn train_lm(
    examples: &[DialogueExample],
    vocab: &Vocabulary,
    settings: &ExperimentSettings,
) -> Result<NGramLm<f64>> {
    let seqs: Vec<Vec<u32>> = examples.iter().map(DialogueExample::lm_sequence).collect();
    NGramLm::train(&seqs, settings.lm_order, settings.lm_discount, vocab)
}

pub fn train_classifier(
    examples: &[DialogueExample],
    schema: &AttributeSchema,
    attribute: &str,
    seed: u64,
    buckets: usize,
) -> Result<PrefixClassifier<f64>> {
    let classes = &schema.require(attribute)?.classes;
    PrefixClassifier::train(
        &prefix_instances(examples, attribute),
        classes,
        seed,
        buckets,
    )
}

impl Experiment {
    pub fn build(
        raw: &[RawDialogue],
        schema: AttributeSchema,
        settings: &ExperimentSettings,
    ) -> Result<Self> {
        let names: Vec<String> = schema.names().map(str::to_string).collect();
        settings.check_seeds(names.len())?;
        let Splits {
            vocab,
            train,
            valid,
            test,
        } = prepare_splits(raw, settings)?;
        let lm = train_lm(&train, &vocab, settings)?;
        let reference_lm = train_lm(&valid, &vocab, settings)?;
        let mut controllers = BTreeMap::new();
        let mut evaluators = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            let c = settings.controller_seed_for(i);
            let e = settings.evaluator_seed_for(i);
            controllers.insert(
                name.clone(),
                train_classifier(&train, &schema, name, c, settings.buckets)?,
            );
            evaluators.insert(
                name.clone(),
                train_classifier(&train, &schema, name, e, settings.buckets)?,
            );
        }
        Ok(Self {
            schema,
            vocab,
            train,
            valid,
            test,
            lm,
            controllers,
            evaluators,
            reference_lm,
        })
    }

    pub fn controller_refs(&self) -> Vec<Controller<'_, f64>> {
        self.controllers
            .iter()
            .map(|(name, clf)| Controller::new(name.as_str(), clf as &dyn AttributeModel<f64>))
            .collect()
    }

    /// Test examples labelled for every attribute in `attributes`.
    pub fn eval_examples(&self, attributes: &[String]) -> Vec<&DialogueExample> {
        self.test
            .iter()
            .filter(|e| attributes.iter().all(|a| e.label(a).is_some()))
            .collect()
    }

    /// Decodes each example towards its own gold labels; runs in parallel,
    /// output order follows `examples`.
    pub fn decode_examples(
        &self,
        examples: &[&DialogueExample],
        attributes: &[String],
        config: &DecodeConfig<f64>,
    ) -> Result<Vec<DecodeTrace<f64>>> {
        let controllers = self.controller_refs();
        examples
            .par_iter()
            .map(|ex| {
                let targets = gold_targets(ex, attributes)?;
                let cfg = config.clone().with_targets(targets);
                Decoder::new(&self.lm, &controllers, cfg)?.decode(&ex.history)
            })
            .collect()
    }

    /// Mean per-response perplexity under the reference LM, `</s>` included.
    pub fn fluency(&self, examples: &[&DialogueExample], responses: &[&[u32]]) -> Result<f64> {
        if responses.is_empty() {
            return Err(Error::invalid("fluency of an empty response list"));
        }
        let mut sum = 0.0;
        for (ex, r) in examples.iter().zip(responses) {
            sum +=
                perplexity_in_context(&self.reference_lm, &dialogue_context(&ex.history, &[]), r)?;
        }
        Ok(sum / responses.len() as f64)
    }
}

pub fn gold_targets(ex: &DialogueExample, attributes: &[String]) -> Result<Vec<Target>> {
    attributes
        .iter()
        .map(|a| {
            ex.label(a)
                .map(|c| Target::new(a, c))
                .ok_or_else(|| Error::UnknownAttribute(a.clone()))
        })
        .collect()
}

/// Token-weighted perplexity of every response, `</s>` included, each
/// conditioned on its history.
pub fn corpus_perplexity(lm: &NGramLm<f64>, examples: &[DialogueExample]) -> Result<f64> {
    let mut nll = 0.0;
    let mut tokens = 0usize;
    for ex in examples {
        let ppl = perplexity_in_context(lm, &dialogue_context(&ex.history, &[]), &ex.response)?;
        nll += ppl.ln() * ex.response.len() as f64;
        tokens += ex.response.len();
    }
    if tokens == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok((nll / tokens as f64).exp())
}

/// Full-response classification accuracy on the examples labelled for
/// `attribute`; `None` when none is.
pub fn classifier_accuracy(
    clf: &PrefixClassifier<f64>,
    examples: &[DialogueExample],
    attribute: &str,
) -> Option<f64> {
    let mut n = 0usize;
    let mut hits = 0usize;
    for ex in examples {
        if let Some(label) = ex.label(attribute) {
            n += 1;
            if clf.class_index(label) == Some(clf.predict(&ex.history, &ex.response)) {
                hits += 1;
            }
        }
    }
    (n > 0).then(|| hits as f64 / n as f64)
}
