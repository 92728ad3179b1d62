#![allow(dead_code)]

use ecodec::corpus::{
    build_vocabulary, encode_all, prefix_instances, toy::generate_toy_corpus, AttributeSchema,
    DialogueExample, Vocabulary,
};
use ecodec::models::{NGramLm, PrefixClassifier, DEFAULT_BUCKETS};
use ecodec::Scalar;

pub struct Fixture<T: Scalar> {
    pub vocab: Vocabulary,
    pub examples: Vec<DialogueExample>,
    pub lm: NGramLm<T>,
    pub emotion: PrefixClassifier<T>,
    pub act: PrefixClassifier<T>,
}

pub fn fixture<T: Scalar>(n: usize, seed: u64) -> Fixture<T> {
    let raw = generate_toy_corpus(n, seed);
    let vocab = build_vocabulary(&raw, 1).unwrap();
    let examples = encode_all(&raw, &vocab);
    let seqs: Vec<Vec<u32>> = examples.iter().map(|e| e.lm_sequence()).collect();
    let lm = NGramLm::train(&seqs, 3, T::lit(0.75), &vocab).unwrap();
    let schema = AttributeSchema::daily_dialog();
    let clf = |name: &str, seed: u64| {
        let classes = schema.get(name).unwrap().classes.clone();
        PrefixClassifier::train(
            &prefix_instances(&examples, name),
            &classes,
            seed,
            DEFAULT_BUCKETS,
        )
        .unwrap()
    };
    Fixture {
        emotion: clf("emotion", 1),
        act: clf("dialog-act", 2),
        vocab,
        examples,
        lm,
    }
}
