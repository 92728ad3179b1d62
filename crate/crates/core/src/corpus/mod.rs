//! Dialogue data: JSON-lines ingestion, vocabulary, tokenization, prefix
//! expansion for classifier training, and dataset splits.

mod dataset;
pub mod toy;
mod vocab;

pub use dataset::{
    build_vocabulary, dialogue_context, encode_all, enumerate_prefixes, load_dataset,
    prefix_instances, split_dataset, write_dataset, AttributeClasses, AttributeSchema,
    DialogueExample, PrefixInstance, RawDialogue, DIALOG_ACT_CLASSES, EMOTION_CLASSES,
};
pub use vocab::{split_words, tokenize, Vocabulary, BOS, BOS_ID, EOS, EOS_ID, UNK, UNK_ID};
