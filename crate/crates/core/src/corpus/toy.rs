//! Templated two-attribute dialogue corpus used by the demos, the CLI smoke
//! tests and the acceptance suite.
//!
//! Every response is built from a dialog-act template with one emotion slot
//! and one topic slot. Emotion and dialog act are drawn uniformly and
//! independently; the history mentions the response topic but carries no
//! attribute signal. Output is fully determined by `(n, seed)`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{RawDialogue, DIALOG_ACT_CLASSES, EMOTION_CLASSES};

pub const DEFAULT_TOY_SIZE: usize = 2000;
pub const DEFAULT_TOY_SEED: u64 = 20240917;

const EMOTION_WORDS: [(&str, [&str; 4]); 6] = [
    ("anger", ["angry", "furious", "annoyed", "mad"]),
    ("disgust", ["disgusted", "sickened", "revolted", "appalled"]),
    ("fear", ["scared", "afraid", "nervous", "terrified"]),
    ("happiness", ["happy", "glad", "delighted", "cheerful"]),
    ("sadness", ["sad", "unhappy", "gloomy", "miserable"]),
    ("surprise", ["surprised", "amazed", "shocked", "astonished"]),
];

const TOPICS: [&str; 10] = [
    "party", "exam", "movie", "trip", "meeting", "news", "weather", "dinner", "game", "concert",
];

const INTENSIFIERS: [&str; 4] = ["very", "really", "so", "quite"];

const OPENERS: [&str; 4] = ["oh ,", "well ,", "hmm ,", "honestly ,"];

// `{e}` emotion word, `{t}` topic, `{i}` optional intensifier.
const TEMPLATES: [(&str, [&str; 3]); 4] = [
    (
        "inform",
        [
            "i am {i}{e} about the {t} .",
            "i feel {i}{e} after the {t} .",
            "the {t} made me {i}{e} .",
        ],
    ),
    (
        "question",
        [
            "are you {i}{e} about the {t} ?",
            "why are you {e} about the {t} ?",
            "did the {t} make you {e} ?",
        ],
    ),
    (
        "directive",
        [
            "please do not be {e} about the {t} .",
            "try not to get {e} about the {t} .",
            "you should stop being {e} about the {t} .",
        ],
    ),
    (
        "commissive",
        [
            "i will be {i}{e} at the {t} .",
            "i promise to stay {e} during the {t} .",
            "i will try not to be {e} about the {t} .",
        ],
    ),
];

const HISTORY_TEMPLATES: [&str; 6] = [
    "how was the {t} ?",
    "what happened at the {t} ?",
    "tell me about the {t} .",
    "did you go to the {t} ?",
    "any news about the {t} ?",
    "we talked about the {t} yesterday .",
];

const GREETINGS: [&str; 3] = ["hi there .", "hey , long time no see .", "good morning ."];

pub fn generate_toy_corpus(n: usize, seed: u64) -> Vec<RawDialogue> {
    debug_assert_eq!(EMOTION_WORDS.len(), EMOTION_CLASSES.len());
    debug_assert_eq!(TEMPLATES.len(), DIALOG_ACT_CLASSES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_dialogue(&mut rng)).collect()
}

fn sample_dialogue(rng: &mut ChaCha8Rng) -> RawDialogue {
    let (emotion, words) = EMOTION_WORDS[rng.gen_range(0..EMOTION_WORDS.len())];
    let (act, templates) = TEMPLATES[rng.gen_range(0..TEMPLATES.len())];
    let topic = *TOPICS.choose(rng).unwrap();
    let word = *words.choose(rng).unwrap();
    let intensifier = if rng.gen_bool(0.4) {
        format!("{} ", INTENSIFIERS.choose(rng).unwrap())
    } else {
        String::new()
    };
    let mut response = templates
        .choose(rng)
        .unwrap()
        .replace("{i}", &intensifier)
        .replace("{e}", word)
        .replace("{t}", topic);
    if rng.gen_bool(0.25) {
        response = format!("{} {response}", OPENERS.choose(rng).unwrap());
    }

    let mut history = Vec::new();
    if rng.gen_bool(0.3) {
        history.push(GREETINGS.choose(rng).unwrap().to_string());
    }
    history.push(HISTORY_TEMPLATES.choose(rng).unwrap().replace("{t}", topic));

    let mut attributes = BTreeMap::new();
    attributes.insert("emotion".to_string(), emotion.to_string());
    attributes.insert("dialog-act".to_string(), act.to_string());
    RawDialogue {
        history,
        response,
        attributes,
    }
}
