use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub const BOS_ID: u32 = 0;
pub const EOS_ID: u32 = 1;
pub const UNK_ID: u32 = 2;

const SPECIALS: [&str; 3] = [BOS, EOS, UNK];

fn is_special(s: &str) -> bool {
    SPECIALS.contains(&s)
}

/// Splits text into lowercase word and punctuation tokens.
///
/// Every non-alphanumeric, non-whitespace character becomes its own token.
/// A whitespace-delimited chunk that spells a special token (`<s>`, `</s>`,
/// `<unk>`) is kept whole so that detokenized output re-tokenizes to the
/// same ids.
pub fn split_words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if is_special(chunk) {
            out.push(chunk.to_string());
            continue;
        }
        let mut word = String::new();
        for ch in chunk.to_lowercase().chars() {
            if ch.is_alphanumeric() {
                word.push(ch);
            } else {
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                out.push(ch.to_string());
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}

/// Closed vocabulary with `<s>`, `</s>` and `<unk>` at ids 0, 1, 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    id_of: HashMap<String, u32>,
    string_of: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from raw texts. Tokens seen fewer than
    /// `min_count` times are left out (and later map to `<unk>`). Regular
    /// tokens get ids by descending frequency, ties in lexicographic order.
    pub fn from_texts<'a, I>(texts: I, min_count: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for text in texts {
            for tok in split_words(text) {
                if !is_special(&tok) {
                    *counts.entry(tok).or_default() += 1;
                }
            }
        }
        if counts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut kept: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if kept.is_empty() {
            return Err(Error::invalid(format!(
                "no token reaches min_count={min_count}"
            )));
        }
        let tokens = SPECIALS
            .iter()
            .map(|s| s.to_string())
            .chain(kept.into_iter().map(|(t, _)| t))
            .collect();
        Self::from_tokens(tokens)
    }

    /// Builds from an id-ordered token list, which must start with the three
    /// specials in order.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 4 {
            return Err(Error::invalid(
                "vocabulary needs at least one regular token",
            ));
        }
        if tokens[..3] != SPECIALS {
            return Err(Error::invalid(
                "vocabulary must start with <s>, </s>, <unk>",
            ));
        }
        let mut id_of = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::invalid(format!("invalid vocabulary token {t:?}")));
            }
            if id_of.insert(t.clone(), i as u32).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Self {
            id_of,
            string_of: tokens,
        })
    }

    pub fn size(&self) -> usize {
        self.string_of.len()
    }

    pub fn bos(&self) -> u32 {
        BOS_ID
    }

    pub fn eos(&self) -> u32 {
        EOS_ID
    }

    pub fn unk(&self) -> u32 {
        UNK_ID
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.id_of.get(token).copied()
    }

    /// Id of `token`, or `<unk>`.
    pub fn lookup(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: u32) -> &str {
        self.string_of
            .get(id as usize)
            .map(String::as_str)
            .unwrap_or(UNK)
    }

    pub fn tokens(&self) -> &[String] {
        &self.string_of
    }

    pub fn tokenize(&self, text: &str) -> Vec<u32> {
        split_words(text).iter().map(|t| self.lookup(t)).collect()
    }

    pub fn detokenize(&self, ids: &[u32]) -> String {
        ids.iter()
            .map(|&i| self.token(i))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Like `detokenize`, but drops `<s>`/`</s>` for display.
    pub fn render(&self, ids: &[u32]) -> String {
        ids.iter()
            .filter(|&&i| i != BOS_ID && i != EOS_ID)
            .map(|&i| self.token(i))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Hex SHA-256 over the newline-joined token list; model files record it
    /// to detect a mismatched vocabulary at load time.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.string_of {
            h.update(t.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Plain text, one token per line, line number = id.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for t in &self.string_of {
            writeln!(f, "{t}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_tokens(text.lines().map(str::to_string).collect())
    }
}

/// Tokenizes `text` against `vocab`; unknown words become `<unk>`.
pub fn tokenize(text: &str, vocab: &Vocabulary) -> Vec<u32> {
    vocab.tokenize(text)
}
