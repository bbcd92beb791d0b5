use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize};

use super::{tokenize, DataError, QARecord, Split};

pub const PAD_ID: usize = 0;
pub const BOS_ID: usize = 1;
pub const EOS_ID: usize = 2;
pub const UNK_ID: usize = 3;
pub const SEP_ID: usize = 4;
const SPECIALS: [(usize, &str); 5] = [
    (PAD_ID, "<pad>"),
    (BOS_ID, "<bos>"),
    (EOS_ID, "<eos>"),
    (UNK_ID, "<unk>"),
    (SEP_ID, "<sep>"),
];

/// Word-level vocabulary with reserved special ids. Bijective on
/// non-special tokens; id 0 is always padding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Vocabulary {
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            tokens: Vec<String>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.tokens.len() < SPECIALS.len() {
            return Err(serde::de::Error::custom(
                "vocabulary is missing its special tokens",
            ));
        }
        for (id, name) in SPECIALS {
            if raw.tokens[id] != name {
                return Err(serde::de::Error::custom(format!(
                    "special token slot {id} holds {:?}, expected {name:?}",
                    raw.tokens[id]
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for token in &raw.tokens {
            if !seen.insert(token.as_str()) {
                return Err(serde::de::Error::custom(format!(
                    "duplicate vocabulary token {token:?}"
                )));
            }
        }
        let mut vocab = Vocabulary {
            tokens: raw.tokens,
            index: HashMap::new(),
        };
        vocab.rebuild_index();
        Ok(vocab)
    }
}

impl Vocabulary {
    /// Builds from regular tokens already ordered; specials are prepended.
    pub fn from_tokens(regular: impl IntoIterator<Item = String>) -> Self {
        let mut tokens: Vec<String> = SPECIALS.iter().map(|(_, s)| (*s).to_owned()).collect();
        for tok in regular {
            tokens.push(tok);
        }
        let mut vocab = Vocabulary {
            tokens,
            index: HashMap::new(),
        };
        vocab.rebuild_index();
        vocab
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id_of(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token_of(&self, id: usize) -> &str {
        self.tokens.get(id).map(String::as_str).unwrap_or("<unk>")
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id_of(t)).collect()
    }

    /// Decodes ids to a space-joined string, dropping special tokens.
    pub fn decode(&self, ids: &[usize]) -> String {
        let words: Vec<&str> = ids
            .iter()
            .filter(|&&id| id >= SPECIALS.len())
            .map(|&id| self.token_of(id))
            .collect();
        words.join(" ")
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Builds the vocabulary over question and answer tokens of the train
/// split. Tokens seen fewer than `min_count` times encode as `<unk>`,
/// and corpus tokens spelled like the reserved specials are dropped so
/// the token-to-id map stays bijective. Ordering is by descending count
/// with lexicographic tie-break, so the result is deterministic.
pub fn build_vocabulary(records: &[QARecord], min_count: usize) -> Result<Vocabulary, DataError> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    let mut saw_train = false;
    for record in records.iter().filter(|r| r.split == Split::Train) {
        saw_train = true;
        for tok in tokenize(&record.question)
            .into_iter()
            .chain(tokenize(&record.answer))
        {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    if !saw_train {
        return Err(DataError::EmptyTrainSplit);
    }
    let mut pairs: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(tok, c)| *c >= min_count && !SPECIALS.iter().any(|(_, s)| s == tok))
        .collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(Vocabulary::from_tokens(pairs.into_iter().map(|(t, _)| t)))
}
