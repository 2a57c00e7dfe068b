use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::template::{lexicon, Axis, Direction, TemplateVar};

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;

pub const SPECIALS: [&str; 4] = ["<pad>", "<bos>", "<eos>", "<unk>"];

/// Index bounds of the variable tokens that are always part of the target
/// vocabulary. Charts exceeding them cannot be encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarBounds {
    pub max_columns: usize,
    pub max_rows: usize,
    pub max_title_tokens: usize,
    pub max_subjects: usize,
}

impl Default for VarBounds {
    fn default() -> Self {
        VarBounds {
            max_columns: 16,
            max_rows: 64,
            max_title_tokens: 32,
            max_subjects: 8,
        }
    }
}

/// Every grammar token within `bounds`, in a fixed order.
pub fn grammar_tokens(bounds: &VarBounds) -> Vec<String> {
    let mut vars = Vec::new();
    vars.extend((0..bounds.max_subjects).map(TemplateVar::Subject));
    for column in 0..bounds.max_columns {
        vars.extend((0..=bounds.max_rows).map(|row| TemplateVar::Date { column, row }));
    }
    vars.push(TemplateVar::AxisLabel(Axis::X));
    vars.push(TemplateVar::AxisLabel(Axis::Y));
    vars.extend((0..bounds.max_title_tokens).map(TemplateVar::Title));
    for column in 0..bounds.max_columns {
        vars.extend((0..=bounds.max_rows).map(|row| TemplateVar::Cell { column, row }));
    }
    vars.extend((0..lexicon::TREND_UP.len()).map(|lexeme| TemplateVar::Trend {
        direction: Direction::Up,
        lexeme,
    }));
    vars.extend((0..lexicon::TREND_DOWN.len()).map(|lexeme| TemplateVar::Trend {
        direction: Direction::Down,
        lexeme,
    }));
    vars.extend((0..lexicon::SCALES.len()).map(TemplateVar::Scale));
    vars.into_iter().map(|v| v.to_string()).collect()
}

/// Token/id bijection with fixed special ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    /// Specials first, then `reserved` in order, then any further tokens.
    pub fn from_tokens<I: IntoIterator<Item = String>>(reserved: I) -> Self {
        let mut v = Vocab {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for s in SPECIALS {
            v.push(s.to_string());
        }
        for t in reserved {
            v.push(t);
        }
        v
    }

    fn push(&mut self, token: String) {
        if !self.index.contains_key(&token) {
            self.index.insert(token.clone(), self.tokens.len() as u32);
            self.tokens.push(token);
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(UNK)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// `BOS tokens… EOS`, unknown tokens mapped to UNK.
    pub fn encode_target<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        std::iter::once(BOS)
            .chain(tokens.iter().map(|t| self.id_or_unk(t.as_ref())))
            .chain(std::iter::once(EOS))
            .collect()
    }

    /// Tokens of an id sequence with BOS, EOS and PAD removed. UNK is kept.
    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .filter(|&&id| !matches!(id, PAD | BOS | EOS))
            .map(|&id| self.token(id).unwrap_or(SPECIALS[UNK as usize]).to_string())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.tokens).expect("string array serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let tokens: Vec<String> = serde_json::from_str(json)?;
        if tokens.len() < SPECIALS.len() || tokens[..4] != SPECIALS {
            return Err(Error::Config("vocabulary must start with <pad> <bos> <eos> <unk>".into()));
        }
        let v = Vocab::from_tokens(tokens.iter().skip(4).cloned());
        if v.len() != tokens.len() {
            return Err(Error::Config("vocabulary contains duplicate tokens".into()));
        }
        Ok(v)
    }

    /// SHA-256 of the JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

impl Serialize for Vocab {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.tokens.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocab {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let tokens = Vec::<String>::deserialize(d)?;
        let json = serde_json::to_string(&tokens).map_err(serde::de::Error::custom)?;
        Vocab::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Target vocabulary: specials, every grammar token within `bounds`, then
/// corpus tokens seen at least `min_freq` times ordered by frequency
/// (descending) and then lexicographically.
pub fn build_vocab<'a, I>(texts: I, min_freq: usize, bounds: &VarBounds) -> Vocab
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for text in texts {
        for tok in text.split_whitespace() {
            *counts.entry(tok).or_default() += 1;
        }
    }
    let mut frequent: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(_, n)| n >= min_freq.max(1))
        .collect();
    frequent.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    Vocab::from_tokens(
        grammar_tokens(bounds)
            .into_iter()
            .chain(frequent.into_iter().map(|(t, _)| t.to_string())),
    )
}
