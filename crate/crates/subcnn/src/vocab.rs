//! Token vocabularies and fixed-length index encoding.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::segmenter::TextSegmenter;

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Bidirectional token <-> id mapping with reserved PAD and UNK entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary of at most `max_size` entries: PAD, UNK, then the
    /// most frequent tokens. Frequency ties break by first occurrence.
    ///
    /// `max_size` must be at least 3 so at least one real token fits.
    pub fn build(token_sequences: &[Vec<String>], max_size: usize) -> Vocabulary {
        assert!(max_size >= 3, "vocabulary needs room for PAD, UNK, and a token");
        let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
        let mut order = 0usize;
        for seq in token_sequences {
            for tok in seq {
                let entry = counts.entry(tok.as_str()).or_insert((0, order));
                entry.0 += 1;
                order += 1;
            }
        }
        counts.remove(PAD_TOKEN);
        counts.remove(UNK_TOKEN);
        let mut ranked: Vec<(&str, (usize, usize))> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));

        let mut id_to_token = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        id_to_token.extend(
            ranked
                .into_iter()
                .take(max_size - 2)
                .map(|(t, _)| t.to_string()),
        );
        Self::from_tokens(id_to_token).expect("constructed token list is valid")
    }

    fn from_tokens(id_to_token: Vec<String>) -> Result<Vocabulary> {
        let mut token_to_id = HashMap::with_capacity(id_to_token.len());
        for (id, tok) in id_to_token.iter().enumerate() {
            if token_to_id.insert(tok.clone(), id).is_some() {
                return Err(Error::VocabFormat(format!("duplicate token `{tok}`")));
            }
        }
        Ok(Vocabulary {
            token_to_id,
            id_to_token,
        })
    }

    pub fn size(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(|s| s.as_str())
    }

    /// One token per line, line number = id.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for tok in &self.id_to_token {
            out.push_str(tok);
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_file_string())
            .map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn from_file_string(content: &str) -> Result<Vocabulary> {
        let tokens: Vec<String> = content.lines().map(str::to_string).collect();
        if tokens.len() < 2 || tokens[0] != PAD_TOKEN || tokens[1] != UNK_TOKEN {
            return Err(Error::VocabFormat(format!(
                "first two lines must be `{PAD_TOKEN}` and `{UNK_TOKEN}`"
            )));
        }
        Self::from_tokens(tokens)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Vocabulary> {
        let content =
            fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_file_string(&content)
    }

    /// SHA-256 of the serialized form; checkpoints reference this.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.to_file_string().as_bytes());
        h.finalize().into()
    }
}

/// A fixed-length id sequence; positions at or past `true_length` are PAD.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSequence {
    pub ids: Vec<usize>,
    pub true_length: usize,
}

/// Maps tokens to ids (UNK for unseen), truncates to `l_max`, pads with PAD.
pub fn encode(vocab: &Vocabulary, tokens: &[String], l_max: usize) -> EncodedSequence {
    assert!(l_max >= 1, "sequence length must be positive");
    let mut ids: Vec<usize> = tokens
        .iter()
        .take(l_max)
        .map(|t| vocab.id(t).unwrap_or(UNK_ID))
        .collect();
    let true_length = ids.len();
    ids.resize(l_max, PAD_ID);
    EncodedSequence { ids, true_length }
}

/// Inverse of [`encode`]; PAD positions are dropped.
pub fn decode(vocab: &Vocabulary, ids: &[usize]) -> Result<Vec<String>> {
    let mut tokens = Vec::with_capacity(ids.len());
    for &id in ids {
        let tok = vocab.token(id).ok_or_else(|| {
            Error::Range(format!("id {id} out of range for vocabulary size {}", vocab.size()))
        })?;
        if id != PAD_ID {
            tokens.push(tok.to_string());
        }
    }
    Ok(tokens)
}

/// An encoded example ready for the trainer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedExample {
    pub seq: EncodedSequence,
    pub label: usize,
}

/// Segments and encodes every example of a dataset.
pub fn encode_dataset(
    dataset: &Dataset,
    segmenter: &TextSegmenter,
    vocab: &Vocabulary,
    l_max: usize,
) -> Vec<EncodedExample> {
    dataset
        .examples
        .iter()
        .map(|ex| EncodedExample {
            seq: encode(vocab, &segmenter.segment(&ex.text), l_max),
            label: ex.label,
        })
        .collect()
}
