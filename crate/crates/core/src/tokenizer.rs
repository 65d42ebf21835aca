//! Byte-level BPE compatible with the GPT-2 vocabulary.
//!
//! Text is split with the GPT-2 pre-tokenization pattern, each piece's UTF-8
//! bytes are mapped to printable code points through the standard 256-entry
//! byte table, and merges are applied in rank order. The GPT-2 `vocab.json`
//! and `merges.txt` ship with the crate (see [`BpeVocab::gpt2`]).

use std::collections::HashMap;
use std::path::Path;

use fancy_regex::Regex;

use crate::error::{Error, Result};

const GPT2_VOCAB: &str = include_str!("../assets/gpt2/vocab.json");
const GPT2_MERGES: &str = include_str!("../assets/gpt2/merges.txt");

const PRETOKENIZE: &str =
    r"'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+";

#[derive(Debug, Clone)]
pub struct BpeVocab {
    token_to_id: HashMap<String, u32>,
    id_to_token: Vec<String>,
    merge_ranks: HashMap<(String, String), usize>,
    byte_encoder: [char; 256],
    byte_decoder: HashMap<char, u8>,
    pattern: Regex,
}

/// GPT-2's reversible byte → printable-unicode table.
pub fn bytes_to_unicode() -> [char; 256] {
    let mut printable: Vec<u32> = (u32::from(b'!')..=u32::from(b'~'))
        .chain(0xA1..=0xAC)
        .chain(0xAE..=0xFF)
        .collect();
    let mut table = ['\0'; 256];
    let mut extra = 0;
    for b in 0..256u32 {
        if printable.contains(&b) {
            table[b as usize] = char::from_u32(b).unwrap();
        } else {
            table[b as usize] = char::from_u32(256 + extra).unwrap();
            printable.push(256 + extra);
            extra += 1;
        }
    }
    table
}

impl BpeVocab {
    /// The bundled GPT-2 vocabulary (50,257 tokens, 50,000 merges).
    pub fn gpt2() -> Result<Self> {
        Self::from_strs(GPT2_VOCAB, GPT2_MERGES)
    }

    pub fn from_files(vocab_json: impl AsRef<Path>, merges_txt: impl AsRef<Path>) -> Result<Self> {
        let (vp, mp) = (vocab_json.as_ref(), merges_txt.as_ref());
        let vocab = std::fs::read_to_string(vp).map_err(|e| Error::io(vp, e))?;
        let merges = std::fs::read_to_string(mp).map_err(|e| Error::io(mp, e))?;
        Self::from_strs(&vocab, &merges)
    }

    pub fn from_strs(vocab_json: &str, merges_txt: &str) -> Result<Self> {
        let token_to_id: HashMap<String, u32> = serde_json::from_str(vocab_json)?;
        let mut id_to_token = vec![None; token_to_id.len()];
        for (tok, &id) in &token_to_id {
            let slot = id_to_token
                .get_mut(id as usize)
                .ok_or_else(|| Error::Vocab(format!("id {id} leaves a gap in 0..{}", token_to_id.len())))?;
            if slot.is_some() {
                return Err(Error::Vocab(format!("id {id} assigned twice")));
            }
            *slot = Some(tok.clone());
        }
        let id_to_token: Vec<String> = id_to_token.into_iter().map(Option::unwrap).collect();

        let mut merge_ranks = HashMap::new();
        for (lineno, line) in merges_txt.lines().enumerate() {
            if line.starts_with("#version") || line.trim().is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once(' ')
                .ok_or_else(|| Error::Vocab(format!("merges line {}: `{line}`", lineno + 1)))?;
            let merged = format!("{a}{b}");
            if !token_to_id.contains_key(&merged) {
                return Err(Error::Vocab(format!("merge output `{merged}` not in vocabulary")));
            }
            let rank = merge_ranks.len();
            merge_ranks.entry((a.to_string(), b.to_string())).or_insert(rank);
        }

        let byte_encoder = bytes_to_unicode();
        let byte_decoder = byte_encoder
            .iter()
            .enumerate()
            .map(|(b, &c)| (c, b as u8))
            .collect();
        let pattern = Regex::new(PRETOKENIZE).expect("static pattern");
        Ok(Self {
            token_to_id,
            id_to_token,
            merge_ranks,
            byte_encoder,
            byte_decoder,
            pattern,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn num_merges(&self) -> usize {
        self.merge_ranks.len()
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    /// The byte-mapped surface form of `id`.
    pub fn token(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut ids = Vec::new();
        for piece in self.pattern.find_iter(text) {
            // the pattern has no backtracking bombs; failure would be a bug
            let piece = piece.expect("pre-tokenization regex failed");
            let mapped: String = piece
                .as_str()
                .bytes()
                .map(|b| self.byte_encoder[b as usize])
                .collect();
            self.bpe(&mapped, &mut ids);
        }
        ids
    }

    fn bpe(&self, word: &str, out: &mut Vec<u32>) {
        if let Some(&id) = self.token_to_id.get(word) {
            out.push(id);
            return;
        }
        let mut parts: Vec<String> = word.chars().map(String::from).collect();
        while parts.len() > 1 {
            let best = parts
                .windows(2)
                .enumerate()
                .filter_map(|(i, w)| {
                    self.merge_ranks
                        .get(&(w[0].clone(), w[1].clone()))
                        .map(|&r| (r, i))
                })
                .min();
            let Some((_, first)) = best else { break };
            let (left, right) = (parts[first].clone(), parts[first + 1].clone());
            let mut merged = Vec::with_capacity(parts.len());
            let mut i = 0;
            while i < parts.len() {
                if i + 1 < parts.len() && parts[i] == left && parts[i + 1] == right {
                    merged.push(format!("{left}{right}"));
                    i += 2;
                } else {
                    merged.push(std::mem::take(&mut parts[i]));
                    i += 1;
                }
            }
            parts = merged;
        }
        for p in parts {
            // every single byte symbol is in the GPT-2 vocabulary
            out.push(self.token_to_id[&p]);
        }
    }

    /// Raw bytes spelled by `ids`.
    pub fn decode_bytes(&self, ids: &[u32]) -> Result<Vec<u8>> {
        let mut bytes = Vec::new();
        for &id in ids {
            let tok = self.token(id).ok_or(Error::TokenOutOfRange {
                id,
                vocab_size: self.vocab_size(),
            })?;
            for c in tok.chars() {
                let b = self
                    .byte_decoder
                    .get(&c)
                    .ok_or_else(|| Error::Vocab(format!("token {id} has unmapped char {c:?}")))?;
                bytes.push(*b);
            }
        }
        Ok(bytes)
    }

    /// Decodes to text; byte sequences that are not valid UTF-8 (possible for
    /// an arbitrary id slice) are replaced with U+FFFD.
    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        let bytes = self.decode_bytes(ids)?;
        Ok(match String::from_utf8(bytes) {
            Ok(s) => s,
            Err(e) => String::from_utf8_lossy(e.as_bytes()).into_owned(),
        })
    }
}
