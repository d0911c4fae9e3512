//! Tokenization and gazetteer matching.
//!
//! [`scan`] walks the token sequence left to right and at each position
//! takes the longest run of up to `max_tokens` tokens whose text is a
//! gazetteer key. In cased scripts only runs starting with an uppercase
//! token are tried; caseless scripts (Arabic, Farsi, ...) try every token.
//! Morphological rewrites are a fallback for single tokens that miss.

mod rules;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::gazetteer::{normalize_name, GazetteerIndex, LangScope, PlaceId};

pub use rules::{candidate_keys, MorphRule, RuleSet};

pub const DEFAULT_MAX_TOKENS: usize = 4;

#[derive(Debug, Error)]
pub enum TextMatchError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("rules line {line}: {message}")]
    Rule { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Byte offsets into the source text.
    pub start: usize,
    pub end: usize,
    pub starts_uppercase: bool,
    /// Whether the token contains any letter that has case.
    pub script_cased: bool,
}

impl Token {
    /// Tokens eligible to start a lookup: capitalized, or written in a
    /// script without case.
    pub fn may_start_name(&self) -> bool {
        self.starts_uppercase || !self.script_cased
    }
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{02BC}')
}

fn make_token(surface: &str, start: usize) -> Token {
    let first = surface.chars().next();
    Token {
        surface: surface.to_string(),
        start,
        end: start + surface.len(),
        starts_uppercase: first.is_some_and(char::is_uppercase),
        script_cased: surface
            .chars()
            .any(|c| c.is_uppercase() || c.is_lowercase()),
    }
}

/// Splits text into word tokens by Unicode word boundaries. Elisions such
/// as `l'Italie` are split at the apostrophe; punctuation is dropped.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for (offset, word) in text.split_word_bound_indices() {
        if !word.chars().any(char::is_alphanumeric) {
            continue;
        }
        let mut part_start = 0;
        for (i, c) in word.char_indices() {
            if is_apostrophe(c) {
                if i > part_start {
                    tokens.push(make_token(&word[part_start..i], offset + part_start));
                }
                part_start = i + c.len_utf8();
            }
        }
        if part_start < word.len() {
            tokens.push(make_token(&word[part_start..], offset + part_start));
        }
    }
    tokens
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchedVia {
    Direct,
    /// Id of the morphological rule that produced the key.
    Rule(String),
}

/// A text span whose name triggers one or more gazetteer places.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateMention {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub lookup_key: String,
    /// Sorted by place_id, never empty.
    pub candidates: Vec<PlaceId>,
    pub matched_via: MatchedVia,
}

impl CandidateMention {
    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }

    pub fn is_ambiguous(&self) -> bool {
        self.candidates.len() > 1
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub max_tokens: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

pub fn scan(
    text: &str,
    lang: LangScope,
    index: &GazetteerIndex,
    rules: &RuleSet,
    opts: ScanOptions,
) -> Vec<CandidateMention> {
    scan_tokens(text, &tokenize(text), lang, index, rules, opts)
}

/// [`scan`] over an existing tokenization of `text`.
pub fn scan_tokens(
    text: &str,
    tokens: &[Token],
    lang: LangScope,
    index: &GazetteerIndex,
    rules: &RuleSet,
    opts: ScanOptions,
) -> Vec<CandidateMention> {
    let max_tokens = opts.max_tokens.max(1);
    let mut mentions = Vec::new();
    let mut i = 0;
    'outer: while i < tokens.len() {
        if !tokens[i].may_start_name() {
            i += 1;
            continue;
        }
        let longest = max_tokens.min(tokens.len() - i);
        for len in (1..=longest).rev() {
            let (start, end) = (tokens[i].start, tokens[i + len - 1].end);
            let surface = &text[start..end];
            let Some(key) = normalize_name(surface) else {
                continue;
            };
            let mut found = lookup_ids(index, &key, lang).map(|ids| (key, ids, MatchedVia::Direct));
            if found.is_none() && len == 1 {
                found = candidate_keys(&tokens[i], lang, rules)
                    .into_iter()
                    .skip(1)
                    .find_map(|(k, via)| lookup_ids(index, &k, lang).map(|ids| (k, ids, via)));
            }
            if let Some((lookup_key, candidates, matched_via)) = found {
                mentions.push(CandidateMention {
                    start,
                    end,
                    surface: surface.to_string(),
                    lookup_key,
                    candidates,
                    matched_via,
                });
                i += len;
                continue 'outer;
            }
        }
        i += 1;
    }
    mentions
}

fn lookup_ids(index: &GazetteerIndex, key: &str, lang: LangScope) -> Option<Vec<PlaceId>> {
    let hits = index.lookup(key, lang);
    (!hits.is_empty()).then(|| hits.into_iter().map(|p| p.place_id.clone()).collect())
}
