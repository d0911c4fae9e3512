use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::FilterError;
use crate::textmatch::{tokenize, CandidateMention, Token};

#[derive(Debug, Clone)]
struct PersonName {
    /// Full name with whitespace collapsed.
    text: String,
    tokens: Vec<String>,
}

/// Known full person names, matched as exact token sequences.
#[derive(Debug, Clone, Default)]
pub struct PersonLexicon {
    names: Vec<PersonName>,
    by_first_token: HashMap<String, Vec<usize>>,
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl PersonLexicon {
    pub fn new<'a>(names: impl IntoIterator<Item = &'a str>) -> Self {
        let mut lexicon = PersonLexicon::default();
        let mut seen = HashSet::new();
        for name in names {
            let text = collapse_ws(name);
            let tokens: Vec<String> = tokenize(&text).into_iter().map(|t| t.surface).collect();
            if tokens.is_empty() || !seen.insert(text.clone()) {
                continue;
            }
            lexicon
                .by_first_token
                .entry(tokens[0].clone())
                .or_default()
                .push(lexicon.names.len());
            lexicon.names.push(PersonName { text, tokens });
        }
        lexicon
    }

    /// One full name per line; blank lines and `#` comments are skipped.
    pub fn load(path: &Path) -> Result<Self, FilterError> {
        let text = std::fs::read_to_string(path).map_err(|source| FilterError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(PersonLexicon::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Person occurrences found in one document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PersonMatches {
    /// Byte spans of matched full names.
    pub spans: Vec<(usize, usize)>,
    /// Every token of every matched name, case preserved.
    pub parts: HashSet<String>,
}

/// Finds lexicon names in `tokens`. A name matches when its token surfaces
/// occur in sequence and the text they cover equals the name up to
/// whitespace, so `Javier, Solana` does not match `Javier Solana`.
pub fn match_persons(text: &str, tokens: &[Token], lexicon: &PersonLexicon) -> PersonMatches {
    let mut matches = PersonMatches::default();
    for (i, token) in tokens.iter().enumerate() {
        let Some(candidates) = lexicon.by_first_token.get(&token.surface) else {
            continue;
        };
        for &n in candidates {
            let name = &lexicon.names[n];
            let len = name.tokens.len();
            if i + len > tokens.len() {
                continue;
            }
            let window = &tokens[i..i + len];
            if !window
                .iter()
                .zip(&name.tokens)
                .all(|(t, s)| t.surface == *s)
            {
                continue;
            }
            let (start, end) = (token.start, window[len - 1].end);
            if collapse_ws(&text[start..end]) != name.text {
                continue;
            }
            matches.spans.push((start, end));
            matches.parts.extend(name.tokens.iter().cloned());
        }
    }
    matches.spans.sort_unstable();
    matches.spans.dedup();
    matches
}

/// Drops mentions inside a matched person name, and mentions whose surface
/// is a part of any person name matched in the same document.
pub fn filter_persons(
    mentions: Vec<CandidateMention>,
    persons: &PersonMatches,
) -> Vec<CandidateMention> {
    mentions
        .into_iter()
        .filter(|m| {
            !persons.spans.iter().any(|&(s, e)| m.overlaps(s, e))
                && !persons.parts.contains(&m.surface)
        })
        .collect()
}
