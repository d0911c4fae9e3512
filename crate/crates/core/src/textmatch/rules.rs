use std::path::Path;

use regex::Regex;

use super::{MatchedVia, TextMatchError, Token};
use crate::gazetteer::{normalize_name, LangScope};

const STARTER_RULES: &str = include_str!("../../data/rules.tsv");

/// A regular-expression rewrite from an inflected or derived token to the
/// gazetteer form, e.g. Romanian `parisului` to `paris`.
#[derive(Debug, Clone)]
pub struct MorphRule {
    /// `lang:line`, stable for a given rules file.
    pub id: String,
    pub lang: LangScope,
    pub pattern: Regex,
    pub replacement: String,
    pub note: String,
}

impl MorphRule {
    /// Applies the rule to a normalized key. `None` when the pattern does not
    /// match or the rewrite would leave nothing.
    pub fn apply(&self, key: &str) -> Option<String> {
        if !self.pattern.is_match(key) {
            return None;
        }
        let rewritten = self.pattern.replace(key, self.replacement.as_str());
        normalize_name(&rewritten)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<MorphRule>,
}

impl RuleSet {
    pub fn empty() -> Self {
        RuleSet::default()
    }

    /// The shipped rules for Romanian, French and Arabic.
    pub fn starter() -> Self {
        RuleSet::parse(STARTER_RULES).expect("shipped rules file is valid")
    }

    pub fn load(path: &Path) -> Result<Self, TextMatchError> {
        let text = std::fs::read_to_string(path).map_err(|source| TextMatchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        RuleSet::parse(&text)
    }

    /// Parses `lang \t pattern \t replacement \t note` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, TextMatchError> {
        let mut rules = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(TextMatchError::Rule {
                    line: line_no,
                    message: format!("expected 3 or 4 columns, found {}", fields.len()),
                });
            }
            let lang = match LangScope::parse(fields[0]) {
                Some(scope @ LangScope::Only(_)) => scope,
                _ => {
                    return Err(TextMatchError::Rule {
                        line: line_no,
                        message: format!("invalid language code {:?}", fields[0]),
                    })
                }
            };
            let pattern = Regex::new(fields[1].trim()).map_err(|e| TextMatchError::Rule {
                line: line_no,
                message: e.to_string(),
            })?;
            rules.push(MorphRule {
                id: format!("{lang}:{line_no}"),
                lang,
                pattern,
                replacement: fields[2].trim().to_string(),
                note: fields
                    .get(3)
                    .map(|s| s.trim().to_string())
                    .unwrap_or_default(),
            });
        }
        Ok(RuleSet { rules })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn push(&mut self, rule: MorphRule) {
        self.rules.push(rule);
    }

    pub fn for_lang(&self, lang: LangScope) -> impl Iterator<Item = &MorphRule> {
        self.rules
            .iter()
            .filter(move |r| lang != LangScope::Any && r.lang == lang)
    }
}

/// Lookup keys for a single token: its own normalized form first, then one
/// rewrite per matching rule of `lang`, without duplicates.
pub fn candidate_keys(
    token: &Token,
    lang: LangScope,
    rules: &RuleSet,
) -> Vec<(String, MatchedVia)> {
    let Some(own) = normalize_name(&token.surface) else {
        return Vec::new();
    };
    let mut keys = vec![(own.clone(), MatchedVia::Direct)];
    for rule in rules.for_lang(lang) {
        if let Some(key) = rule.apply(&own) {
            if !keys.iter().any(|(k, _)| *k == key) {
                keys.push((key, MatchedVia::Rule(rule.id.clone())));
            }
        }
    }
    keys
}
