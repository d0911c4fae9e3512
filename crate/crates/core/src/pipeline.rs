//! Per-document tagging: scan, person filter, stop-word filter, shallow
//! context, then resolution. Individual heuristics can be switched off for
//! ablation runs.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::context::{assemble_context, shallow_country, GeoContext};
use crate::disambig::{resolve, Decision, Mode, ResolveOptions, ScoringParams};
use crate::filters::{filter_persons, filter_stopwords, match_persons, PersonLexicon, StopList};
use crate::gazetteer::{CountryCode, GazetteerIndex, LangScope, PlaceId};
use crate::textmatch::{scan_tokens, tokenize, RuleSet, ScanOptions};

/// One input document, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub lang: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_country: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub story_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub article_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<String>,
}

impl DocumentRecord {
    pub fn new(id: &str, lang: &str, text: &str) -> Self {
        DocumentRecord {
            id: id.into(),
            lang: lang.into(),
            text: text.into(),
            source_country: None,
            story_id: None,
            article_count: None,
            title: None,
            link: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Important unambiguous name that set the document context.
    Shallow,
    Deep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedMention {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub place_id: PlaceId,
    pub country: CountryCode,
    pub lat: f64,
    pub lon: f64,
    pub class: u8,
    pub score: f64,
    pub method: Method,
    pub decided_by: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedRecord {
    #[serde(flatten)]
    pub doc: DocumentRecord,
    /// Sorted by start offset.
    pub mentions: Vec<TaggedMention>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heuristic {
    GeoContext,
    ClassImportance,
    KmDistance,
    PersonFilter,
    StopList,
}

impl Heuristic {
    pub const ALL: [Heuristic; 5] = [
        Heuristic::GeoContext,
        Heuristic::ClassImportance,
        Heuristic::KmDistance,
        Heuristic::PersonFilter,
        Heuristic::StopList,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::GeoContext => "geo-context",
            Heuristic::ClassImportance => "class-importance",
            Heuristic::KmDistance => "km-distance",
            Heuristic::PersonFilter => "person-filter",
            Heuristic::StopList => "stoplist",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Heuristic::ALL.into_iter().find(|h| h.name() == s.trim())
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which heuristics are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Heuristics {
    enabled: [bool; 5],
}

impl Default for Heuristics {
    fn default() -> Self {
        Heuristics::all()
    }
}

impl Heuristics {
    pub fn all() -> Self {
        Heuristics { enabled: [true; 5] }
    }

    /// Raw lookup: no filters, no scoring terms, ties by place_id.
    pub fn none() -> Self {
        Heuristics {
            enabled: [false; 5],
        }
    }

    pub fn only(h: Heuristic) -> Self {
        Heuristics::none().with(h)
    }

    pub fn with(mut self, h: Heuristic) -> Self {
        self.enabled[h as usize] = true;
        self
    }

    pub fn without(mut self, h: Heuristic) -> Self {
        self.enabled[h as usize] = false;
        self
    }

    pub fn is_enabled(&self, h: Heuristic) -> bool {
        self.enabled[h as usize]
    }

    /// `none`, `all`, or the enabled names joined by `+`.
    pub fn label(&self) -> String {
        match self.enabled.iter().filter(|&&e| e).count() {
            0 => "none".into(),
            5 => "all".into(),
            _ => Heuristic::ALL
                .into_iter()
                .filter(|&h| self.is_enabled(h))
                .map(Heuristic::name)
                .collect::<Vec<_>>()
                .join("+"),
        }
    }

    /// The rows of a one-heuristic-at-a-time ablation: none, each alone, all.
    pub fn ablation_rows() -> Vec<Heuristics> {
        let mut rows = vec![Heuristics::none()];
        rows.extend(Heuristic::ALL.into_iter().map(Heuristics::only));
        rows.push(Heuristics::all());
        rows
    }
}

#[derive(Debug, Clone)]
pub struct TaggerConfig {
    pub params: ScoringParams<f64>,
    pub heuristics: Heuristics,
    pub mode: Mode,
    pub scan: ScanOptions,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            params: ScoringParams::default(),
            heuristics: Heuristics::all(),
            mode: Mode::Scored,
            scan: ScanOptions::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TagError {
    #[error("document {doc_id}: invalid language {lang:?}")]
    InvalidLang { doc_id: String, lang: String },
}

/// Tags documents against a gazetteer and optional filter resources.
#[derive(Debug, Clone)]
pub struct Tagger<'a> {
    index: &'a GazetteerIndex,
    rules: Option<&'a RuleSet>,
    persons: Option<&'a PersonLexicon>,
    stoplist: Option<&'a StopList>,
    config: TaggerConfig,
}

impl<'a> Tagger<'a> {
    pub fn new(index: &'a GazetteerIndex, config: TaggerConfig) -> Self {
        Tagger {
            index,
            rules: None,
            persons: None,
            stoplist: None,
            config,
        }
    }

    pub fn with_rules(mut self, rules: &'a RuleSet) -> Self {
        self.rules = Some(rules);
        self
    }

    pub fn with_persons(mut self, persons: &'a PersonLexicon) -> Self {
        self.persons = Some(persons);
        self
    }

    pub fn with_stoplist(mut self, stoplist: &'a StopList) -> Self {
        self.stoplist = Some(stoplist);
        self
    }

    pub fn config(&self) -> &TaggerConfig {
        &self.config
    }

    pub fn with_heuristics(mut self, heuristics: Heuristics) -> Self {
        self.config.heuristics = heuristics;
        self
    }

    /// Scoring parameters with disabled heuristics zeroed out.
    pub fn effective_params(&self) -> ScoringParams<f64> {
        let h = self.config.heuristics;
        let mut params = self.config.params.clone();
        if !h.is_enabled(Heuristic::ClassImportance) {
            params.class_weights = [0.0; 7];
        }
        if !h.is_enabled(Heuristic::GeoContext) {
            params.context_bonus = 0.0;
        }
        if !h.is_enabled(Heuristic::KmDistance) {
            params.km_coefficient = 0.0;
        }
        params
    }

    pub fn tag(&self, doc: &DocumentRecord) -> Result<TaggedRecord, TagError> {
        let lang = LangScope::parse(&doc.lang).ok_or_else(|| TagError::InvalidLang {
            doc_id: doc.id.clone(),
            lang: doc.lang.clone(),
        })?;
        let h = self.config.heuristics;
        let empty_rules = RuleSet::empty();
        let rules = self.rules.unwrap_or(&empty_rules);

        let tokens = tokenize(&doc.text);
        let mut mentions = scan_tokens(
            &doc.text,
            &tokens,
            lang,
            self.index,
            rules,
            self.config.scan,
        );
        if h.is_enabled(Heuristic::PersonFilter) {
            if let Some(persons) = self.persons {
                let matched = match_persons(&doc.text, &tokens, persons);
                mentions = filter_persons(mentions, &matched);
            }
        }
        if h.is_enabled(Heuristic::StopList) {
            if let Some(stoplist) = self.stoplist {
                mentions = filter_stopwords(mentions, stoplist, lang);
            }
        }

        let mut shallow_starts = HashSet::new();
        let context = if h.is_enabled(Heuristic::GeoContext) {
            let mut shallow = std::collections::BTreeSet::new();
            for m in &mentions {
                if let Some(country) = shallow_country(m, self.index) {
                    shallow.insert(country);
                    shallow_starts.insert(m.start);
                }
            }
            assemble_context(doc.source_country.as_deref(), &shallow)
        } else {
            GeoContext::empty()
        };

        let opts = ResolveOptions {
            mode: self.config.mode,
            class_tie_break: h.is_enabled(Heuristic::ClassImportance),
        };
        let resolved = resolve(
            &mentions,
            self.index,
            &context,
            &self.effective_params(),
            opts,
        );
        let mentions = resolved
            .into_iter()
            .map(|r| TaggedMention {
                method: if shallow_starts.contains(&r.start) {
                    Method::Shallow
                } else {
                    Method::Deep
                },
                start: r.start,
                end: r.end,
                surface: r.surface,
                place_id: r.place_id,
                country: r.country,
                lat: r.lat,
                lon: r.lon,
                class: r.class.get(),
                score: r.score,
                decided_by: r.decided_by,
            })
            .collect();
        Ok(TaggedRecord {
            doc: doc.clone(),
            mentions,
        })
    }

    /// Tags documents in parallel; results keep input order.
    pub fn tag_all(&self, docs: &[DocumentRecord]) -> Vec<Result<TaggedRecord, TagError>> {
        docs.par_iter().map(|d| self.tag(d)).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct JsonlError {
    pub line: usize,
    pub message: String,
}

/// Parses one JSON value per non-blank line; fails on the first bad line.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, JsonlError> {
    let (rows, mut errors) = parse_jsonl_lenient(text);
    if errors.is_empty() {
        Ok(rows)
    } else {
        Err(errors.swap_remove(0))
    }
}

/// Parses what it can, collecting an error per bad line.
pub fn parse_jsonl_lenient<T: DeserializeOwned>(text: &str) -> (Vec<T>, Vec<JsonlError>) {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => rows.push(v),
            Err(e) => errors.push(JsonlError {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    (rows, errors)
}

/// Serializes one value per line, each line newline-terminated.
pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("records serialize"));
        out.push('\n');
    }
    out
}
