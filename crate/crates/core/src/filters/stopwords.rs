use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use super::FilterError;
use crate::gazetteer::{normalize_name, GazetteerIndex, LangScope};
use crate::textmatch::{tokenize, CandidateMention};

/// Where a stop-list entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StopProvenance {
    Firstname,
    Corpus,
    Manual,
}

impl StopProvenance {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "firstname" => Some(StopProvenance::Firstname),
            "corpus" => Some(StopProvenance::Corpus),
            "manual" => Some(StopProvenance::Manual),
            _ => None,
        }
    }
}

impl fmt::Display for StopProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopProvenance::Firstname => "firstname",
            StopProvenance::Corpus => "corpus",
            StopProvenance::Manual => "manual",
        })
    }
}

/// Gazetteer names that are never recognized as places, per language.
#[derive(Debug, Clone, Default)]
pub struct StopList {
    entries: HashMap<String, Vec<(LangScope, StopProvenance)>>,
}

impl StopList {
    /// Adds `name` for `lang`. Returns false if the (name, lang) pair was
    /// already present; the first provenance is kept.
    pub fn insert(&mut self, name: &str, lang: LangScope, provenance: StopProvenance) -> bool {
        let Some(key) = normalize_name(name) else {
            return false;
        };
        let langs = self.entries.entry(key).or_default();
        if langs.iter().any(|(l, _)| *l == lang) {
            return false;
        }
        langs.push((lang, provenance));
        true
    }

    /// Adds every accepted proposal; unaccepted ones are ignored.
    pub fn extend_accepted<'a>(&mut self, proposals: impl IntoIterator<Item = &'a StopProposal>) {
        for p in proposals.into_iter().filter(|p| p.accepted) {
            self.insert(&p.name, p.lang, p.provenance());
        }
    }

    /// Whether `key` is stopped for `lang`. An entry scoped to all languages
    /// matches any query; a query for all languages matches any entry.
    pub fn contains(&self, key: &str, lang: LangScope) -> bool {
        self.entries
            .get(key)
            .is_some_and(|langs| langs.iter().any(|(l, _)| l.visible_to(lang)))
    }

    pub fn provenance(&self, key: &str, lang: LangScope) -> Option<StopProvenance> {
        self.entries
            .get(key)?
            .iter()
            .find(|(l, _)| l.visible_to(lang))
            .map(|(_, p)| *p)
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `name \t lang \t provenance` rows. Rows written by the
    /// proposal builders carry two extra columns, `evidence` and
    /// `accepted`; those enter the list only when `accepted` is `true`.
    pub fn parse(text: &str) -> Result<Self, FilterError> {
        let mut list = StopList::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let bad = |message: String| FilterError::StopList {
                line: line_no,
                message,
            };
            if fields.len() != 3 && fields.len() != 5 {
                return Err(bad(format!(
                    "expected 3 or 5 columns, found {}",
                    fields.len()
                )));
            }
            let lang = LangScope::parse(fields[1])
                .ok_or_else(|| bad(format!("invalid language {:?}", fields[1])))?;
            let provenance = StopProvenance::parse(fields[2])
                .ok_or_else(|| bad(format!("unknown provenance {:?}", fields[2])))?;
            if fields.len() == 5 {
                let accepted: bool = fields[4].parse().map_err(|_| {
                    bad(format!(
                        "accepted must be true or false, got {:?}",
                        fields[4]
                    ))
                })?;
                if !accepted {
                    continue;
                }
            }
            if normalize_name(fields[0]).is_none() {
                return Err(bad("empty name".into()));
            }
            list.insert(fields[0], lang, provenance);
        }
        Ok(list)
    }

    pub fn load(path: &Path) -> Result<Self, FilterError> {
        let text = std::fs::read_to_string(path).map_err(|source| FilterError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        StopList::parse(&text)
    }
}

/// Drops mentions whose lookup key is a stop word for `lang`.
pub fn filter_stopwords(
    mentions: Vec<CandidateMention>,
    stoplist: &StopList,
    lang: LangScope,
) -> Vec<CandidateMention> {
    mentions
        .into_iter()
        .filter(|m| !stoplist.contains(&m.lookup_key, lang))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopEvidence {
    Corpus {
        count: u64,
        total_tokens: u64,
        per_million: f64,
    },
    Firstname {
        source: String,
    },
}

impl fmt::Display for StopEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopEvidence::Corpus {
                count,
                total_tokens,
                per_million,
            } => write!(
                f,
                "per_million={per_million:.3};count={count};tokens={total_tokens}"
            ),
            StopEvidence::Firstname { source } => write!(f, "firstnames={source}"),
        }
    }
}

/// A candidate geo-stop word. It has no effect until `accepted` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct StopProposal {
    /// Gazetteer spelling of the name.
    pub name: String,
    pub lang: LangScope,
    pub evidence: StopEvidence,
    pub accepted: bool,
}

impl StopProposal {
    pub fn provenance(&self) -> StopProvenance {
        match self.evidence {
            StopEvidence::Corpus { .. } => StopProvenance::Corpus,
            StopEvidence::Firstname { .. } => StopProvenance::Firstname,
        }
    }
}

/// Renders proposals in the five-column stop-list format.
pub fn write_proposals(proposals: &[StopProposal]) -> String {
    let mut out = String::from("# name\tlang\tprovenance\tevidence\taccepted\n");
    for p in proposals {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            p.name,
            p.lang,
            p.provenance(),
            p.evidence,
            p.accepted
        ));
    }
    out
}

/// Lowercase word frequencies of a corpus.
#[derive(Debug, Clone, Default)]
pub struct CorpusCounts {
    pub total_tokens: u64,
    /// Normalized word → number of occurrences written without any capital.
    pub lowercase: HashMap<String, u64>,
}

impl CorpusCounts {
    pub fn from_text(text: &str) -> Self {
        let mut counts = CorpusCounts::default();
        for token in tokenize(text) {
            counts.total_tokens += 1;
            if token.surface.chars().any(char::is_uppercase) {
                continue;
            }
            if let Some(key) = normalize_name(&token.surface) {
                *counts.lowercase.entry(key).or_default() += 1;
            }
        }
        counts
    }

    /// `count` scaled to occurrences per million tokens.
    pub fn per_million(&self, count: u64) -> f64 {
        count as f64 * 1e6 / self.total_tokens as f64
    }
}

/// Proposes every gazetteer name whose lowercase relative frequency is at
/// least `threshold_per_million`. Sorted by frequency, most frequent first.
pub fn propose_from_counts(
    counts: &CorpusCounts,
    index: &GazetteerIndex,
    lang: LangScope,
    threshold_per_million: f64,
) -> Result<Vec<StopProposal>, FilterError> {
    if !(threshold_per_million > 0.0 && threshold_per_million.is_finite()) {
        return Err(FilterError::InvalidThreshold(threshold_per_million));
    }
    if counts.total_tokens == 0 {
        return Err(FilterError::EmptyCorpus);
    }
    // count / N >= t / 1e6, compared without dividing.
    let required = threshold_per_million * counts.total_tokens as f64;
    let mut hits: Vec<(&String, u64)> = counts
        .lowercase
        .iter()
        .filter(|&(word, &count)| count as f64 * 1e6 >= required && index.contains_key(word))
        .map(|(w, &c)| (w, c))
        .collect();
    hits.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(hits
        .into_iter()
        .map(|(word, count)| StopProposal {
            name: index
                .forms(word)
                .first()
                .map_or_else(|| word.clone(), |f| f.to_string()),
            lang,
            evidence: StopEvidence::Corpus {
                count,
                total_tokens: counts.total_tokens,
                per_million: counts.per_million(count),
            },
            accepted: false,
        })
        .collect())
}

pub fn build_stoplist_from_corpus(
    corpus: &Path,
    index: &GazetteerIndex,
    lang: LangScope,
    threshold_per_million: f64,
) -> Result<Vec<StopProposal>, FilterError> {
    let text = std::fs::read_to_string(corpus).map_err(|source| FilterError::Io {
        path: corpus.to_path_buf(),
        source,
    })?;
    propose_from_counts(
        &CorpusCounts::from_text(&text),
        index,
        lang,
        threshold_per_million,
    )
}

/// Proposes every first name that is also a gazetteer key, for all languages.
pub fn build_stoplist_from_firstnames<'a>(
    firstnames: impl IntoIterator<Item = &'a str>,
    index: &GazetteerIndex,
    source: &str,
) -> Vec<StopProposal> {
    let mut seen = std::collections::HashSet::new();
    firstnames
        .into_iter()
        .filter_map(|name| {
            let key = normalize_name(name)?;
            (index.contains_key(&key) && seen.insert(key)).then(|| StopProposal {
                name: name.trim().to_string(),
                lang: LangScope::Any,
                evidence: StopEvidence::Firstname {
                    source: source.to_string(),
                },
                accepted: false,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gazetteer::{parse_places, PlaceId};
    use crate::textmatch::MatchedVia;

    fn gazetteer() -> GazetteerIndex {
        let places = parse_places(
            "IR-AND\tAnd\tIR\t27.0\t56.0\t5\tgd\n\
             GH-TO\tTo\tGH\t7.0\t-1.0\t5\tgd\n\
             FR-DIE\tDie\tFR\t44.75\t5.37\t4\tgd\n\
             FR-PAR\tParis\tFR\t48.8566\t2.3522\t1\tgd\n\
             ES-JAV\tJavier\tES\t42.59\t-1.21\t5\tgd\n",
        );
        GazetteerIndex::build(places.rows, Vec::new()).unwrap().0
    }

    fn lang(s: &str) -> LangScope {
        LangScope::parse(s).unwrap()
    }

    fn mention(surface: &str) -> CandidateMention {
        CandidateMention {
            start: 0,
            end: surface.len(),
            surface: surface.into(),
            lookup_key: normalize_name(surface).unwrap(),
            candidates: vec![PlaceId::from(surface)],
            matched_via: MatchedVia::Direct,
        }
    }

    #[test]
    fn stop_words_are_language_scoped() {
        let mut list = StopList::default();
        list.insert("and", lang("en"), StopProvenance::Manual);
        list.insert("die", lang("de"), StopProvenance::Manual);
        let kept = filter_stopwords(vec![mention("And"), mention("Paris")], &list, lang("en"));
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].surface, "Paris");
        assert!(filter_stopwords(vec![mention("Die")], &list, lang("de")).is_empty());

        let mut french_only = StopList::default();
        french_only.insert("die", lang("fr"), StopProvenance::Manual);
        assert_eq!(
            filter_stopwords(vec![mention("Die")], &french_only, lang("de")).len(),
            1
        );

        let mut global = StopList::default();
        global.insert("die", LangScope::Any, StopProvenance::Manual);
        assert!(filter_stopwords(vec![mention("Die")], &global, lang("de")).is_empty());
    }

    #[test]
    fn entries_unique_per_name_and_lang() {
        let mut list = StopList::default();
        assert!(list.insert("And", lang("en"), StopProvenance::Corpus));
        assert!(!list.insert("and", lang("en"), StopProvenance::Manual));
        assert!(list.insert("and", lang("fr"), StopProvenance::Manual));
        assert_eq!(list.len(), 2);
        assert_eq!(
            list.provenance("and", lang("en")),
            Some(StopProvenance::Corpus)
        );
    }

    #[test]
    fn parse_skips_unaccepted_proposals() {
        let list = StopList::parse(
            "# name\tlang\tprovenance\n\
             and\ten\tmanual\n\
             To\ten\tcorpus\tper_million=1.0\tfalse\n\
             Die\tde\tcorpus\tper_million=1.0\ttrue\n",
        )
        .unwrap();
        assert!(list.contains("and", lang("en")));
        assert!(!list.contains("to", lang("en")));
        assert!(list.contains("die", lang("de")));
        assert!(matches!(
            StopList::parse("and\ten\n"),
            Err(FilterError::StopList { line: 1, .. })
        ));
    }

    #[test]
    fn unaccepted_proposals_never_enter_the_list() {
        let proposals = build_stoplist_from_firstnames(["Javier"], &gazetteer(), "test");
        let mut list = StopList::default();
        list.extend_accepted(&proposals);
        assert!(list.is_empty());
        let accepted: Vec<StopProposal> = proposals
            .into_iter()
            .map(|p| StopProposal {
                accepted: true,
                ..p
            })
            .collect();
        list.extend_accepted(&accepted);
        assert!(list.contains("javier", lang("es")));
    }

    #[test]
    fn corpus_proposals_use_gazetteer_spelling() {
        let corpus = "and the cat and the dog went to the town and back to bed";
        let counts = CorpusCounts::from_text(corpus);
        assert_eq!(counts.total_tokens, 14);
        let proposals = propose_from_counts(&counts, &gazetteer(), lang("en"), 5.0).unwrap();
        let names: Vec<&str> = proposals.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, vec!["And", "To"]);
        assert!(proposals.iter().all(|p| !p.accepted));
    }

    #[test]
    fn capitalized_occurrences_do_not_count() {
        let counts = CorpusCounts::from_text("Paris and Paris and Paris");
        assert_eq!(counts.lowercase.get("paris"), None);
        assert_eq!(counts.lowercase.get("and"), Some(&2));
        let none = CorpusCounts::from_text("The Cat Sat");
        assert!(propose_from_counts(&none, &gazetteer(), lang("en"), 5.0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn threshold_boundary_counting_oracle() {
        // 10 occurrences in 1,000,000 tokens is exactly 10 per million; in
        // 1,010,101 tokens it is 9.8999... per million.
        let at = CorpusCounts {
            total_tokens: 1_000_000,
            lowercase: [("and".to_string(), 10)].into(),
        };
        let below = CorpusCounts {
            total_tokens: 1_010_101,
            ..at.clone()
        };
        let at_99 = CorpusCounts {
            total_tokens: 10_000_000,
            lowercase: [("and".to_string(), 99)].into(),
        };
        let g = gazetteer();
        assert_eq!(
            propose_from_counts(&at, &g, lang("en"), 10.0)
                .unwrap()
                .len(),
            1
        );
        assert!(propose_from_counts(&below, &g, lang("en"), 10.0)
            .unwrap()
            .is_empty());
        assert!(propose_from_counts(&at_99, &g, lang("en"), 10.0)
            .unwrap()
            .is_empty());
        assert_eq!(
            propose_from_counts(&at_99, &g, lang("en"), 9.9)
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn builder_errors() {
        let g = gazetteer();
        assert!(matches!(
            propose_from_counts(&CorpusCounts::default(), &g, lang("en"), 5.0),
            Err(FilterError::EmptyCorpus)
        ));
        let counts = CorpusCounts::from_text("and");
        assert!(matches!(
            propose_from_counts(&counts, &g, lang("en"), 0.0),
            Err(FilterError::InvalidThreshold(_))
        ));
    }

    #[test]
    fn firstname_proposals() {
        let g = gazetteer();
        let p =
            build_stoplist_from_firstnames(["Javier", "Maria", "Xqzw", "javier"], &g, "names.txt");
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].name, "Javier");
        assert_eq!(p[0].provenance(), StopProvenance::Firstname);
        assert!(build_stoplist_from_firstnames([], &g, "none").is_empty());
    }

    #[test]
    fn proposal_file_round_trips_through_the_loader() {
        let g = gazetteer();
        let mut proposals = build_stoplist_from_firstnames(["Javier"], &g, "names.txt");
        let counts = CorpusCounts::from_text("and and to");
        proposals.extend(propose_from_counts(&counts, &g, lang("en"), 1.0).unwrap());
        assert!(StopList::parse(&write_proposals(&proposals))
            .unwrap()
            .is_empty());
        for p in &mut proposals {
            p.accepted = true;
        }
        let list = StopList::parse(&write_proposals(&proposals)).unwrap();
        assert_eq!(list.len(), 3);
    }
}
