//! Precision / recall / F-measure of tagged mentions against gold
//! annotations, with per-language breakdown and heuristic ablation.
//!
//! A prediction is correct when its span overlaps a gold span that names
//! the same place (or, in country mode, the same country). Each gold span
//! credits at most one prediction; credits are assigned by maximum
//! bipartite matching so the count does not depend on input order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disambig::{haversine_km, LatLon};
use crate::gazetteer::{CountryCode, GazetteerIndex, PlaceId};
use crate::pipeline::{DocumentRecord, Heuristics, TagError, TaggedRecord, Tagger};
use crate::scalar::Scalar;

/// Gold entries without a place_id match a predicted place of the right
/// country within this distance of the gold coordinates.
pub const COORD_MATCH_RADIUS_KM: f64 = 25.0;

const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("prediction for document {0:?} which is not in the gold corpus")]
    UnknownDocument(String),
    #[error("gold record {index} ({doc_id}): {message}")]
    BadGold {
        index: usize,
        doc_id: String,
        message: String,
    },
    #[error("overlapping gold spans in document {doc_id} at {first:?} and {second:?}")]
    OverlappingGold {
        doc_id: String,
        first: (usize, usize),
        second: (usize, usize),
    },
    #[error(transparent)]
    Tag(#[from] TagError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    #[default]
    Place,
    Country,
}

/// One line of gold.jsonl. A record without `start`/`end` only declares a
/// document (so documents with no places still count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub place_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub country: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldAnnotation {
    pub start: usize,
    pub end: usize,
    pub place_id: Option<PlaceId>,
    pub country: Option<CountryCode>,
    pub coords: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldDocument {
    pub lang: Option<String>,
    /// Sorted by start, non-overlapping.
    pub spans: Vec<GoldAnnotation>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldCorpus {
    pub docs: BTreeMap<String, GoldDocument>,
}

impl GoldCorpus {
    /// Validates gold records. With an index, missing countries and
    /// coordinates are filled in from the place_id.
    pub fn from_records(
        records: &[GoldRecord],
        index: Option<&GazetteerIndex>,
    ) -> Result<Self, EvalError> {
        let mut corpus = GoldCorpus::default();
        for (i, rec) in records.iter().enumerate() {
            let bad = |message: &str| EvalError::BadGold {
                index: i + 1,
                doc_id: rec.doc_id.clone(),
                message: message.to_string(),
            };
            let doc = corpus.docs.entry(rec.doc_id.clone()).or_default();
            if let Some(lang) = &rec.lang {
                doc.lang.get_or_insert_with(|| lang.clone());
            }
            let (start, end) = match (rec.start, rec.end) {
                (None, None) => continue,
                (Some(s), Some(e)) if s < e => (s, e),
                (Some(_), Some(_)) => return Err(bad("start must be < end")),
                _ => return Err(bad("start and end must appear together")),
            };
            let place_id = rec.place_id.as_deref().map(PlaceId::from);
            let mut country = match &rec.country {
                Some(c) => Some(CountryCode::parse(c).ok_or_else(|| bad("invalid country code"))?),
                None => None,
            };
            let mut coords = match (rec.lat, rec.lon) {
                (Some(lat), Some(lon)) => Some((lat, lon)),
                (None, None) => None,
                _ => return Err(bad("lat and lon must appear together")),
            };
            if let (Some(id), Some(index)) = (&place_id, index) {
                if let Some(place) = index.place(id) {
                    country.get_or_insert(place.country);
                    coords.get_or_insert((place.lat, place.lon));
                }
            }
            if place_id.is_none() && country.is_none() {
                return Err(bad("annotation needs a place_id or a country"));
            }
            doc.spans.push(GoldAnnotation {
                start,
                end,
                place_id,
                country,
                coords,
            });
        }
        for (doc_id, doc) in &mut corpus.docs {
            doc.spans.sort_by_key(|a| (a.start, a.end));
            if let Some(w) = doc.spans.windows(2).find(|w| w[1].start < w[0].end) {
                return Err(EvalError::OverlappingGold {
                    doc_id: doc_id.clone(),
                    first: (w[0].start, w[0].end),
                    second: (w[1].start, w[1].end),
                });
            }
        }
        Ok(corpus)
    }

    pub fn annotation_count(&self) -> usize {
        self.docs.values().map(|d| d.spans.len()).sum()
    }

    /// Reads annotations back as predictions, e.g. to score a second
    /// annotator. Every annotation needs a place_id and a country.
    pub fn to_predictions(&self) -> Result<Vec<Prediction>, EvalError> {
        let mut out = Vec::new();
        for (doc_id, doc) in &self.docs {
            for (i, a) in doc.spans.iter().enumerate() {
                let (Some(place_id), Some(country)) = (&a.place_id, a.country) else {
                    return Err(EvalError::BadGold {
                        index: i + 1,
                        doc_id: doc_id.clone(),
                        message: "prediction needs a place_id and a country".into(),
                    });
                };
                let (lat, lon) = a.coords.unwrap_or((0.0, 0.0));
                out.push(Prediction {
                    doc_id: doc_id.clone(),
                    lang: doc.lang.clone().unwrap_or_else(|| "unknown".into()),
                    start: a.start,
                    end: a.end,
                    place_id: place_id.clone(),
                    country,
                    lat,
                    lon,
                });
            }
        }
        Ok(out)
    }
}

/// A predicted place mention.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub doc_id: String,
    pub lang: String,
    pub start: usize,
    pub end: usize,
    pub place_id: PlaceId,
    pub country: CountryCode,
    pub lat: f64,
    pub lon: f64,
}

impl Prediction {
    pub fn from_tagged(records: &[TaggedRecord]) -> Vec<Prediction> {
        records
            .iter()
            .flat_map(|r| {
                r.mentions.iter().map(|m| Prediction {
                    doc_id: r.doc.id.clone(),
                    lang: r.doc.lang.clone(),
                    start: m.start,
                    end: m.end,
                    place_id: m.place_id.clone(),
                    country: m.country,
                    lat: m.lat,
                    lon: m.lon,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub true_positives: u64,
    pub predicted_total: u64,
    pub gold_total: u64,
}

impl std::ops::AddAssign for EvalCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.true_positives += rhs.true_positives;
        self.predicted_total += rhs.predicted_total;
        self.gold_total += rhs.gold_total;
    }
}

fn same_target(gold: &GoldAnnotation, pred: &Prediction, mode: MatchMode) -> bool {
    match mode {
        MatchMode::Country => gold.country == Some(pred.country),
        MatchMode::Place => match (&gold.place_id, gold.coords) {
            (Some(id), _) => *id == pred.place_id,
            (None, Some((lat, lon))) => {
                gold.country == Some(pred.country)
                    && haversine_km(
                        LatLon::new(lat, lon),
                        LatLon::new(pred.lat, pred.lon),
                        EARTH_RADIUS_KM,
                    ) <= COORD_MATCH_RADIUS_KM
            }
            (None, None) => gold.country == Some(pred.country),
        },
    }
}

/// Size of a maximum matching; `edges[p]` lists gold indices prediction `p`
/// may take.
fn max_matching(edges: &[Vec<usize>], gold_count: usize) -> u64 {
    fn augment(
        p: usize,
        edges: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &g in &edges[p] {
            if seen[g] {
                continue;
            }
            seen[g] = true;
            if owner[g].map_or(true, |q| augment(q, edges, seen, owner)) {
                owner[g] = Some(p);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; gold_count];
    let mut matched = 0;
    for p in 0..edges.len() {
        let mut seen = vec![false; gold_count];
        if augment(p, edges, &mut seen, &mut owner) {
            matched += 1;
        }
    }
    matched
}

fn count_document(gold: &GoldDocument, preds: &[&Prediction], mode: MatchMode) -> EvalCounts {
    let edges: Vec<Vec<usize>> = preds
        .iter()
        .map(|p| {
            gold.spans
                .iter()
                .enumerate()
                .filter(|(_, g)| g.start < p.end && p.start < g.end && same_target(g, p, mode))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    EvalCounts {
        true_positives: max_matching(&edges, gold.spans.len()),
        predicted_total: preds.len() as u64,
        gold_total: gold.spans.len() as u64,
    }
}

/// Per-document counts keyed by doc_id, with each document's language.
fn per_document(
    gold: &GoldCorpus,
    predicted: &[Prediction],
    mode: MatchMode,
) -> Result<Vec<(String, EvalCounts)>, EvalError> {
    let mut by_doc: BTreeMap<&str, Vec<&Prediction>> = BTreeMap::new();
    for p in predicted {
        if !gold.docs.contains_key(&p.doc_id) {
            return Err(EvalError::UnknownDocument(p.doc_id.clone()));
        }
        by_doc.entry(&p.doc_id).or_default().push(p);
    }
    Ok(gold
        .docs
        .iter()
        .map(|(doc_id, doc)| {
            let mut preds = by_doc.remove(doc_id.as_str()).unwrap_or_default();
            preds.sort_by(|a, b| (a.start, a.end, &a.place_id).cmp(&(b.start, b.end, &b.place_id)));
            let lang = doc
                .lang
                .clone()
                .or_else(|| preds.first().map(|p| p.lang.clone()))
                .unwrap_or_else(|| "unknown".into());
            (lang, count_document(doc, &preds, mode))
        })
        .collect())
}

pub fn compare(
    gold: &GoldCorpus,
    predicted: &[Prediction],
    mode: MatchMode,
) -> Result<EvalCounts, EvalError> {
    let mut total = EvalCounts::default();
    for (_, counts) in per_document(gold, predicted, mode)? {
        total += counts;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf<S> {
    pub precision: S,
    pub recall: S,
    pub f_measure: S,
}

/// Precision, recall and their harmonic mean. With nothing predicted,
/// precision is 1 if nothing was expected and 0 otherwise; with nothing
/// expected, recall is 1.
pub fn prf<S: Scalar>(counts: EvalCounts) -> Prf<S> {
    let tp = S::from_u64(counts.true_positives).expect("count fits scalar");
    let predicted = S::from_u64(counts.predicted_total).expect("count fits scalar");
    let gold = S::from_u64(counts.gold_total).expect("count fits scalar");
    let precision = if counts.predicted_total > 0 {
        tp / predicted
    } else if counts.gold_total == 0 {
        S::one()
    } else {
        S::zero()
    };
    let recall = if counts.gold_total > 0 {
        tp / gold
    } else {
        S::one()
    };
    let sum = precision + recall;
    let f_measure = if sum > S::zero() {
        S::lit(2.0) * precision * recall / sum
    } else {
        S::zero()
    };
    Prf {
        precision,
        recall,
        f_measure,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageRow {
    pub counts: EvalCounts,
    pub metrics: Prf<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub label: String,
    pub counts: EvalCounts,
    /// Micro-averaged over all mentions.
    pub metrics: Prf<f64>,
    pub per_language: BTreeMap<String, LanguageRow>,
    /// Unweighted mean of the per-language figures.
    pub macro_average: Prf<f64>,
}

pub fn evaluate(
    gold: &GoldCorpus,
    predicted: &[Prediction],
    mode: MatchMode,
    label: &str,
) -> Result<MetricsReport, EvalError> {
    let mut total = EvalCounts::default();
    let mut by_lang: BTreeMap<String, EvalCounts> = BTreeMap::new();
    for (lang, counts) in per_document(gold, predicted, mode)? {
        total += counts;
        *by_lang.entry(lang).or_default() += counts;
    }
    let per_language: BTreeMap<String, LanguageRow> = by_lang
        .into_iter()
        .map(|(lang, counts)| {
            (
                lang,
                LanguageRow {
                    counts,
                    metrics: prf(counts),
                },
            )
        })
        .collect();
    let n = per_language.len().max(1) as f64;
    let mean =
        |f: fn(&Prf<f64>) -> f64| per_language.values().map(|r| f(&r.metrics)).sum::<f64>() / n;
    let macro_average = if per_language.is_empty() {
        prf(EvalCounts::default())
    } else {
        Prf {
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f_measure: mean(|m| m.f_measure),
        }
    };
    Ok(MetricsReport {
        label: label.to_string(),
        counts: total,
        metrics: prf(total),
        per_language,
        macro_average,
    })
}

/// Tags the corpus once per heuristic configuration and evaluates each run.
pub fn ablation_run(
    docs: &[DocumentRecord],
    gold: &GoldCorpus,
    tagger: &Tagger<'_>,
    configs: &[Heuristics],
    mode: MatchMode,
) -> Result<Vec<MetricsReport>, EvalError> {
    configs
        .iter()
        .map(|&heuristics| {
            let run = tagger.clone().with_heuristics(heuristics);
            let tagged = run
                .tag_all(docs)
                .into_iter()
                .collect::<Result<Vec<_>, _>>()?;
            evaluate(
                gold,
                &Prediction::from_tagged(&tagged),
                mode,
                &heuristics.label(),
            )
        })
        .collect()
}

/// Tab-separated rows: label, scope (`all` or a language), counts, P, R, F.
pub fn reports_to_tsv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("label\tscope\ttp\tpredicted\tgold\tprecision\trecall\tf_measure\n");
    let mut row = |label: &str, scope: &str, c: &EvalCounts, m: &Prf<f64>| {
        let _ = writeln!(
            out,
            "{label}\t{scope}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            c.true_positives, c.predicted_total, c.gold_total, m.precision, m.recall, m.f_measure
        );
    };
    for r in reports {
        row(&r.label, "all", &r.counts, &r.metrics);
        for (lang, l) in &r.per_language {
            row(&r.label, lang, &l.counts, &l.metrics);
        }
    }
    out
}

/// Human-readable table in percent.
pub fn report_to_text(report: &MetricsReport) -> String {
    let pct = |x: f64| x * 100.0;
    let mut out = format!(
        "{}\n{:<10} {:>9} {:>9} {:>9}\n",
        report.label, "language", "precision", "recall", "F"
    );
    for (lang, row) in &report.per_language {
        let m = &row.metrics;
        let _ = writeln!(
            out,
            "{lang:<10} {:>9.1} {:>9.1} {:>9.1}",
            pct(m.precision),
            pct(m.recall),
            pct(m.f_measure)
        );
    }
    let m = &report.macro_average;
    let _ = writeln!(
        out,
        "{:<10} {:>9.1} {:>9.1} {:>9.1}",
        "macro",
        pct(m.precision),
        pct(m.recall),
        pct(m.f_measure)
    );
    let m = &report.metrics;
    let _ = writeln!(
        out,
        "{:<10} {:>9.1} {:>9.1} {:>9.1}",
        "micro",
        pct(m.precision),
        pct(m.recall),
        pct(m.f_measure)
    );
    out
}
