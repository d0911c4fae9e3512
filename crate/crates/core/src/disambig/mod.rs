//! Toponym disambiguation.
//!
//! Each candidate place of a mention is scored as
//!
//! ```text
//! score = class_weight[class]
//!       + context_bonus            if the place's country is in the document context
//!       + km_coefficient · km_weight(min distance to an unambiguous place)
//! ```
//!
//! and the highest score wins. Ties go to the more important class, then to
//! the lexicographically smaller place_id.

mod distance;
mod params;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::context::GeoContext;
use crate::gazetteer::{CountryCode, GazetteerIndex, PlaceClass, PlaceEntry, PlaceId};
use crate::scalar::Scalar;
use crate::textmatch::{CandidateMention, MatchedVia};

pub use distance::{arccot, haversine_km, km_weight, LatLon};
pub use params::{ParamsError, ScoringParams, PARAM_KEYS};

/// Classes from here on count as small places for [`Mode::Strict`].
pub const SMALL_PLACE_CLASS: u8 = 3;

/// Coordinates of every unambiguous mention of a document.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet<S> {
    points: Vec<LatLon<S>>,
}

impl<S: Scalar> AnchorSet<S> {
    pub fn new(points: Vec<LatLon<S>>) -> Self {
        AnchorSet { points }
    }

    pub fn empty() -> Self {
        AnchorSet { points: Vec::new() }
    }

    /// Anchors are the mentions with exactly one candidate, whatever its class.
    pub fn from_mentions(mentions: &[CandidateMention], index: &GazetteerIndex) -> Self {
        let points = mentions
            .iter()
            .filter(|m| m.candidates.len() == 1)
            .filter_map(|m| index.place(&m.candidates[0]))
            .map(|p| LatLon::from_f64(p.lat, p.lon))
            .collect();
        AnchorSet { points }
    }

    pub fn points(&self) -> &[LatLon<S>] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest distance from `p` to any anchor, `None` without anchors.
    pub fn min_distance_km(&self, p: LatLon<S>, radius_km: S) -> Option<S> {
        self.points
            .iter()
            .map(|&a| haversine_km(p, a, radius_km))
            .reduce(S::min)
    }
}

/// Score breakdown of one candidate place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore<S> {
    pub place_id: PlaceId,
    pub class: PlaceClass,
    pub country: CountryCode,
    pub class_term: S,
    pub context_term: S,
    pub km_term: S,
    /// Distance used for the km term, when there were anchors.
    pub min_distance_km: Option<S>,
}

impl<S: Scalar> CandidateScore<S> {
    pub fn total(&self) -> S {
        self.class_term + self.context_term + self.km_term
    }
}

pub fn score_candidate<S: Scalar>(
    place: &PlaceEntry,
    context: &GeoContext,
    anchors: &AnchorSet<S>,
    params: &ScoringParams<S>,
) -> CandidateScore<S> {
    let context_term = if context.contains(place.country) {
        params.context_bonus
    } else {
        S::zero()
    };
    let min_distance_km = anchors.min_distance_km(
        LatLon::from_f64(place.lat, place.lon),
        params.earth_radius_km,
    );
    let km_term = min_distance_km
        .map(|d| params.km_coefficient * km_weight(d, params))
        .unwrap_or_else(S::zero);
    CandidateScore {
        place_id: place.place_id.clone(),
        class: place.class,
        country: place.country,
        class_term: params.class_weight(place.class),
        context_term,
        km_term,
        min_distance_km,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Every mention resolves to its best candidate.
    #[default]
    Scored,
    /// As scored, then small places (class ≥ 3) outside the context are dropped.
    Strict,
}

/// What separated the winner from the runner-up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Unambiguous,
    Score,
    ClassTieBreak,
    PlaceIdTieBreak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolveOptions {
    pub mode: Mode,
    /// Break score ties by class before place_id. Ablation runs without
    /// class importance turn this off as well.
    pub class_tie_break: bool,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions {
            mode: Mode::Scored,
            class_tie_break: true,
        }
    }
}

/// A mention collapsed to a single place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedMention<S> {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub lookup_key: String,
    pub matched_via: MatchedVia,
    pub place_id: PlaceId,
    pub country: CountryCode,
    pub class: PlaceClass,
    pub lat: f64,
    pub lon: f64,
    pub score: S,
    pub decided_by: Decision,
    /// One entry per candidate, best first.
    pub trace: Vec<CandidateScore<S>>,
}

impl<S: Scalar> ResolvedMention<S> {
    pub fn winner(&self) -> &CandidateScore<S> {
        &self.trace[0]
    }
}

fn rank<S: Scalar>(
    a: &CandidateScore<S>,
    b: &CandidateScore<S>,
    class_tie_break: bool,
) -> Ordering {
    b.total()
        .partial_cmp(&a.total())
        .unwrap_or(Ordering::Equal)
        .then_with(|| {
            if class_tie_break {
                a.class.cmp(&b.class)
            } else {
                Ordering::Equal
            }
        })
        .then_with(|| a.place_id.cmp(&b.place_id))
}

/// Resolves every mention against anchors taken from the unambiguous
/// mentions in `mentions`.
pub fn resolve<S: Scalar>(
    mentions: &[CandidateMention],
    index: &GazetteerIndex,
    context: &GeoContext,
    params: &ScoringParams<S>,
    opts: ResolveOptions,
) -> Vec<ResolvedMention<S>> {
    let anchors = AnchorSet::from_mentions(mentions, index);
    resolve_with_anchors(mentions, index, context, &anchors, params, opts)
}

pub fn resolve_with_anchors<S: Scalar>(
    mentions: &[CandidateMention],
    index: &GazetteerIndex,
    context: &GeoContext,
    anchors: &AnchorSet<S>,
    params: &ScoringParams<S>,
    opts: ResolveOptions,
) -> Vec<ResolvedMention<S>> {
    mentions
        .iter()
        .filter_map(|m| resolve_one(m, index, context, anchors, params, opts))
        .collect()
}

fn resolve_one<S: Scalar>(
    mention: &CandidateMention,
    index: &GazetteerIndex,
    context: &GeoContext,
    anchors: &AnchorSet<S>,
    params: &ScoringParams<S>,
    opts: ResolveOptions,
) -> Option<ResolvedMention<S>> {
    let mut trace: Vec<CandidateScore<S>> = mention
        .candidates
        .iter()
        .filter_map(|id| index.place(id))
        .map(|place| score_candidate(place, context, anchors, params))
        .collect();
    trace.sort_by(|a, b| rank(a, b, opts.class_tie_break));
    let decided_by = match trace.as_slice() {
        [] => return None,
        [_] => Decision::Unambiguous,
        [best, second, ..] => {
            if best.total() != second.total() {
                Decision::Score
            } else if opts.class_tie_break && best.class != second.class {
                Decision::ClassTieBreak
            } else {
                Decision::PlaceIdTieBreak
            }
        }
    };
    let winner = &trace[0];
    if opts.mode == Mode::Strict
        && winner.class.get() >= SMALL_PLACE_CLASS
        && !context.contains(winner.country)
    {
        return None;
    }
    let place = index.place(&winner.place_id)?;
    Some(ResolvedMention {
        start: mention.start,
        end: mention.end,
        surface: mention.surface.clone(),
        lookup_key: mention.lookup_key.clone(),
        matched_via: mention.matched_via.clone(),
        place_id: place.place_id.clone(),
        country: place.country,
        class: place.class,
        lat: place.lat,
        lon: place.lon,
        score: winner.total(),
        decided_by,
        trace,
    })
}
