//! Document geo-context: the countries a text is about.
//!
//! The context is the union of the publishing country (when the document
//! metadata carries one) and the countries of names found by a shallow
//! pass that only trusts important, unambiguous names.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::gazetteer::{CountryCode, GazetteerIndex, PlaceClass};
use crate::textmatch::CandidateMention;

/// Highest class a name may have to take part in the shallow pass.
pub const SHALLOW_MAX_CLASS: PlaceClass = PlaceClass::clamped(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextSource {
    Metadata,
    Shallow,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeoContext {
    countries: BTreeMap<CountryCode, BTreeSet<ContextSource>>,
}

impl GeoContext {
    pub fn empty() -> Self {
        GeoContext::default()
    }

    pub fn insert(&mut self, country: CountryCode, source: ContextSource) {
        self.countries.entry(country).or_default().insert(source);
    }

    pub fn contains(&self, country: CountryCode) -> bool {
        self.countries.contains_key(&country)
    }

    pub fn countries(&self) -> impl Iterator<Item = CountryCode> + '_ {
        self.countries.keys().copied()
    }

    pub fn sources(&self, country: CountryCode) -> Option<&BTreeSet<ContextSource>> {
        self.countries.get(&country)
    }

    pub fn len(&self) -> usize {
        self.countries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.countries.is_empty()
    }
}

/// The country a mention vouches for in the shallow pass: every candidate
/// has class 0–2 and all candidates lie in one country.
pub fn shallow_country(mention: &CandidateMention, index: &GazetteerIndex) -> Option<CountryCode> {
    let mut country = None;
    for id in &mention.candidates {
        let place = index.place(id)?;
        if place.class > SHALLOW_MAX_CLASS {
            return None;
        }
        match country {
            None => country = Some(place.country),
            Some(c) if c != place.country => return None,
            Some(_) => {}
        }
    }
    country
}

pub fn shallow_parse(
    mentions: &[CandidateMention],
    index: &GazetteerIndex,
) -> BTreeSet<CountryCode> {
    mentions
        .iter()
        .filter_map(|m| shallow_country(m, index))
        .collect()
}

/// Unions the publishing country with the shallow-pass countries. A
/// malformed `source_country` is logged and ignored.
pub fn assemble_context(
    source_country: Option<&str>,
    shallow: &BTreeSet<CountryCode>,
) -> GeoContext {
    let mut context = GeoContext::empty();
    if let Some(raw) = source_country {
        match CountryCode::parse(raw) {
            Some(code) => context.insert(code, ContextSource::Metadata),
            None => log::warn!("ignoring malformed source_country {raw:?}"),
        }
    }
    for &country in shallow {
        context.insert(country, ContextSource::Shallow);
    }
    context
}
