use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    normalize_name, GazetteerError, LangScope, NameVariant, PlaceEntry, PlaceId, VariantKind,
};

/// One (place, language, original form) entry behind a normalized key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub(crate) struct Posting {
    pub place: u32,
    pub lang: LangScope,
    pub form: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMetadata {
    pub place_count: usize,
    /// Number of distinct (key, place, language) bindings, canonical names included.
    pub variant_count: usize,
    pub key_count: usize,
    /// Hex SHA-256 of the serialized index payload.
    pub checksum: String,
}

/// Serialized form of the index; field order and sorting are canonical so
/// equal inputs always hash the same.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct IndexPayload {
    pub places: Vec<PlaceEntry>,
    pub forms: Vec<String>,
    pub keys: Vec<(String, Vec<Posting>)>,
}

impl IndexPayload {
    pub fn encode(&self) -> Vec<u8> {
        bincode::serialize(self).expect("in-memory serialization cannot fail")
    }
}

pub(crate) fn checksum_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Name variants that could not be attached to a place.
#[derive(Debug, Clone, Default)]
pub struct BuildReport {
    pub dangling: Vec<NameVariant>,
}

/// Immutable normalized-name → places index.
#[derive(Debug, Clone)]
pub struct GazetteerIndex {
    places: Vec<PlaceEntry>,
    by_id: HashMap<PlaceId, u32>,
    forms: Vec<String>,
    keys: HashMap<String, Vec<Posting>>,
    metadata: IndexMetadata,
}

impl GazetteerIndex {
    /// Merges places and variants into an index.
    ///
    /// Every place's canonical name is added as a `canonical` variant visible
    /// to all languages. Variants pointing at unknown places are returned in
    /// the [`BuildReport`]; a place_id occurring twice is fatal.
    pub fn build(
        mut places: Vec<PlaceEntry>,
        mut variants: Vec<NameVariant>,
    ) -> Result<(Self, BuildReport), GazetteerError> {
        places.sort_by(|a, b| {
            (&a.place_id, &a.source, &a.canonical_name).cmp(&(
                &b.place_id,
                &b.source,
                &b.canonical_name,
            ))
        });
        if let Some(pair) = places.windows(2).find(|w| w[0].place_id == w[1].place_id) {
            return Err(GazetteerError::DuplicatePlace {
                place_id: pair[0].place_id.to_string(),
                first_source: pair[0].source.clone(),
                second_source: pair[1].source.clone(),
            });
        }
        let by_id: HashMap<PlaceId, u32> = places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.place_id.clone(), i as u32))
            .collect();

        variants.extend(places.iter().map(|p| NameVariant {
            place_id: p.place_id.clone(),
            name: p.canonical_name.clone(),
            lang: LangScope::Any,
            kind: VariantKind::Canonical,
        }));
        variants.sort_by(|a, b| {
            (&a.place_id, &a.name, a.lang, a.kind).cmp(&(&b.place_id, &b.name, b.lang, b.kind))
        });
        variants.dedup();

        let mut report = BuildReport::default();
        let mut form_ids: HashMap<String, u32> = HashMap::new();
        let mut forms = Vec::new();
        let mut keys: HashMap<String, Vec<Posting>> = HashMap::new();
        for variant in variants {
            let Some(&place) = by_id.get(&variant.place_id) else {
                log::warn!(
                    "variant {:?} refers to unknown place {}",
                    variant.name,
                    variant.place_id
                );
                report.dangling.push(variant);
                continue;
            };
            let Some(key) = normalize_name(&variant.name) else {
                continue;
            };
            let form = *form_ids.entry(variant.name.clone()).or_insert_with(|| {
                forms.push(variant.name.clone());
                (forms.len() - 1) as u32
            });
            keys.entry(key).or_default().push(Posting {
                place,
                lang: variant.lang,
                form,
            });
        }
        for postings in keys.values_mut() {
            postings.sort();
            // One binding per (place, language); the first form is kept.
            postings.dedup_by(|b, a| a.place == b.place && a.lang == b.lang);
        }

        let mut index = GazetteerIndex {
            places,
            by_id,
            forms,
            keys,
            metadata: IndexMetadata {
                place_count: 0,
                variant_count: 0,
                key_count: 0,
                checksum: String::new(),
            },
        };
        let bytes = index.to_payload().encode();
        index.metadata = index.compute_metadata(checksum_hex(&bytes));
        Ok((index, report))
    }

    fn compute_metadata(&self, checksum: String) -> IndexMetadata {
        IndexMetadata {
            place_count: self.places.len(),
            variant_count: self.keys.values().map(Vec::len).sum(),
            key_count: self.keys.len(),
            checksum,
        }
    }

    pub(crate) fn to_payload(&self) -> IndexPayload {
        let mut keys: Vec<(String, Vec<Posting>)> = self
            .keys
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        IndexPayload {
            places: self.places.clone(),
            forms: self.forms.clone(),
            keys,
        }
    }

    pub(crate) fn from_payload(
        payload: IndexPayload,
        checksum: String,
    ) -> Result<Self, GazetteerError> {
        let place_count = payload.places.len() as u32;
        let form_count = payload.forms.len() as u32;
        for (key, postings) in &payload.keys {
            if postings
                .iter()
                .any(|p| p.place >= place_count || p.form >= form_count)
            {
                return Err(GazetteerError::Corrupt(format!(
                    "posting out of range under key {key:?}"
                )));
            }
        }
        let by_id = payload
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.place_id.clone(), i as u32))
            .collect();
        let mut index = GazetteerIndex {
            places: payload.places,
            by_id,
            forms: payload.forms,
            keys: payload.keys.into_iter().collect(),
            metadata: IndexMetadata {
                place_count: 0,
                variant_count: 0,
                key_count: 0,
                checksum: String::new(),
            },
        };
        index.metadata = index.compute_metadata(checksum);
        Ok(index)
    }

    pub fn metadata(&self) -> &IndexMetadata {
        &self.metadata
    }

    /// All places, sorted by place_id.
    pub fn places(&self) -> &[PlaceEntry] {
        &self.places
    }

    pub fn place(&self, id: &PlaceId) -> Option<&PlaceEntry> {
        self.by_id.get(id).map(|&i| &self.places[i as usize])
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.keys.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.keys.keys().map(String::as_str)
    }

    /// Places whose variants normalize to `key` and are visible in `lang`.
    /// Sorted by place_id, without duplicates.
    pub fn lookup(&self, key: &str, lang: LangScope) -> Vec<&PlaceEntry> {
        let Some(postings) = self.keys.get(key) else {
            return Vec::new();
        };
        let mut out: Vec<&PlaceEntry> = Vec::with_capacity(postings.len());
        let mut last = None;
        for p in postings {
            if p.lang.visible_to(lang) && last != Some(p.place) {
                out.push(&self.places[p.place as usize]);
                last = Some(p.place);
            }
        }
        out
    }

    /// Like [`lookup`](Self::lookup) but normalizes `name` first.
    pub fn lookup_name(&self, name: &str, lang: LangScope) -> Vec<&PlaceEntry> {
        normalize_name(name)
            .map(|key| self.lookup(&key, lang))
            .unwrap_or_default()
    }

    /// Original-case spellings filed under `key`, in first-seen order.
    pub fn forms(&self, key: &str) -> Vec<&str> {
        let mut ids: Vec<u32> = self
            .keys
            .get(key)
            .map(|ps| ps.iter().map(|p| p.form).collect())
            .unwrap_or_default();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter()
            .map(|i| self.forms[i as usize].as_str())
            .collect()
    }
}
