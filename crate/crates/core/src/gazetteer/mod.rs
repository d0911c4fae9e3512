//! Gazetteer ingestion, name normalization and the immutable lookup index.
//!
//! Places and name variants are read from TSV tables, merged into a
//! [`GazetteerIndex`] keyed by normalized name, and persisted in a small
//! checksummed binary format.

mod index;
mod load;
mod persist;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

pub use index::{BuildReport, GazetteerIndex, IndexMetadata};
pub use load::{load_places, load_variants, parse_places, parse_variants, Loaded, RowError};
pub use persist::{persist_index, restore_index, FORMAT_VERSION, MAGIC};

/// Highest importance class; inputs above it are clamped.
pub const MAX_CLASS: u8 = 6;

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate place_id {place_id} (sources {first_source} and {second_source})")]
    DuplicatePlace {
        place_id: String,
        first_source: String,
        second_source: String,
    },
    #[error("not an index file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported index format version {found} (expected {expected})")]
    UnsupportedVersion { found: u8, expected: u8 },
    #[error("index file is truncated")]
    Truncated,
    #[error("index checksum mismatch")]
    ChecksumMismatch,
    #[error("corrupt index payload: {0}")]
    Corrupt(String),
}

/// Opaque gazetteer identifier of one place.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlaceId(pub String);

impl PlaceId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlaceId {
    fn from(s: &str) -> Self {
        PlaceId(s.to_string())
    }
}

/// ISO-3166 alpha-2 country code, stored uppercase.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    /// Accepts two ASCII letters in either case.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().as_bytes() {
            [a, b] if a.is_ascii_alphabetic() && b.is_ascii_alphabetic() => Some(CountryCode([
                a.to_ascii_uppercase(),
                b.to_ascii_uppercase(),
            ])),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ascii")
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TryFrom<String> for CountryCode {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        CountryCode::parse(&s).ok_or_else(|| format!("invalid country code {s:?}"))
    }
}

impl From<CountryCode> for String {
    fn from(c: CountryCode) -> String {
        c.as_str().to_string()
    }
}

/// Language visibility of a name variant: one ISO-639-1 language or all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LangScope {
    Any,
    Only([u8; 2]),
}

impl LangScope {
    /// Parses `"*"` or a two-letter lowercase language code.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "*" {
            return Some(LangScope::Any);
        }
        match s.as_bytes() {
            [a, b] if a.is_ascii_lowercase() && b.is_ascii_lowercase() => {
                Some(LangScope::Only([*a, *b]))
            }
            _ => None,
        }
    }

    /// Whether a variant with this scope is visible to a query in `query`.
    ///
    /// A query scope of [`LangScope::Any`] sees every variant.
    pub fn visible_to(self, query: LangScope) -> bool {
        match (self, query) {
            (LangScope::Any, _) | (_, LangScope::Any) => true,
            (LangScope::Only(a), LangScope::Only(b)) => a == b,
        }
    }
}

impl fmt::Display for LangScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LangScope::Any => f.write_str("*"),
            LangScope::Only(code) => f.write_str(std::str::from_utf8(code).expect("ascii")),
        }
    }
}

/// Importance class 0 (country) through 6 (settlement or smaller).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlaceClass(u8);

impl PlaceClass {
    pub const COUNTRY: PlaceClass = PlaceClass(0);

    /// Clamps anything above [`MAX_CLASS`] to it.
    pub const fn clamped(raw: u32) -> Self {
        if raw > MAX_CLASS as u32 {
            PlaceClass(MAX_CLASS)
        } else {
            PlaceClass(raw as u8)
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceEntry {
    pub place_id: PlaceId,
    pub canonical_name: String,
    pub country: CountryCode,
    pub lat: f64,
    pub lon: f64,
    pub class: PlaceClass,
    /// Provenance tag of the source table.
    pub source: String,
}

impl PlaceEntry {
    pub fn coordinates_valid(lat: f64, lon: f64) -> bool {
        (-90.0..=90.0).contains(&lat) && lon > -180.0 && lon <= 180.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariantKind {
    Canonical,
    Exonym,
    Historical,
    Linguistic,
}

impl VariantKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "canonical" => Some(VariantKind::Canonical),
            "exonym" => Some(VariantKind::Exonym),
            "historical" => Some(VariantKind::Historical),
            "linguistic" => Some(VariantKind::Linguistic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NameVariant {
    pub place_id: PlaceId,
    pub name: String,
    pub lang: LangScope,
    pub kind: VariantKind,
}

/// Builds the index from loaded tables; see [`GazetteerIndex::build`].
pub fn build_index(
    places: Vec<PlaceEntry>,
    variants: Vec<NameVariant>,
) -> Result<(GazetteerIndex, BuildReport), GazetteerError> {
    GazetteerIndex::build(places, variants)
}

/// Lookup key for a surface name: NFC, lowercased, internal whitespace
/// collapsed to single spaces. Diacritics are kept.
///
/// Returns `None` when nothing but whitespace remains.
pub fn normalize_name(name: &str) -> Option<String> {
    let folded: String = name.nfc().flat_map(char::to_lowercase).collect();
    let mut out = String::with_capacity(folded.len());
    for word in folded.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    (!out.is_empty()).then_some(out)
}
