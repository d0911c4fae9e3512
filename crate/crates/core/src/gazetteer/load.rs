use std::path::Path;

use log::warn;

use super::{
    normalize_name, CountryCode, GazetteerError, LangScope, NameVariant, PlaceClass, PlaceEntry,
    PlaceId, VariantKind, MAX_CLASS,
};

/// A rejected input row, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    pub line: usize,
    pub reason: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// Rows accepted from one table plus the rows that were rejected.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub rows: Vec<T>,
    pub rejected: Vec<RowError>,
}

fn read(path: &Path) -> Result<String, GazetteerError> {
    std::fs::read_to_string(path).map_err(|source| GazetteerError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Yields `(line_number, fields)` for every non-blank, non-comment line.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').map(str::trim).collect()))
        }
    })
}

pub fn load_places(path: &Path) -> Result<Loaded<PlaceEntry>, GazetteerError> {
    let loaded = parse_places(&read(path)?);
    for err in &loaded.rejected {
        warn!("{}:{}: {}", path.display(), err.line, err.reason);
    }
    Ok(loaded)
}

/// Parses `place_id, canonical_name, country, lat, lon, class, source` rows.
pub fn parse_places(text: &str) -> Loaded<PlaceEntry> {
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for (line, fields) in records(text) {
        match parse_place_row(&fields, line) {
            Ok(entry) => rows.push(entry),
            Err(reason) => rejected.push(RowError { line, reason }),
        }
    }
    Loaded { rows, rejected }
}

fn parse_place_row(fields: &[&str], line: usize) -> Result<PlaceEntry, String> {
    let [id, name, country, lat, lon, class, source] = fields else {
        return Err(format!("expected 7 columns, found {}", fields.len()));
    };
    if id.is_empty() {
        return Err("empty place_id".into());
    }
    if normalize_name(name).is_none() {
        return Err("empty canonical name".into());
    }
    let country =
        CountryCode::parse(country).ok_or_else(|| format!("invalid country code {country:?}"))?;
    let lat: f64 = lat
        .parse()
        .map_err(|_| format!("invalid latitude {lat:?}"))?;
    let lon: f64 = lon
        .parse()
        .map_err(|_| format!("invalid longitude {lon:?}"))?;
    if !PlaceEntry::coordinates_valid(lat, lon) {
        return Err(format!("coordinates out of range ({lat}, {lon})"));
    }
    let raw_class: u32 = class
        .parse()
        .map_err(|_| format!("invalid class {class:?}"))?;
    if raw_class > MAX_CLASS as u32 {
        warn!("line {line}: class {raw_class} for {id} clamped to {MAX_CLASS}");
    }
    Ok(PlaceEntry {
        place_id: PlaceId(id.to_string()),
        canonical_name: name.to_string(),
        country,
        lat,
        lon,
        class: PlaceClass::clamped(raw_class),
        source: source.to_string(),
    })
}

pub fn load_variants(path: &Path) -> Result<Loaded<NameVariant>, GazetteerError> {
    let loaded = parse_variants(&read(path)?);
    for err in &loaded.rejected {
        warn!("{}:{}: {}", path.display(), err.line, err.reason);
    }
    Ok(loaded)
}

/// Parses `place_id, name, lang, kind` rows. Dangling place references are
/// detected later, when the index is built.
pub fn parse_variants(text: &str) -> Loaded<NameVariant> {
    let mut rows = Vec::new();
    let mut rejected = Vec::new();
    for (line, fields) in records(text) {
        let parsed = match fields.as_slice() {
            [id, name, lang, kind] => parse_variant_row(id, name, lang, kind),
            _ => Err(format!("expected 4 columns, found {}", fields.len())),
        };
        match parsed {
            Ok(v) => rows.push(v),
            Err(reason) => rejected.push(RowError { line, reason }),
        }
    }
    Loaded { rows, rejected }
}

fn parse_variant_row(id: &str, name: &str, lang: &str, kind: &str) -> Result<NameVariant, String> {
    if id.is_empty() {
        return Err("empty place_id".into());
    }
    if normalize_name(name).is_none() {
        return Err("empty name".into());
    }
    let lang = LangScope::parse(lang).ok_or_else(|| format!("invalid language code {lang:?}"))?;
    let kind = VariantKind::parse(kind).ok_or_else(|| format!("unknown variant kind {kind:?}"))?;
    Ok(NameVariant {
        place_id: PlaceId(id.to_string()),
        name: name.to_string(),
        lang,
        kind,
    })
}
