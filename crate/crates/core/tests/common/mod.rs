//! Shared loaders for the fixture corpus under `tests/fixtures`.
#![allow(dead_code)]

use std::path::PathBuf;

use geoparse::evalkit::{GoldCorpus, GoldRecord};
use geoparse::filters::{PersonLexicon, StopList};
use geoparse::gazetteer::{load_places, load_variants, GazetteerIndex};
use geoparse::pipeline::{parse_jsonl, DocumentRecord};
use geoparse::textmatch::RuleSet;
use geoparse::{Tagger, TaggerConfig};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn index() -> GazetteerIndex {
    let places = load_places(&fixture("places.tsv")).unwrap();
    let variants = load_variants(&fixture("variants.tsv")).unwrap();
    assert!(places.rejected.is_empty() && variants.rejected.is_empty());
    GazetteerIndex::build(places.rows, variants.rows).unwrap().0
}

pub fn docs() -> Vec<DocumentRecord> {
    parse_jsonl(&read_fixture("docs.jsonl")).unwrap()
}

pub fn gold(index: &GazetteerIndex) -> GoldCorpus {
    let records: Vec<GoldRecord> = parse_jsonl(&read_fixture("gold.jsonl")).unwrap();
    GoldCorpus::from_records(&records, Some(index)).unwrap()
}

pub fn persons() -> PersonLexicon {
    PersonLexicon::load(&fixture("persons.txt")).unwrap()
}

pub fn stoplist() -> StopList {
    StopList::load(&fixture("stoplist.tsv")).unwrap()
}

/// Resources a fully equipped tagger borrows.
pub struct Kit {
    pub index: GazetteerIndex,
    pub rules: RuleSet,
    pub persons: PersonLexicon,
    pub stoplist: StopList,
}

impl Kit {
    pub fn load() -> Self {
        Kit {
            index: index(),
            rules: RuleSet::starter(),
            persons: persons(),
            stoplist: stoplist(),
        }
    }

    pub fn tagger(&self) -> Tagger<'_> {
        Tagger::new(&self.index, TaggerConfig::default())
            .with_rules(&self.rules)
            .with_persons(&self.persons)
            .with_stoplist(&self.stoplist)
    }
}
