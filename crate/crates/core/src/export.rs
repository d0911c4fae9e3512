//! Map-format output of tagged records: GeoRSS (RSS 2.0 with W3C geo
//! points), KML story folders and GeoJSON feature collections.
//!
//! All writers are deterministic: the same input yields byte-identical
//! output, coordinates carry six decimals and documents end with a newline.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::pipeline::{TaggedMention, TaggedRecord};

pub const GEO_NAMESPACE: &str = "http://www.w3.org/2003/01/geo/wgs84_pos#";
pub const KML_NAMESPACE: &str = "http://earth.google.com/kml/2.0";

/// Largest class shown on story maps.
pub const KML_MAX_CLASS: u8 = 3;
/// Stories with more articles than this use the `high` style.
pub const HIGH_ARTICLE_COUNT: u32 = 20;
/// Stories with at least this many articles (and not `high`) use `medium`.
pub const MEDIUM_ARTICLE_COUNT: u32 = 10;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Highest-scoring mention; ties go to the earliest span.
pub fn best_mention(mentions: &[TaggedMention]) -> Option<&TaggedMention> {
    mentions
        .iter()
        .fold(None, |best: Option<&TaggedMention>, m| match best {
            Some(b) if b.score > m.score || (b.score == m.score && b.start <= m.start) => Some(b),
            _ => Some(m),
        })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub title: String,
    pub link: String,
    pub description: String,
}

impl Default for Channel {
    fn default() -> Self {
        Channel {
            title: "Geotagged news".into(),
            link: "http://localhost/".into(),
            description: "Articles tagged with their main place".into(),
        }
    }
}

/// Renders one RSS item per record that has at least one mention. Returns
/// the document and the number of records skipped for lack of a place.
pub fn to_georss(records: &[TaggedRecord], channel: &Channel) -> (String, usize) {
    let mut out = String::new();
    let mut skipped = 0;
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<rss version=\"2.0\" xmlns:geo=\"{GEO_NAMESPACE}\">");
    out.push_str("  <channel>\n");
    let _ = writeln!(out, "    <title>{}</title>", escape(&channel.title));
    let _ = writeln!(out, "    <link>{}</link>", escape(&channel.link));
    let _ = writeln!(
        out,
        "    <description>{}</description>",
        escape(&channel.description)
    );
    for rec in records {
        let Some(best) = best_mention(&rec.mentions) else {
            skipped += 1;
            continue;
        };
        let doc = &rec.doc;
        out.push_str("    <item>\n");
        let _ = writeln!(
            out,
            "      <title>{}</title>",
            escape(doc.title.as_deref().unwrap_or(&doc.id))
        );
        if let Some(link) = &doc.link {
            let _ = writeln!(out, "      <link>{}</link>", escape(link));
        }
        let _ = writeln!(
            out,
            "      <description>{}</description>",
            escape(&doc.text)
        );
        let _ = writeln!(
            out,
            "      <guid isPermaLink=\"false\">{}</guid>",
            escape(&doc.id)
        );
        let _ = writeln!(
            out,
            "      <category>{}</category>",
            escape(best.place_id.as_str())
        );
        let _ = writeln!(out, "      <geo:lat>{:.6}</geo:lat>", best.lat);
        let _ = writeln!(out, "      <geo:long>{:.6}</geo:long>", best.lon);
        out.push_str("    </item>\n");
    }
    out.push_str("  </channel>\n</rss>\n");
    (out, skipped)
}

/// A cluster of articles about one event.
#[derive(Debug, Clone, PartialEq)]
pub struct Story {
    pub story_id: String,
    pub title: String,
    pub description: String,
    pub link: Option<String>,
    pub article_count: u32,
    pub mentions: Vec<TaggedMention>,
}

/// Groups records by `story_id` (a record without one is its own story).
/// The first record supplies title, description and link; the article
/// count is the largest declared count, or the number of records. Each
/// place is kept once per story, at its first mention.
pub fn stories_from_records(records: &[TaggedRecord]) -> Vec<Story> {
    let mut groups: BTreeMap<String, Vec<&TaggedRecord>> = BTreeMap::new();
    for rec in records {
        let key = rec
            .doc
            .story_id
            .clone()
            .unwrap_or_else(|| rec.doc.id.clone());
        groups.entry(key).or_default().push(rec);
    }
    groups
        .into_iter()
        .map(|(story_id, recs)| {
            let first = &recs[0].doc;
            let declared = recs.iter().filter_map(|r| r.doc.article_count).max();
            let mut seen = std::collections::HashSet::new();
            let mentions = recs
                .iter()
                .flat_map(|r| r.mentions.iter())
                .filter(|m| seen.insert(&m.place_id))
                .cloned()
                .collect();
            Story {
                title: first.title.clone().unwrap_or_else(|| story_id.clone()),
                description: first.text.clone(),
                link: first.link.clone(),
                article_count: declared.unwrap_or(recs.len() as u32),
                mentions,
                story_id,
            }
        })
        .collect()
}

/// `high`, `medium` or `low` by article count.
pub fn story_style(article_count: u32) -> &'static str {
    if article_count > HIGH_ARTICLE_COUNT {
        "high"
    } else if article_count >= MEDIUM_ARTICLE_COUNT {
        "medium"
    } else {
        "low"
    }
}

/// One folder per story, one placemark per mention of class up to
/// [`KML_MAX_CLASS`].
pub fn to_kml(stories: &[Story]) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(out, "<kml xmlns=\"{KML_NAMESPACE}\">");
    out.push_str("<Document>\n");
    for (style, scale) in [("high", "1.4"), ("medium", "1.1"), ("low", "0.8")] {
        let _ = writeln!(
            out,
            "  <Style id=\"{style}\"><IconStyle><scale>{scale}</scale></IconStyle></Style>"
        );
    }
    for story in stories {
        out.push_str("  <Folder>\n");
        let _ = writeln!(out, "    <name>{}</name>", escape(&story.title));
        for m in story.mentions.iter().filter(|m| m.class <= KML_MAX_CLASS) {
            out.push_str("    <Placemark>\n");
            let _ = writeln!(out, "      <name>{}</name>", escape(&m.surface));
            let mut description = escape(&story.description);
            if let Some(link) = &story.link {
                let _ = write!(
                    description,
                    " &lt;a href=&quot;{0}&quot;&gt;{0}&lt;/a&gt;",
                    escape(link)
                );
            }
            let _ = writeln!(out, "      <description>{description}</description>");
            let _ = writeln!(
                out,
                "      <styleUrl>#{}</styleUrl>",
                story_style(story.article_count)
            );
            let _ = writeln!(
                out,
                "      <Point><coordinates>{:.6},{:.6},0</coordinates></Point>",
                m.lon, m.lat
            );
            out.push_str("    </Placemark>\n");
        }
        out.push_str("  </Folder>\n");
    }
    out.push_str("</Document>\n</kml>\n");
    out
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

/// A FeatureCollection with one Point feature per mention.
pub fn to_geojson(records: &[TaggedRecord]) -> String {
    let mut features = Vec::new();
    for rec in records {
        for m in &rec.mentions {
            features.push(format!(
                "{{\"type\":\"Feature\",\"geometry\":{{\"type\":\"Point\",\"coordinates\":[{:.6},{:.6}]}},\
                 \"properties\":{{\"surface\":{},\"place_id\":{},\"country\":{},\"class\":{},\"score\":{:.6},\
                 \"doc_id\":{},\"span\":[{},{}]}}}}",
                m.lon,
                m.lat,
                json_str(&m.surface),
                json_str(m.place_id.as_str()),
                json_str(m.country.as_str()),
                m.class,
                m.score,
                json_str(&rec.doc.id),
                m.start,
                m.end
            ));
        }
    }
    if features.is_empty() {
        return "{\"type\":\"FeatureCollection\",\"features\":[]}\n".into();
    }
    format!(
        "{{\"type\":\"FeatureCollection\",\"features\":[\n{}\n]}}\n",
        features.join(",\n")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disambig::Decision;
    use crate::gazetteer::CountryCode;
    use crate::pipeline::{DocumentRecord, Method};

    fn mention(start: usize, surface: &str, id: &str, class: u8, score: f64) -> TaggedMention {
        TaggedMention {
            start,
            end: start + surface.len(),
            surface: surface.into(),
            place_id: id.into(),
            country: CountryCode::parse("FR").unwrap(),
            lat: 48.856614,
            lon: 2.3522219,
            class,
            score,
            method: Method::Deep,
            decided_by: Decision::Score,
        }
    }

    #[test]
    fn best_mention_prefers_score_then_earliest() {
        let ms = vec![
            mention(10, "B", "b", 1, 5.0),
            mention(0, "A", "a", 1, 5.0),
            mention(20, "C", "c", 1, 1.0),
        ];
        assert_eq!(best_mention(&ms).unwrap().place_id.as_str(), "a");
        assert!(best_mention(&[]).is_none());
    }

    #[test]
    fn georss_shape() {
        let mut doc = DocumentRecord::new("d1", "fr", "News from Paris & <elsewhere>");
        doc.title = Some("Paris".into());
        let recs = vec![
            TaggedRecord {
                doc,
                mentions: vec![mention(10, "Paris", "FR-PAR", 1, 180.0)],
            },
            TaggedRecord {
                doc: DocumentRecord::new("d2", "fr", "nothing"),
                mentions: vec![],
            },
        ];
        let (xml, skipped) = to_georss(&recs, &Channel::default());
        assert_eq!(skipped, 1);
        assert!(xml.ends_with("</rss>\n"));
        assert!(xml.contains("<geo:lat>48.856614</geo:lat>"));
        assert!(xml.contains("<geo:long>2.352222</geo:long>"));
        assert!(xml.contains("&amp; &lt;elsewhere&gt;"));
        assert_eq!(xml, to_georss(&recs, &Channel::default()).0);
    }

    #[test]
    fn styles_by_article_count() {
        assert_eq!(story_style(21), "high");
        assert_eq!(story_style(20), "medium");
        assert_eq!(story_style(10), "medium");
        assert_eq!(story_style(9), "low");
    }

    #[test]
    fn kml_skips_small_places() {
        let story = Story {
            story_id: "s".into(),
            title: "T".into(),
            description: "D".into(),
            link: Some("http://x/?a=1&b=2".into()),
            article_count: 12,
            mentions: vec![
                mention(0, "Paris", "FR-PAR", 1, 1.0),
                mention(9, "Lyon", "FR-LYS", 2, 1.0),
                mention(20, "Village", "FR-VIL", 5, 1.0),
            ],
        };
        let kml = to_kml(&[story]);
        assert_eq!(kml.matches("<Placemark>").count(), 2);
        assert!(kml.contains("<coordinates>2.352222,48.856614,0</coordinates>"));
        assert!(kml.contains("#medium"));
        assert!(kml.contains("a=1&amp;b=2"));
    }

    #[test]
    fn geojson_is_valid_json() {
        let recs = vec![TaggedRecord {
            doc: DocumentRecord::new("d\"1", "fr", "x"),
            mentions: vec![mention(0, "Pa\"ris", "FR-PAR", 1, 180.0)],
        }];
        let text = to_geojson(&recs);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let f = &v["features"][0];
        assert_eq!(f["geometry"]["coordinates"][0].as_f64().unwrap(), 2.352222);
        assert_eq!(f["properties"]["doc_id"], "d\"1");
        assert_eq!(f["properties"]["span"][1], 6);
        let empty: serde_json::Value = serde_json::from_str(&to_geojson(&[])).unwrap();
        assert_eq!(empty["features"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn stories_group_by_story_id() {
        let mut a = DocumentRecord::new("a", "en", "first");
        a.story_id = Some("s1".into());
        let mut b = DocumentRecord::new("b", "en", "second");
        b.story_id = Some("s1".into());
        b.article_count = Some(25);
        let c = DocumentRecord::new("c", "en", "alone");
        let recs: Vec<TaggedRecord> = [a, b, c]
            .into_iter()
            .map(|doc| TaggedRecord {
                doc,
                mentions: vec![mention(0, "Paris", "FR-PAR", 1, 1.0)],
            })
            .collect();
        let stories = stories_from_records(&recs);
        assert_eq!(stories.len(), 2);
        let c = &stories[0];
        assert_eq!((c.story_id.as_str(), c.article_count), ("c", 1));
        let s1 = &stories[1];
        // Both records mention Paris; the story keeps it once.
        assert_eq!(
            (s1.article_count, s1.mentions.len(), s1.description.as_str()),
            (25, 1, "first")
        );
    }
}
