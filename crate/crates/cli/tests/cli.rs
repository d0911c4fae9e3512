use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn geoparse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoparse"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Builds the fixture index in a fresh temporary directory.
fn fixture_index() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fixture.gzix");
    let o = geoparse(&[
        "build-index",
        "--places",
        p(&fixture("places.tsv")),
        "--variants",
        p(&fixture("variants.tsv")),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    (dir, out)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn tagged_lines(text: &str) -> Vec<serde_json::Value> {
    text.lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn build_index_reports_counts() {
    let (_dir, index) = fixture_index();
    assert!(index.exists());
    let o = geoparse(&[
        "build-index",
        "--places",
        p(&fixture("places.tsv")),
        "--variants",
        p(&fixture("variants.tsv")),
        "--out",
        p(&index),
    ]);
    let out = stdout(&o);
    assert!(
        out.contains("places=81") && out.contains("dangling_variants=1"),
        "{out}"
    );
}

#[test]
fn missing_places_is_a_usage_error() {
    let o = geoparse(&["build-index", "--out", "/tmp/never-written.gzix"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn duplicate_place_names_both_sources() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(
        dir.path(),
        "a.tsv",
        "X-1\tAlpha\tFR\t1\t1\t3\tsource-alpha\n",
    );
    let b = write(
        dir.path(),
        "b.tsv",
        "X-1\tAlpha\tFR\t1\t1\t3\tsource-beta\n",
    );
    let out = dir.path().join("i.gzix");
    let o = geoparse(&["build-index", "--places", p(&a), p(&b), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("source-alpha") && err.contains("source-beta"),
        "{err}"
    );
    assert!(!out.exists());
}

#[test]
fn tag_warsaw_brest_and_ablation_flag() {
    let (dir, index) = fixture_index();
    let docs = write(
        dir.path(),
        "docs.jsonl",
        "{\"id\":\"wb\",\"lang\":\"en\",\"text\":\"He flew from Warsaw to Brest.\"}\n",
    );
    let run = |extra: &[&str]| {
        let mut args = vec!["tag", "--index", p(&index), "--input", p(&docs)];
        args.extend_from_slice(extra);
        let o = geoparse(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        tagged_lines(&stdout(&o)).remove(0)
    };
    let scored = run(&[]);
    let brest = &scored["mentions"][1];
    assert_eq!(brest["place_id"], "BY-BRE");
    assert_eq!(brest["decided_by"], "score");
    assert_eq!(scored["mentions"][0]["method"], "shallow");

    let no_km = run(&["--disable", "km-distance"]);
    assert_eq!(no_km["mentions"][1]["decided_by"], "place_id_tie_break");

    let bad = geoparse(&[
        "tag",
        "--index",
        p(&index),
        "--input",
        p(&docs),
        "--disable",
        "lexical-context",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = geoparse(&[
        "tag",
        "--index",
        p(&index),
        "--input",
        p(&docs),
        "--set",
        "bogus=1",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn language_without_rules_uses_direct_lookup() {
    let (dir, index) = fixture_index();
    let docs = write(
        dir.path(),
        "docs.jsonl",
        "{\"id\":\"de\",\"lang\":\"de\",\"text\":\"Paris und die Parisiens\"}\n\
         {\"id\":\"fr\",\"lang\":\"fr\",\"text\":\"Paris et les Parisiens\"}\n",
    );
    let o = geoparse(&["tag", "--index", p(&index), "--input", p(&docs)]);
    let recs = tagged_lines(&stdout(&o));
    assert_eq!(recs[0]["mentions"].as_array().unwrap().len(), 1);
    assert_eq!(recs[1]["mentions"].as_array().unwrap().len(), 2);
}

#[test]
fn malformed_documents_are_skipped() {
    let (dir, index) = fixture_index();
    let docs = write(
        dir.path(),
        "docs.jsonl",
        "{\"id\":\"a\",\"lang\":\"en\",\"text\":\"Paris\"}\n\
         {not json}\n\
         {\"id\":\"b\",\"lang\":\"english\",\"text\":\"Paris\"}\n\
         {\"id\":\"c\",\"lang\":\"en\",\"text\":\"Rome\"}\n",
    );
    let o = geoparse(&["tag", "--index", p(&index), "--input", p(&docs)]);
    assert!(o.status.success());
    let ids: Vec<String> = tagged_lines(&stdout(&o))
        .iter()
        .map(|r| r["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["a", "c"]);
    let err = stderr(&o);
    assert!(
        err.contains("line 2") && err.contains("\"english\""),
        "{err}"
    );
}

#[test]
fn unreadable_index_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.gzix", "not an index");
    let o = geoparse(&[
        "tag",
        "--index",
        p(&junk),
        "--input",
        p(&fixture("docs.jsonl")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("magic"), "{}", stderr(&o));
}

fn tag_fixture(dir: &Path, index: &Path, name: &str) -> PathBuf {
    let out = dir.join(name);
    let o = geoparse(&[
        "tag",
        "--index",
        p(index),
        "--input",
        p(&fixture("docs.jsonl")),
        "--persons",
        p(&fixture("persons.txt")),
        "--stoplist",
        p(&fixture("stoplist.tsv")),
        "--output",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn tagging_is_deterministic() {
    let (dir, index) = fixture_index();
    let a = std::fs::read(tag_fixture(dir.path(), &index, "a.jsonl")).unwrap();
    let b = std::fs::read(tag_fixture(dir.path(), &index, "b.jsonl")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 20);
}

#[test]
fn eval_of_gold_against_itself_is_perfect() {
    let gold = fixture("gold.jsonl");
    let o = geoparse(&[
        "eval",
        "--gold",
        p(&gold),
        "--pred",
        p(&gold),
        "--format",
        "tsv",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let all = out.lines().find(|l| l.starts_with("eval\tall\t")).unwrap();
    assert!(all.ends_with("\t1.000000\t1.000000\t1.000000"), "{all}");
}

#[test]
fn eval_of_tagged_output() {
    let (dir, index) = fixture_index();
    let tagged = tag_fixture(dir.path(), &index, "t.jsonl");
    let o = geoparse(&[
        "eval",
        "--gold",
        p(&fixture("gold.jsonl")),
        "--pred",
        p(&tagged),
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["counts"]["gold_total"], 38);
    assert_eq!(report["per_language"].as_object().unwrap().len(), 8);
}

#[test]
fn eval_rejects_bad_lines_by_number() {
    let dir = tempfile::tempdir().unwrap();
    let pred = write(dir.path(), "pred.jsonl", "{\"doc_id\":\"en-01\",\"start\":13,\"end\":19,\"place_id\":\"PL-WAW\",\"country\":\"PL\"}\n[1,2\n");
    let o = geoparse(&[
        "eval",
        "--gold",
        p(&fixture("gold.jsonl")),
        "--pred",
        p(&pred),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn exports_parse() {
    let (dir, index) = fixture_index();
    let tagged = tag_fixture(dir.path(), &index, "t.jsonl");
    for format in ["kml", "rss", "geojson"] {
        let out = dir.path().join(format!("out.{format}"));
        let o = geoparse(&[
            "export",
            "--input",
            p(&tagged),
            "--format",
            format,
            "--out",
            p(&out),
        ]);
        assert!(o.status.success(), "{format}: {}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.ends_with('\n'));
        if format == "geojson" {
            serde_json::from_str::<serde_json::Value>(&text).unwrap();
        } else {
            roxmltree::Document::parse(&text).unwrap();
        }
    }
}

#[test]
fn stopword_proposals_feed_the_tagger_once_accepted() {
    let (dir, index) = fixture_index();
    let proposals = dir.path().join("proposals.tsv");
    let o = geoparse(&[
        "stopwords",
        "build",
        "--index",
        p(&index),
        "--corpus",
        p(&fixture("corpus_en.txt")),
        "--threshold",
        "5",
        "--lang",
        "en",
        "--out",
        p(&proposals),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&proposals).unwrap();
    let names: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert!(names.contains(&"And"), "{text}");
    assert!(text.lines().skip(1).all(|l| l.ends_with("\tfalse")));

    let docs = write(
        dir.path(),
        "d.jsonl",
        "{\"id\":\"x\",\"lang\":\"en\",\"text\":\"And then Paris.\"}\n",
    );
    let tag = |stoplist: &Path| {
        let o = geoparse(&[
            "tag",
            "--index",
            p(&index),
            "--input",
            p(&docs),
            "--stoplist",
            p(stoplist),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        tagged_lines(&stdout(&o))[0]["mentions"]
            .as_array()
            .unwrap()
            .len()
    };
    assert_eq!(tag(&proposals), 2, "unaccepted proposals must not filter");

    let accepted = dir.path().join("accepted.tsv");
    let o = geoparse(&[
        "stopwords",
        "build",
        "--index",
        p(&index),
        "--corpus",
        p(&fixture("corpus_en.txt")),
        "--accept",
        "--out",
        p(&accepted),
    ]);
    assert!(o.status.success());
    assert_eq!(tag(&accepted), 1);

    let firstnames = write(dir.path(), "first.txt", "Javier\nMaria\nHenry\n");
    let o = geoparse(&[
        "stopwords",
        "build",
        "--index",
        p(&index),
        "--firstnames",
        p(&firstnames),
        "--out",
        p(&proposals),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&proposals).unwrap();
    assert!(
        text.contains("Javier\t*\tfirstname")
            && text.contains("Henry\t*\tfirstname")
            && !text.contains("Maria")
    );

    let o = geoparse(&[
        "stopwords",
        "build",
        "--index",
        p(&index),
        "--out",
        p(&proposals),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ablate_prints_all_rows() {
    let (_dir, index) = fixture_index();
    let o = geoparse(&[
        "ablate",
        "--index",
        p(&index),
        "--input",
        p(&fixture("docs.jsonl")),
        "--gold",
        p(&fixture("gold.jsonl")),
        "--persons",
        p(&fixture("persons.txt")),
        "--stoplist",
        p(&fixture("stoplist.tsv")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let f = |label: &str| -> f64 {
        let line = out
            .lines()
            .find(|l| l.starts_with(&format!("{label}\tall\t")))
            .unwrap();
        line.rsplit('\t').next().unwrap().parse().unwrap()
    };
    assert!(f("all") > f("none"));
    assert_eq!(out.lines().filter(|l| l.contains("\tall\t")).count(), 7);
}
