use std::collections::HashSet;
use std::fmt;
use std::io::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use log::{info, warn};

use geoparse::evalkit::{self, GoldCorpus, GoldRecord, MatchMode, Prediction};
use geoparse::export::{self, Channel};
use geoparse::filters::{
    build_stoplist_from_corpus, build_stoplist_from_firstnames, write_proposals, PersonLexicon,
    StopList,
};
use geoparse::gazetteer::{self, GazetteerIndex, LangScope};
use geoparse::pipeline::{
    parse_jsonl, parse_jsonl_lenient, to_jsonl, DocumentRecord, TaggedRecord,
};
use geoparse::textmatch::{RuleSet, ScanOptions};
use geoparse::{Heuristic, Heuristics, Mode, ScoringParams64, Tagger, TaggerConfig};

use crate::{
    AblateArgs, BuildIndexArgs, EvalArgs, ExportArgs, ExportFormat, HeuristicArg, MatchArg,
    ModeArg, ReportFormat, StopwordsBuildArgs, TagArgs, TaggerArgs,
};

/// Bad command-line input found after argument parsing; exits with 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// `KEY=VALUE` for `--set`; the key and value are checked here so mistakes
/// are reported as usage errors.
pub fn parse_param_override(s: &str) -> Result<(String, String), String> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    ScoringParams64::default()
        .set(key, value)
        .map_err(|e| e.to_string())?;
    Ok((key.trim().to_string(), value.trim().to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn load_index(path: &Path) -> Result<GazetteerIndex> {
    gazetteer::restore_index(path).with_context(|| format!("cannot load index {}", path.display()))
}

fn match_mode(m: MatchArg) -> MatchMode {
    match m {
        MatchArg::Place => MatchMode::Place,
        MatchArg::Country => MatchMode::Country,
    }
}

fn heuristic(h: HeuristicArg) -> Heuristic {
    match h {
        HeuristicArg::GeoContext => Heuristic::GeoContext,
        HeuristicArg::ClassImportance => Heuristic::ClassImportance,
        HeuristicArg::KmDistance => Heuristic::KmDistance,
        HeuristicArg::PersonFilter => Heuristic::PersonFilter,
        HeuristicArg::Stoplist => Heuristic::StopList,
    }
}

pub fn build_index(args: BuildIndexArgs) -> Result<()> {
    let mut places = Vec::new();
    let mut rejected = 0;
    for path in &args.places {
        let loaded = gazetteer::load_places(path)?;
        rejected += loaded.rejected.len();
        places.extend(loaded.rows);
    }
    let mut variants = Vec::new();
    for path in &args.variants {
        let loaded = gazetteer::load_variants(path)?;
        rejected += loaded.rejected.len();
        variants.extend(loaded.rows);
    }
    let (index, report) = GazetteerIndex::build(places, variants)?;
    gazetteer::persist_index(&index, &args.out)?;
    let meta = index.metadata();
    println!(
        "places={} variants={} keys={} rejected_rows={} dangling_variants={} out={}",
        meta.place_count,
        meta.variant_count,
        meta.key_count,
        rejected,
        report.dangling.len(),
        args.out.display()
    );
    Ok(())
}

/// Everything a [`Tagger`] borrows, loaded from the command line.
struct Resources {
    index: GazetteerIndex,
    rules: RuleSet,
    persons: Option<PersonLexicon>,
    stoplist: Option<StopList>,
    config: TaggerConfig,
}

impl Resources {
    fn load(args: &TaggerArgs) -> Result<Self> {
        let index = load_index(&args.index)?;
        let rules = match (&args.rules, args.no_rules) {
            (_, true) => RuleSet::empty(),
            (Some(path), false) => RuleSet::load(path)?,
            (None, false) => RuleSet::starter(),
        };
        let persons = args
            .persons
            .as_deref()
            .map(PersonLexicon::load)
            .transpose()?;
        let stoplist = args.stoplist.as_deref().map(StopList::load).transpose()?;
        let mut params = match &args.params {
            Some(path) => ScoringParams64::from_config_file(path)?,
            None => ScoringParams64::default(),
        };
        for (key, value) in &args.overrides {
            params.set(key, value)?;
        }
        params.validate()?;
        let config = TaggerConfig {
            params,
            heuristics: Heuristics::all(),
            mode: match args.mode {
                ModeArg::Scored => Mode::Scored,
                ModeArg::Strict => Mode::Strict,
            },
            scan: ScanOptions {
                max_tokens: args.max_tokens as usize,
            },
        };
        Ok(Resources {
            index,
            rules,
            persons,
            stoplist,
            config,
        })
    }

    fn tagger(&self) -> Tagger<'_> {
        let mut tagger = Tagger::new(&self.index, self.config.clone()).with_rules(&self.rules);
        if let Some(p) = &self.persons {
            tagger = tagger.with_persons(p);
        }
        if let Some(s) = &self.stoplist {
            tagger = tagger.with_stoplist(s);
        }
        tagger
    }
}

/// Reads documents, logging and skipping malformed lines and repeated ids.
fn read_documents(path: &Path) -> Result<Vec<DocumentRecord>> {
    let (docs, errors) = parse_jsonl_lenient::<DocumentRecord>(&read(path)?);
    for e in &errors {
        warn!("{}: skipped {e}", path.display());
    }
    let mut seen = HashSet::new();
    Ok(docs
        .into_iter()
        .filter(|d| {
            let fresh = seen.insert(d.id.clone());
            if !fresh {
                warn!(
                    "{}: skipped repeated document id {:?}",
                    path.display(),
                    d.id
                );
            }
            fresh
        })
        .collect())
}

pub fn tag(args: TagArgs) -> Result<()> {
    let resources = Resources::load(&args.tagger)?;
    let heuristics = args
        .disable
        .iter()
        .fold(Heuristics::all(), |h, &d| h.without(heuristic(d)));
    let tagger = resources.tagger().with_heuristics(heuristics);
    let docs = read_documents(&args.input)?;
    let mut tagged = Vec::with_capacity(docs.len());
    for result in tagger.tag_all(&docs) {
        match result {
            Ok(rec) => tagged.push(rec),
            Err(e) => warn!("skipped {e}"),
        }
    }
    info!("tagged {} of {} documents", tagged.len(), docs.len());
    write_output(args.output.as_deref(), &to_jsonl(&tagged))
}

fn read_gold(path: &Path, index: Option<&GazetteerIndex>) -> Result<GoldCorpus> {
    let records: Vec<GoldRecord> = parse_jsonl(&read(path)?)
        .with_context(|| format!("invalid gold file {}", path.display()))?;
    Ok(GoldCorpus::from_records(&records, index)?)
}

/// Tagged records, or gold-format annotations scored as predictions.
fn read_predictions(path: &Path, index: Option<&GazetteerIndex>) -> Result<Vec<Prediction>> {
    let text = read(path)?;
    let mut tagged = Vec::new();
    let mut annotations = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |e: serde_json::Error| anyhow!("{} line {}: {e}", path.display(), i + 1);
        let value: serde_json::Value = serde_json::from_str(line).map_err(bad)?;
        if value.get("mentions").is_some() {
            tagged.push(serde_json::from_value::<TaggedRecord>(value).map_err(bad)?);
        } else {
            annotations.push(serde_json::from_value::<GoldRecord>(value).map_err(bad)?);
        }
    }
    let mut predictions = Prediction::from_tagged(&tagged);
    predictions.extend(GoldCorpus::from_records(&annotations, index)?.to_predictions()?);
    Ok(predictions)
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let index = args.index.as_deref().map(load_index).transpose()?;
    let gold = read_gold(&args.gold, index.as_ref())?;
    let predictions = read_predictions(&args.pred, index.as_ref())?;
    let report = evalkit::evaluate(&gold, &predictions, match_mode(args.match_mode), "eval")?;
    let text = match args.format {
        ReportFormat::Text => evalkit::report_to_text(&report),
        ReportFormat::Tsv => evalkit::reports_to_tsv(&[report]),
        ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    write_output(None, &text)
}

pub fn export(args: ExportArgs) -> Result<()> {
    let records: Vec<TaggedRecord> = parse_jsonl(&read(&args.input)?)
        .with_context(|| format!("invalid tagged file {}", args.input.display()))?;
    let text = match args.format {
        ExportFormat::Rss => {
            let (xml, skipped) = export::to_georss(&records, &Channel::default());
            if skipped > 0 {
                info!("{skipped} records without places left out of the feed");
            }
            xml
        }
        ExportFormat::Kml => export::to_kml(&export::stories_from_records(&records)),
        ExportFormat::Geojson => export::to_geojson(&records),
    };
    write_output(args.out.as_deref(), &text)
}

pub fn stopwords_build(args: StopwordsBuildArgs) -> Result<()> {
    let lang = LangScope::parse(&args.lang).ok_or_else(|| {
        UsageError(format!(
            "--lang: expected a two-letter code or *, got {:?}",
            args.lang
        ))
    })?;
    if !(args.threshold > 0.0 && args.threshold.is_finite()) {
        return Err(UsageError(format!(
            "--threshold must be positive, got {}",
            args.threshold
        ))
        .into());
    }
    let index = load_index(&args.index)?;
    let mut proposals = Vec::new();
    if let Some(corpus) = &args.corpus {
        proposals.extend(build_stoplist_from_corpus(
            corpus,
            &index,
            lang,
            args.threshold,
        )?);
    }
    if let Some(path) = &args.firstnames {
        let text = read(path)?;
        let names = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        proposals.extend(build_stoplist_from_firstnames(
            names,
            &index,
            &path.display().to_string(),
        ));
    }
    if args.accept {
        for p in &mut proposals {
            p.accepted = true;
        }
    }
    std::fs::write(&args.out, write_proposals(&proposals))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    println!("proposals={} out={}", proposals.len(), args.out.display());
    Ok(())
}

pub fn ablate(args: AblateArgs) -> Result<()> {
    let resources = Resources::load(&args.tagger)?;
    let gold = read_gold(&args.gold, Some(&resources.index))?;
    let docs = read_documents(&args.input)?;
    let reports = evalkit::ablation_run(
        &docs,
        &gold,
        &resources.tagger(),
        &Heuristics::ablation_rows(),
        match_mode(args.match_mode),
    )?;
    write_output(None, &evalkit::reports_to_tsv(&reports))
}
