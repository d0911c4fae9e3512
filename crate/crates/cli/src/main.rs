use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "geoparse",
    version,
    about = "Recognize, disambiguate and map place names in news text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merge gazetteer files into a binary index.
    BuildIndex(BuildIndexArgs),
    /// Tag a JSONL document stream with resolved place mentions.
    Tag(TagArgs),
    /// Score tagged output against gold annotations.
    Eval(EvalArgs),
    /// Convert tagged output to GeoRSS, KML or GeoJSON.
    Export(ExportArgs),
    /// Geo-stop-word tooling.
    #[command(subcommand)]
    Stopwords(StopwordsCommand),
    /// Tag and score once per heuristic configuration.
    Ablate(AblateArgs),
}

#[derive(Args, Debug)]
struct BuildIndexArgs {
    /// Place TSV file (repeatable).
    #[arg(long, required = true, num_args = 1..)]
    places: Vec<PathBuf>,
    /// Name-variant TSV file (repeatable).
    #[arg(long, num_args = 1..)]
    variants: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Scored,
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum HeuristicArg {
    GeoContext,
    ClassImportance,
    KmDistance,
    PersonFilter,
    Stoplist,
}

#[derive(Args, Debug, Clone)]
struct TaggerArgs {
    #[arg(long)]
    index: PathBuf,
    /// Person names, one per line.
    #[arg(long)]
    persons: Option<PathBuf>,
    /// Stop-list TSV.
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Morphological rules TSV; the built-in starter rules are used otherwise.
    #[arg(long, conflicts_with = "no_rules")]
    rules: Option<PathBuf>,
    /// Direct lookup only.
    #[arg(long)]
    no_rules: bool,
    #[arg(long, value_enum, default_value = "scored")]
    mode: ModeArg,
    /// Scoring parameters file (key=value lines).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override one scoring parameter, e.g. --set context_bonus=50.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = commands::parse_param_override)]
    overrides: Vec<(String, String)>,
    /// Longest name tried, in tokens.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u16).range(1..))]
    max_tokens: u16,
}

#[derive(Args, Debug)]
struct TagArgs {
    #[command(flatten)]
    tagger: TaggerArgs,
    /// Documents, one JSON object per line.
    #[arg(long)]
    input: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Switch a heuristic off (repeatable).
    #[arg(long, value_enum)]
    disable: Vec<HeuristicArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MatchArg {
    Place,
    Country,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Text,
    Tsv,
    Json,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    /// Tagged JSONL, or annotations in the gold format.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long = "match", value_enum, default_value = "place")]
    match_mode: MatchArg,
    /// Fills in gold countries and coordinates from place ids.
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExportFormat {
    Rss,
    Kml,
    Geojson,
}

#[derive(Args, Debug)]
struct ExportArgs {
    /// Tagged JSONL.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: ExportFormat,
    /// Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum StopwordsCommand {
    /// Propose geo-stop words from corpus frequency and/or a first-name list.
    Build(StopwordsBuildArgs),
}

#[derive(Args, Debug)]
struct StopwordsBuildArgs {
    #[arg(long)]
    index: PathBuf,
    /// Plain-text corpus of the language.
    #[arg(long, required_unless_present = "firstnames")]
    corpus: Option<PathBuf>,
    #[arg(long, default_value = "en")]
    lang: String,
    /// Minimum lowercase occurrences per million tokens.
    #[arg(long, default_value_t = geoparse::filters::DEFAULT_THRESHOLD_PER_MILLION)]
    threshold: f64,
    /// First names, one per line.
    #[arg(long)]
    firstnames: Option<PathBuf>,
    /// Mark every proposal accepted so the file works as a stop list as is.
    #[arg(long)]
    accept: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[command(flatten)]
    tagger: TaggerArgs,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long = "match", value_enum, default_value = "place")]
    match_mode: MatchArg,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildIndex(args) => commands::build_index(args),
        Command::Tag(args) => commands::tag(args),
        Command::Eval(args) => commands::eval(args),
        Command::Export(args) => commands::export(args),
        Command::Stopwords(StopwordsCommand::Build(args)) => commands::stopwords_build(args),
        Command::Ablate(args) => commands::ablate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<commands::UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
