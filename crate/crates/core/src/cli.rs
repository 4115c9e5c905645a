//! Command-line entry point.
//!
//! Analysis subcommands take the same parameters as the HTTP API (flag
//! `--max-lag` for query key `max_lag`) and write the same documents.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::barriers::{coverage, BarrierKind, KindCoverage};
use crate::corpus::remote::{fetch_remote, ClientConfig, HttpPageSource, RemoteQuery};
use crate::corpus::{load_corpus, Corpus, LoadReport, TimeWindow};
use crate::data::{ECONOMIC_CLUSTERS_CSV, INTENSIFIERS_TXT, MICRO_LEXICON_TSV, NEGATIONS_TXT, STOPWORDS_TXT};
use crate::sentiment::SentimentRules;
use crate::service::{
    serve, shutdown_signal, AnalysisKind, AnalysisRequest, Defaults, ServiceConfig, Snapshot, SnapshotSources,
};
use crate::time::parse_timestamp;

type CliResult = Result<(), Box<dyn std::error::Error>>;

#[derive(Debug, Parser)]
#[command(name = "barrierlens", version, about = "News barrier analytics")]
struct Cli {
    /// Log level on stderr: error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log: tracing::Level,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fetch articles from a news API or convert a local file into a corpus.
    Ingest(IngestArgs),
    /// Report barrier label coverage of a corpus.
    Enrich(EnrichArgs),
    /// Similarity propagation graph with communities.
    Propagate(PropagateArgs),
    /// Article counts per barrier label over time.
    Trends(TrendsArgs),
    /// Daily sentiment heatmap per barrier label.
    Sentiment(SentimentArgs),
    /// Hierarchical topic model.
    Topics(TopicsArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

/// Where data comes from: a service config, explicit files, or the bundled
/// synthetic corpus when neither is given.
#[derive(Debug, Args)]
struct DataArgs {
    /// Service config (TOML); uses its corpora, tables and defaults.
    #[arg(long, conflicts_with_all = ["corpus", "publishers", "clusters", "lexicon", "intensifiers", "negations", "stopwords"])]
    config: Option<PathBuf>,
    /// Corpus file (JSONL) loaded under `--event`.
    #[arg(long, requires = "publishers")]
    corpus: Option<PathBuf>,
    /// Publisher table: source_name,hq_country,political_alignment.
    #[arg(long, requires = "corpus")]
    publishers: Option<PathBuf>,
    /// Country → economic class table (default: bundled).
    #[arg(long)]
    clusters: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    intensifiers: Option<PathBuf>,
    #[arg(long)]
    negations: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl DataArgs {
    fn sources(&self, event: &str) -> Result<SnapshotSources, Box<dyn std::error::Error>> {
        if let Some(path) = &self.config {
            return Ok(SnapshotSources::from_config(&ServiceConfig::load(path)?)?);
        }
        let Some(corpus) = &self.corpus else { return Ok(SnapshotSources::bundled()) };
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
        let read_or = |p: &Option<PathBuf>, bundled: &str| p.as_deref().map_or_else(|| Ok(bundled.to_string()), read);
        Ok(SnapshotSources {
            corpora: vec![(event.to_string(), read(corpus)?)],
            publishers_csv: read(self.publishers.as_deref().expect("clap requires publishers"))?,
            clusters_csv: read_or(&self.clusters, ECONOMIC_CLUSTERS_CSV)?,
            lexicon_tsv: read_or(&self.lexicon, MICRO_LEXICON_TSV)?,
            intensifiers: read_or(&self.intensifiers, INTENSIFIERS_TXT)?,
            negations: read_or(&self.negations, NEGATIONS_TXT)?,
            rules: SentimentRules::default(),
            stopwords: read_or(&self.stopwords, STOPWORDS_TXT)?,
            defaults: Defaults::default(),
        })
    }

    fn snapshot(&self, event: &str) -> Result<Snapshot, Box<dyn std::error::Error>> {
        Ok(Snapshot::build(&self.sources(event)?)?)
    }
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    event: String,
    /// geographic, economic or political.
    #[arg(long)]
    barrier: Option<String>,
    /// Window start (inclusive), date or timestamp.
    #[arg(long)]
    from: Option<String>,
    /// Window end (exclusive).
    #[arg(long)]
    to: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn request(&self, analysis: AnalysisKind) -> AnalysisRequest {
        let mut r = AnalysisRequest::new(analysis).param("event", &self.event);
        for (key, value) in [("barrier", &self.barrier), ("from", &self.from), ("to", &self.to)] {
            if let Some(v) = value {
                r = r.param(key, v);
            }
        }
        r
    }
}

#[derive(Debug, Args)]
struct PropagateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Similarity threshold in [0, 1].
    #[arg(long)]
    tau: Option<String>,
    /// Longest gap between linked articles, e.g. 7d or 36h; `none` for no cap.
    #[arg(long)]
    max_lag: Option<String>,
    /// auto, concepts or tfidf.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Debug, Args)]
struct TrendsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// hour, day or week.
    #[arg(long)]
    bin: Option<String>,
    /// Running totals instead of per-bucket counts.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    cumulative: Option<String>,
}

#[derive(Debug, Args)]
struct SentimentArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct TopicsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    common: CommonArgs,
    /// Restrict to articles with this barrier label.
    #[arg(long)]
    label: Option<String>,
    /// Number of topics.
    #[arg(long)]
    k: Option<String>,
    /// Terms per topic.
    #[arg(long)]
    m: Option<String>,
}

#[derive(Debug, Args)]
struct EnrichArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    event: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Event tag for the corpus.
    #[arg(long)]
    event: String,
    /// Corpus file to write (JSONL).
    #[arg(long)]
    out: PathBuf,
    /// Local JSONL file to normalize.
    #[arg(long, conflicts_with = "client", required_unless_present = "client")]
    input: Option<PathBuf>,
    /// News API client config (TOML with endpoint and api_key).
    #[arg(long, requires_all = ["from", "to"])]
    client: Option<PathBuf>,
    /// Category filter (repeatable).
    #[arg(long = "category")]
    categories: Vec<String>,
    /// Concept filter (repeatable).
    #[arg(long = "concept")]
    concepts: Vec<String>,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's bind address.
    #[arg(long)]
    bind: Option<String>,
}

/// Runs the CLI on `argv` (program name first) and returns the exit code:
/// 0 on success, 1 on a failed command, 2 on a usage error.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let _ = tracing_subscriber::fmt().with_max_level(cli.log).with_writer(std::io::stderr).try_init();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Ingest(args) => ingest(args),
        Command::Enrich(args) => enrich(args),
        Command::Propagate(a) => {
            let mut r = a.common.request(AnalysisKind::Propagation);
            for (k, v) in [("tau", a.tau), ("max_lag", a.max_lag), ("mode", a.mode)] {
                r = with(r, k, v);
            }
            analyze(&a.data, &a.common, r)
        }
        Command::Trends(a) => {
            let r = with(with(a.common.request(AnalysisKind::Trends), "bin", a.bin), "cumulative", a.cumulative);
            analyze(&a.data, &a.common, r)
        }
        Command::Sentiment(a) => analyze(&a.data, &a.common, a.common.request(AnalysisKind::Sentiment)),
        Command::Topics(a) => {
            let mut r = a.common.request(AnalysisKind::Topics);
            for (k, v) in [("label", a.label), ("k", a.k), ("m", a.m)] {
                r = with(r, k, v);
            }
            analyze(&a.data, &a.common, r)
        }
        Command::Serve(args) => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve(args.config, args.bind, shutdown_signal()))?;
            Ok(())
        }
    }
}

fn with(r: AnalysisRequest, key: &str, value: Option<String>) -> AnalysisRequest {
    match value {
        Some(v) => r.param(key, v),
        None => r,
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes),
        None => std::io::stdout().lock().write_all(bytes),
    }
}

fn analyze(data: &DataArgs, common: &CommonArgs, request: AnalysisRequest) -> CliResult {
    let snapshot = data.snapshot(&common.event)?;
    let doc = snapshot.run(&request)?;
    write_output(common.out.as_deref(), &doc.to_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct CoverageReport<'a> {
    event: &'a str,
    articles: usize,
    load: Option<&'a LoadReport>,
    kinds: BTreeMap<BarrierKind, KindCoverage>,
    /// Article count per source without a publisher profile.
    unknown_publishers: BTreeMap<&'a str, usize>,
    warnings: &'a [String],
}

fn enrich(args: EnrichArgs) -> CliResult {
    let snapshot = Arc::new(args.data.snapshot(&args.event)?);
    let corpus = snapshot.corpus(&args.event)?;
    let db = snapshot.barriers();
    let mut unknown_publishers = BTreeMap::new();
    for a in corpus.articles().iter().filter(|a| db.publisher(&a.source_name).is_none()) {
        *unknown_publishers.entry(a.source_name.as_str()).or_default() += 1;
    }
    let report = CoverageReport {
        event: &args.event,
        articles: corpus.len(),
        load: snapshot.load_report(&args.event),
        kinds: coverage(corpus.articles(), db),
        unknown_publishers,
        warnings: db.warnings(),
    };
    for (kind, c) in &report.kinds {
        eprintln!("{:<10} known {:>6}  unknown {:>6}", kind.as_str(), c.known, c.unknown);
    }
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    write_output(args.out.as_deref(), &bytes)?;
    Ok(())
}

fn ingest(args: IngestArgs) -> CliResult {
    let corpus = if let Some(input) = &args.input {
        let (corpus, report) = load_corpus(input, &args.event)?;
        eprintln!(
            "read {} records: {} kept, {} malformed, {} duplicates",
            report.raw_records, report.retained, report.malformed, report.duplicates
        );
        for (line, err) in &report.errors {
            eprintln!("  line {line}: {err}");
        }
        corpus
    } else {
        let config = ClientConfig::load(args.client.as_deref().expect("clap requires input or client"))?;
        let bound = |raw: &Option<String>| {
            let raw = raw.as_deref().expect("clap requires from and to");
            parse_timestamp(raw).ok_or_else(|| format!("`{raw}` is not a date or timestamp"))
        };
        let window = TimeWindow::new(bound(&args.from)?, bound(&args.to)?)?;
        let query = RemoteQuery { categories: args.categories, concepts: args.concepts, window };
        let source = HttpPageSource::new(&config);
        let mut stream = fetch_remote(&source, query, &config);
        let articles = stream.by_ref().collect::<Result<Vec<_>, _>>()?;
        let (corpus, dups) = Corpus::from_articles(args.event.clone(), articles);
        eprintln!("fetched {} articles ({} skipped, {dups} duplicates)", corpus.len(), stream.skipped);
        corpus
    };
    corpus.save(&args.out)?;
    Ok(())
}
