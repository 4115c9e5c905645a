//! Pages through a news source with retries, then writes and reloads the
//! resulting corpus file.
//!
//! The source here is an in-memory fixture that fails twice before
//! answering; swap in `HttpPageSource::new(&ClientConfig::load(path)?)` to
//! talk to a real endpoint.

use std::time::Duration;

use barrierlens::corpus::remote::{fetch_remote, ClientConfig, FixturePageSource, RemoteQuery};
use barrierlens::corpus::{load_corpus, read_corpus, Corpus, TimeWindow};
use barrierlens::data::{SYNTHETIC_CORPUS_JSONL, SYNTHETIC_EVENT};
use barrierlens::time::parse_timestamp;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (bundled, _) = read_corpus(SYNTHETIC_CORPUS_JSONL.as_bytes(), SYNTHETIC_EVENT, "bundled")?;
    let source = FixturePageSource::new(bundled.articles().to_vec()).fail_with([503, 429]);

    let mut config = ClientConfig::new("https://news.example/api/articles", "demo-key", 50);
    config.backoff_ms = 10;
    let query = RemoteQuery {
        categories: vec!["Humanitarian crisis".into()],
        concepts: vec![],
        window: TimeWindow::new(parse_timestamp("2023-11-01").unwrap(), parse_timestamp("2023-11-15").unwrap())?,
    };

    let mut stream = fetch_remote(&source, query, &config).with_sleep(|d: Duration| std::thread::sleep(d));
    let articles = stream.by_ref().collect::<Result<Vec<_>, _>>()?;
    println!("fetched {} articles over page requests {:?}", articles.len(), source.requests());

    let (corpus, duplicates) = Corpus::from_articles("humanitarian-first-half", articles);
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("corpus.jsonl");
    corpus.save(&path)?;

    let (reloaded, report) = load_corpus(&path, corpus.event_tag())?;
    assert_eq!(reloaded, corpus);
    println!(
        "wrote {} ({} duplicates dropped); reload kept {} of {} records",
        path.display(),
        duplicates,
        report.retained,
        report.raw_records
    );
    Ok(())
}
