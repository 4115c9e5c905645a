//! TF-IDF + Ward topics over the bundled corpus with coherence, diversity
//! and per-day topic counts.
//!
//! ```text
//! cargo run --release --example topic_model -- [K] [M]
//! ```

use barrierlens::corpus::read_corpus;
use barrierlens::data::{SYNTHETIC_CORPUS_JSONL, SYNTHETIC_EVENT};
use barrierlens::time::BinSize;
use barrierlens::topics::{fit_topics, temporal_topics, Stopwords, TopicConfig};
use barrierlens::TimeWindow;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let k = args.next().map(|v| v.parse()).transpose()?.unwrap_or(6);
    let m = args.next().map(|v| v.parse()).transpose()?.unwrap_or(8);

    let (corpus, _) = read_corpus(SYNTHETIC_CORPUS_JSONL.as_bytes(), SYNTHETIC_EVENT, "bundled")?;
    let model = fit_topics(&corpus, &Stopwords::bundled(), &TopicConfig { k, m, ..TopicConfig::default() })?;

    for topic in &model.topics {
        let terms: Vec<&str> = topic.terms.iter().map(|(t, _)| t.as_str()).collect();
        let coherence = topic.coherence.map_or("n/a".to_string(), |c| format!("{c:.3}"));
        println!("topic {:>2} ({:>3} docs, npmi {coherence}): {}", topic.id, topic.size, terms.join(" "));
    }
    println!(
        "mean coherence {}, diversity {:.3}, top merge height {:.3}",
        model.mean_coherence.map_or("n/a".into(), |c| format!("{c:.3}")),
        model.diversity,
        model.dendrogram.merges.last().map_or(0.0, |m| m.height)
    );

    let window = TimeWindow::covering(&corpus).expect("non-empty corpus");
    let series = temporal_topics(&model.assignment, corpus.articles(), &window, BinSize::Week);
    for (topic, counts) in series.counts.iter().enumerate() {
        println!("topic {topic:>2} per week: {counts:?}");
    }
    Ok(())
}
