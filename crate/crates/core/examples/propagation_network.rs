//! Builds the feed-forward similarity graph over the bundled synthetic
//! corpus and splits it into Girvan–Newman communities.
//!
//! ```text
//! cargo run --release --example propagation_network -- [TAU] [concepts|tfidf]
//! ```

use std::time::Instant;

use barrierlens::corpus::read_corpus;
use barrierlens::data::{ECONOMIC_CLUSTERS_CSV, SYNTHETIC_CORPUS_JSONL, SYNTHETIC_EVENT, SYNTHETIC_PUBLISHERS_CSV};
use barrierlens::propagation::{build_graph, PropagationConfig, StopRule, VectorMode};
use barrierlens::topics::Stopwords;
use barrierlens::{BarrierKind, BarriersDb};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let tau: Option<f64> = args.next().map(|t| t.parse()).transpose()?;
    let (corpus, _) = read_corpus(SYNTHETIC_CORPUS_JSONL.as_bytes(), SYNTHETIC_EVENT, "bundled")?;
    let mode = match args.next() {
        Some(m) => m.parse()?,
        None => VectorMode::auto(&corpus),
    };
    let db = BarriersDb::from_csv_strs(SYNTHETIC_PUBLISHERS_CSV, ECONOMIC_CLUSTERS_CSV)?;
    let mut config = PropagationConfig::for_mode(mode);
    if let Some(tau) = tau {
        config.tau = tau;
    }

    let started = Instant::now();
    let graph = build_graph(&corpus, &db, BarrierKind::Economic, &config, &Stopwords::bundled())?;
    let built = started.elapsed();
    let partition = graph.communities(StopRule::MaxModularity)?;
    println!(
        "{} articles, {} edges ({mode:?}, tau {}), built in {built:.2?}",
        graph.nodes.len(),
        graph.edges.len(),
        config.tau
    );
    println!(
        "{} communities, modularity {:.4}, total {:.2?}",
        partition.communities.len(),
        partition.modularity,
        started.elapsed()
    );

    let mut sizes: Vec<&Vec<usize>> = partition.communities.iter().filter(|c| c.len() > 1).collect();
    sizes.sort_by_key(|c| std::cmp::Reverse(c.len()));
    for members in sizes.iter().take(5) {
        let first = &graph.nodes[members[0]];
        let mut labels: Vec<&str> = members.iter().map(|&i| graph.nodes[i].label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        println!(
            "  {:>3} articles from {} starting {} ({})",
            members.len(),
            first.published_at.date_naive(),
            first.id,
            labels.join(", ")
        );
    }
    Ok(())
}
