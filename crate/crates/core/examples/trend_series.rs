//! Daily and cumulative article counts per barrier label.
//!
//! ```text
//! cargo run --example trend_series -- [geographic|economic|political] [day|week|hour]
//! ```

use barrierlens::corpus::read_corpus;
use barrierlens::data::{ECONOMIC_CLUSTERS_CSV, SYNTHETIC_CORPUS_JSONL, SYNTHETIC_EVENT, SYNTHETIC_PUBLISHERS_CSV};
use barrierlens::time::{parse_timestamp, BinSize};
use barrierlens::trends::compute_trends;
use barrierlens::{BarrierKind, BarriersDb, TimeWindow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let kind: BarrierKind = args.next().as_deref().unwrap_or("political").parse()?;
    let bin: BinSize = args.next().as_deref().unwrap_or("week").parse()?;

    let (corpus, _) = read_corpus(SYNTHETIC_CORPUS_JSONL.as_bytes(), SYNTHETIC_EVENT, "bundled")?;
    let db = BarriersDb::from_csv_strs(SYNTHETIC_PUBLISHERS_CSV, ECONOMIC_CLUSTERS_CSV)?;
    let window = TimeWindow::new(parse_timestamp("2023-11-01").unwrap(), parse_timestamp("2023-11-29").unwrap())?;

    let plain = compute_trends(&corpus, &db, kind, &window, bin, false);
    let running = compute_trends(&corpus, &db, kind, &window, bin, true);
    println!("{:<18} {}", format!("{kind} / {bin}"), plain.bins.join("  "));
    for (label, counts) in &plain.series {
        let cells: Vec<String> = counts.iter().map(|c| format!("{c:>10}")).collect();
        println!("{label:<18}{}   total {}", cells.join(""), running.series[label].last().unwrap_or(&0));
    }
    println!("{} articles in window", plain.total());
    Ok(())
}
