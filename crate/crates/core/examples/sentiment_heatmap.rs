//! Lexicon scoring of single sentences, then the daily heatmap per
//! economic class over the bundled corpus.

use barrierlens::corpus::read_corpus;
use barrierlens::data::{ECONOMIC_CLUSTERS_CSV, SYNTHETIC_CORPUS_JSONL, SYNTHETIC_EVENT, SYNTHETIC_PUBLISHERS_CSV};
use barrierlens::sentiment::{classify, compound_score, first_sentences, sentiment_heatmap, Lexicon, SentimentRules};
use barrierlens::{BarrierKind, BarriersDb, TimeWindow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rules = SentimentRules::default();
    let lexicon = Lexicon::bundled(&rules);
    for text in [
        "Peace talks bring hope.",
        "The talks did not bring peace.",
        "A very deadly attack.",
        "Trucks crossed at noon.",
    ] {
        let score = compound_score(text, &lexicon, &rules);
        println!("{score:>+8.4} {:<9} {text}", format!("{:?}", classify(score)));
    }
    let body = "Dr. Haddad spoke first. Aid arrived. Fuel did not. Crowds waited. Night fell. Nobody slept.";
    println!("first five sentences: {:?}", first_sentences(body, 5));

    let (corpus, _) = read_corpus(SYNTHETIC_CORPUS_JSONL.as_bytes(), SYNTHETIC_EVENT, "bundled")?;
    let db = BarriersDb::from_csv_strs(SYNTHETIC_PUBLISHERS_CSV, ECONOMIC_CLUSTERS_CSV)?;
    let window = TimeWindow::covering(&corpus).expect("non-empty corpus");
    let heat = sentiment_heatmap(&corpus, &db, BarrierKind::Economic, &window, &lexicon, &rules);

    println!("\n{:<12}{}", "day", heat.labels.iter().map(|l| format!("{l:>8}")).collect::<String>());
    for (day, row) in heat.days.iter().zip(&heat.cells).take(10) {
        let cells: String = row
            .iter()
            .map(|c| match c {
                Some(v) => format!("{v:>+8.2}"),
                None => format!("{:>8}", "."),
            })
            .collect();
        println!("{day:<12}{cells}");
    }
    println!("({} days, '.' marks days without articles)", heat.days.len());
    Ok(())
}
