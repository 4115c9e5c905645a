//! Writes the synthetic corpus and its publisher table.
//!
//! ```text
//! cargo run --example synthetic_corpus -- [OUT_DIR] [ARTICLES] [SEED]
//! ```

use std::path::PathBuf;

use barrierlens::synthetic::{generate, publishers_csv, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data").into()));
    let mut spec = SyntheticSpec::default();
    if let Some(n) = args.next() {
        spec.articles = n.parse()?;
    }
    if let Some(seed) = args.next() {
        spec.seed = seed.parse()?;
    }
    let corpus = generate(&spec);
    std::fs::create_dir_all(&out)?;
    let name = if spec.articles == 500 {
        "synthetic_500.jsonl".to_string()
    } else {
        format!("synthetic_{}.jsonl", spec.articles)
    };
    corpus.save(out.join(&name))?;
    std::fs::write(out.join("synthetic_publishers.csv"), publishers_csv())?;
    let (first, last) = corpus.span().expect("non-empty");
    println!("{} articles, {} .. {}, written to {}", corpus.len(), first, last, out.join(name).display());
    Ok(())
}
