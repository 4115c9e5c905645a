//! Data files bundled into the library.

/// Country → economic class, as published (`country,class`).
pub const ECONOMIC_CLUSTERS_CSV: &str = include_str!("../data/economic_clusters.csv");

/// Alias (ISO alpha-2/alpha-3 codes and common variants) → country name.
pub const COUNTRY_ALIASES_CSV: &str = include_str!("../data/country_aliases.csv");

/// 40-token valence lexicon, `token<TAB>valence`.
pub const MICRO_LEXICON_TSV: &str = include_str!("../data/micro_lexicon.tsv");
pub const INTENSIFIERS_TXT: &str = include_str!("../data/intensifiers.txt");
pub const NEGATIONS_TXT: &str = include_str!("../data/negations.txt");

/// English stopwords, one per line.
pub const STOPWORDS_TXT: &str = include_str!("../data/stopwords.txt");

/// 500-article synthetic corpus and the publishers it references.
pub const SYNTHETIC_CORPUS_JSONL: &str = include_str!("../data/synthetic_500.jsonl");
pub const SYNTHETIC_PUBLISHERS_CSV: &str = include_str!("../data/synthetic_publishers.csv");
pub const SYNTHETIC_EVENT: &str = "israel-hamas-war";
