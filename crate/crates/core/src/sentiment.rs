//! Lexicon sentiment scoring of article openings.
//!
//! Scores sum token valences after intensifier boosts and negation flips,
//! then squash the raw sum with `x / sqrt(x² + alpha)`. Articles are scored
//! on their first five sentences (the title when the body is empty) and
//! classified with a ±0.1 neutral band.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::barriers::{assign_barrier, BarrierKind, BarriersDb};
use crate::corpus::{Article, Corpus, TimeWindow};
use crate::data::{INTENSIFIERS_TXT, MICRO_LEXICON_TSV, NEGATIONS_TXT};
use crate::time::{BinSize, BucketAxis};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("token `{0}` is both a valence word and an intensifier")]
    RoleConflict(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Boost decay for intensifiers one, two and three tokens back.
const INTENSIFIER_DECAY: [f64; 3] = [1.0, 0.95, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SentimentRules {
    pub negation_window: usize,
    pub negation_factor: f64,
    pub intensifier_increment: f64,
    pub normalization_alpha: f64,
}

impl Default for SentimentRules {
    fn default() -> Self {
        SentimentRules {
            negation_window: 3,
            negation_factor: -0.74,
            intensifier_increment: 0.293,
            normalization_alpha: 15.0,
        }
    }
}

impl SentimentRules {
    pub fn validate(&self) -> Result<(), String> {
        if self.negation_window == 0 {
            return Err("negation_window must be at least 1".into());
        }
        if self.normalization_alpha.is_nan() || self.normalization_alpha <= 0.0 {
            return Err("normalization_alpha must be positive".into());
        }
        Ok(())
    }
}

/// Valence words, intensifiers and negations; all keyed lowercase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    valence: HashMap<String, f64>,
    intensifiers: HashMap<String, f64>,
    negations: HashSet<String>,
}

fn data_lines(raw: &str) -> impl Iterator<Item = (usize, &str)> {
    raw.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

impl Lexicon {
    /// `valence_tsv` is `token<TAB>valence[<TAB>...]` (extra columns ignored).
    /// Intensifier lines are `token` or `token<TAB|space>boost`; a bare token
    /// gets `increment`. Negations are one token per line.
    pub fn parse(valence_tsv: &str, intensifiers: &str, negations: &str, increment: f64) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::default();
        for (line, l) in data_lines(valence_tsv) {
            let mut cols = l.split('\t');
            let token = cols.next().unwrap_or_default().trim().to_lowercase();
            let value =
                cols.next().and_then(|v| v.trim().parse::<f64>().ok()).filter(|v| v.is_finite()).ok_or_else(|| {
                    LexiconError::Parse { line, message: format!("expected token<TAB>valence, got `{l}`") }
                })?;
            lex.valence.insert(token, value);
        }
        for (line, l) in data_lines(intensifiers) {
            let mut cols = l.split_whitespace();
            let token = cols.next().unwrap_or_default().to_lowercase();
            let boost = match cols.next() {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| LexiconError::Parse { line, message: format!("bad intensifier boost `{v}`") })?,
                None => increment,
            };
            if lex.valence.contains_key(&token) {
                return Err(LexiconError::RoleConflict(token));
            }
            lex.intensifiers.insert(token, boost);
        }
        lex.negations = data_lines(negations).map(|(_, l)| normalize_token(l)).collect();
        Ok(lex)
    }

    /// The bundled 40-token micro-lexicon with its intensifier and negation
    /// lists.
    pub fn bundled(rules: &SentimentRules) -> Self {
        Self::parse(MICRO_LEXICON_TSV, INTENSIFIERS_TXT, NEGATIONS_TXT, rules.intensifier_increment)
            .expect("bundled lexicon parses")
    }

    pub fn load(
        valence_path: &Path,
        intensifiers_path: Option<&Path>,
        negations_path: Option<&Path>,
        rules: &SentimentRules,
    ) -> Result<Self, LexiconError> {
        let read = |p: &Path| {
            fs::read_to_string(p)
                .map_err(|e| LexiconError::Io { path: p.display().to_string(), message: e.to_string() })
        };
        let valence = read(valence_path)?;
        let intensifiers = intensifiers_path.map(read).transpose()?.unwrap_or_else(|| INTENSIFIERS_TXT.to_string());
        let negations = negations_path.map(read).transpose()?.unwrap_or_else(|| NEGATIONS_TXT.to_string());
        Self::parse(&valence, &intensifiers, &negations, rules.intensifier_increment)
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.valence.get(&token.to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.valence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valence.is_empty()
    }

    fn is_negation(&self, token: &str) -> bool {
        self.negations.contains(token) || token.ends_with("n't")
    }
}

fn normalize_token(raw: &str) -> String {
    raw.trim().replace('\u{2019}', "'").to_lowercase()
}

fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| normalize_token(w.trim_matches(|c: char| !c.is_alphanumeric() && c != '\'')))
        .map(|w| w.trim_matches('\'').to_string())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Largest f64 below 1; huge raw sums would otherwise round to ±1.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Compound score, strictly inside `(-1, 1)`.
pub fn compound_score(text: &str, lexicon: &Lexicon, rules: &SentimentRules) -> f64 {
    let toks = tokens(text);
    let mut raw = 0.0;
    for (i, tok) in toks.iter().enumerate() {
        let Some(v) = lexicon.valence.get(tok).copied() else { continue };
        let sign = if v < 0.0 { -1.0 } else { 1.0 };
        let mut s = v;
        for (back, decay) in INTENSIFIER_DECAY.iter().enumerate() {
            let Some(j) = i.checked_sub(back + 1) else { break };
            if let Some(boost) = lexicon.intensifiers.get(&toks[j]) {
                s += boost * sign * decay;
            }
        }
        for back in 1..=rules.negation_window {
            let Some(j) = i.checked_sub(back) else { break };
            if lexicon.is_negation(&toks[j]) {
                s *= rules.negation_factor;
            }
        }
        raw += s;
    }
    (raw / (raw * raw + rules.normalization_alpha).sqrt()).clamp(-BELOW_ONE, BELOW_ONE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentClass {
    Negative,
    Neutral,
    Positive,
}

/// Below −0.1 negative, above 0.1 positive, neutral in between (inclusive).
pub fn classify(compound: f64) -> SentimentClass {
    if compound < -0.1 {
        SentimentClass::Negative
    } else if compound > 0.1 {
        SentimentClass::Positive
    } else {
        SentimentClass::Neutral
    }
}

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "gen", "col", "lt", "sgt", "capt", "gov", "sen", "rep", "pres",
    "vs", "etc", "inc", "ltd", "co", "corp", "no", "u.s", "u.k", "u.n", "e.g", "i.e", "jan", "feb", "mar", "apr",
    "aug", "sept", "sep", "oct", "nov", "dec", "approx", "est",
];

fn is_abbreviation(word: &str) -> bool {
    let w = word.trim_start_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
    let w = w.trim_end_matches('.');
    (w.chars().count() == 1 && w.chars().all(char::is_alphabetic)) || ABBREVIATIONS.contains(&w)
}

/// The first `n` sentences of `text`. A sentence ends at `.`, `!` or `?`
/// followed by whitespace, unless the word before a period is a known
/// abbreviation or a single-letter initial.
pub fn first_sentences(text: &str, n: usize) -> &str {
    let text = text.trim();
    if n == 0 {
        return "";
    }
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut found = 0;
    for (k, &(pos, c)) in bytes.iter().enumerate() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let next = bytes.get(k + 1).map(|&(_, c)| c);
        if !next.is_none_or(char::is_whitespace) {
            continue;
        }
        if c == '.' {
            let word_start = text[..pos].rfind(char::is_whitespace).map_or(0, |i| i + 1);
            if is_abbreviation(&text[word_start..pos]) {
                continue;
            }
        }
        found += 1;
        if found == n {
            return text[..pos + c.len_utf8()].trim_end();
        }
    }
    text
}

/// Text scored for an article: the opening of the body, or the title when
/// the body is empty.
pub fn scoring_text(article: &Article) -> &str {
    if article.body.trim().is_empty() {
        article.title.trim()
    } else {
        first_sentences(&article.body, 5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentRecord {
    pub id: String,
    pub compound: f64,
    pub class: SentimentClass,
}

pub fn score_article(article: &Article, lexicon: &Lexicon, rules: &SentimentRules) -> SentimentRecord {
    let compound = compound_score(scoring_text(article), lexicon, rules);
    SentimentRecord { id: article.id.clone(), compound, class: classify(compound) }
}

/// Mean compound score per (day, label). Absent cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentHeatmap {
    pub kind: BarrierKind,
    pub days: Vec<String>,
    pub labels: Vec<String>,
    /// `cells[day][label]`.
    pub cells: Vec<Vec<Option<f64>>>,
    /// Articles behind each cell.
    pub counts: Vec<Vec<u64>>,
    /// Negative/neutral/positive article counts per label.
    pub classes: BTreeMap<String, [u64; 3]>,
}

/// Daily mean sentiment per barrier label over `window`. Labels are those
/// seen anywhere in `corpus`.
pub fn sentiment_heatmap(
    corpus: &Corpus,
    db: &BarriersDb,
    kind: BarrierKind,
    window: &TimeWindow,
    lexicon: &Lexicon,
    rules: &SentimentRules,
) -> SentimentHeatmap {
    let axis = BucketAxis::covering(window.start(), window.end(), BinSize::Day);
    let labels: Vec<String> = corpus
        .articles()
        .iter()
        .map(|a| assign_barrier(a, kind, db).bucket().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let col: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut sums = vec![vec![0.0f64; labels.len()]; axis.len];
    let mut counts = vec![vec![0u64; labels.len()]; axis.len];
    let mut classes: BTreeMap<String, [u64; 3]> = labels.iter().map(|l| (l.clone(), [0; 3])).collect();
    for article in corpus.articles().iter().filter(|a| window.contains(a.published_at)) {
        let label = assign_barrier(article, kind, db);
        let (day, c) = (axis.index_of(article.published_at).expect("inside window"), col[label.bucket()]);
        let record = score_article(article, lexicon, rules);
        sums[day][c] += record.compound;
        counts[day][c] += 1;
        classes.get_mut(label.bucket()).unwrap()[record.class as usize] += 1;
    }
    let cells = sums
        .iter()
        .zip(&counts)
        .map(|(s, n)| s.iter().zip(n).map(|(&s, &n)| (n > 0).then(|| s / n as f64)).collect())
        .collect();
    SentimentHeatmap { kind, days: axis.labels(), labels, cells, counts, classes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ECONOMIC_CLUSTERS_CSV;
    use crate::time::parse_timestamp;
    use proptest::prelude::*;

    fn lex() -> Lexicon {
        Lexicon::bundled(&SentimentRules::default())
    }

    #[test]
    fn bundled_lexicon_has_forty_tokens() {
        assert_eq!(lex().len(), 40);
        assert_eq!(lex().valence("PEACE"), Some(2.0));
    }

    #[test]
    fn role_conflict_rejected() {
        assert_eq!(Lexicon::parse("very\t1.0\n", "very\n", "", 0.293), Err(LexiconError::RoleConflict("very".into())));
        assert!(matches!(Lexicon::parse("oops\n", "", "", 0.293), Err(LexiconError::Parse { line: 1, .. })));
    }

    #[test]
    fn vader_style_extra_columns_accepted() {
        let l = Lexicon::parse("good\t1.9\t0.9434\t[2, 2, 1]\n", "", "", 0.293).unwrap();
        assert_eq!(l.valence("good"), Some(1.9));
    }

    #[test]
    fn no_lexicon_tokens_is_zero() {
        assert_eq!(compound_score("The convoy moved north on Tuesday", &lex(), &SentimentRules::default()), 0.0);
        assert_eq!(compound_score("", &lex(), &SentimentRules::default()), 0.0);
    }

    #[test]
    fn single_token() {
        let v = compound_score("peace", &lex(), &SentimentRules::default());
        assert!((v - 2.0 / 19f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn negated_token() {
        let v = compound_score("not good", &lex(), &SentimentRules::default());
        let raw = 1.9 * -0.74;
        assert!((raw - -1.406f64).abs() < 1e-12);
        assert!((v - raw / (raw * raw + 15.0f64).sqrt()).abs() < 1e-12);
        assert!((v - -0.3412).abs() < 1e-4);
        // outside the window: no flip
        let far = compound_score("not one two three good", &lex(), &SentimentRules::default());
        assert!(far > 0.0);
        assert!(compound_score("it isn't good", &lex(), &SentimentRules::default()) < 0.0);
    }

    #[test]
    fn intensifier_boosts_magnitude() {
        let r = SentimentRules::default();
        let plain = compound_score("good", &lex(), &r);
        let boosted = compound_score("very good", &lex(), &r);
        let raw: f64 = 1.9 + 0.293;
        assert!((boosted - raw / (raw * raw + 15.0).sqrt()).abs() < 1e-12);
        assert!(boosted > plain);
        assert!(compound_score("very bad", &lex(), &r) < compound_score("bad", &lex(), &r));
    }

    #[test]
    fn classify_boundaries() {
        assert_eq!(classify(-0.2), SentimentClass::Negative);
        assert_eq!(classify(0.0), SentimentClass::Neutral);
        assert_eq!(classify(0.1), SentimentClass::Neutral);
        assert_eq!(classify(-0.1), SentimentClass::Neutral);
        assert_eq!(classify(0.25), SentimentClass::Positive);
    }

    #[test]
    fn sentence_splitting() {
        assert_eq!(first_sentences("One. Two! Three?", 5), "One. Two! Three?");
        let seven = "S1. S2. S3. S4. S5. S6. S7.";
        assert_eq!(first_sentences(seven, 5), "S1. S2. S3. S4. S5.");
        assert_eq!(first_sentences("", 5), "");
        assert_eq!(
            first_sentences("Mr. Smith met Dr. Jones in the U.S. today. Then left.", 1),
            "Mr. Smith met Dr. Jones in the U.S. today."
        );
        assert_eq!(first_sentences("Version 2.5 shipped. Done.", 1), "Version 2.5 shipped.");
    }

    #[test]
    fn title_fallback() {
        let a = Article {
            id: "a".into(),
            title: "Great relief".into(),
            body: "  ".into(),
            source_name: "s".into(),
            published_at: parse_timestamp("2023-11-01").unwrap(),
            concepts: vec![],
            categories: vec![],
        };
        assert_eq!(scoring_text(&a), "Great relief");
        assert_eq!(score_article(&a, &lex(), &SentimentRules::default()).class, SentimentClass::Positive);
    }

    fn art(id: &str, day: u32, body: &str) -> Article {
        Article {
            id: id.into(),
            title: String::new(),
            body: body.into(),
            source_name: "il.example".into(),
            published_at: parse_timestamp(&format!("2023-11-{day:02}T09:00:00Z")).unwrap(),
            concepts: vec![],
            categories: vec![],
        }
    }

    fn db() -> BarriersDb {
        BarriersDb::from_csv_strs(
            "source_name,hq_country,political_alignment\nil.example,Israel,center-left\n",
            ECONOMIC_CLUSTERS_CSV,
        )
        .unwrap()
    }

    fn window() -> TimeWindow {
        TimeWindow::new(parse_timestamp("2023-11-01").unwrap(), parse_timestamp("2023-11-04").unwrap()).unwrap()
    }

    #[test]
    fn heatmap_cells() {
        let rules = SentimentRules::default();
        let corpus = Corpus::new("e", [art("a", 2, "peace"), art("b", 3, "good"), art("c", 3, "bad")]);
        let h = sentiment_heatmap(&corpus, &db(), BarrierKind::Economic, &window(), &lex(), &rules);
        assert_eq!(h.labels, ["C1"]);
        assert_eq!(h.cells[0][0], None);
        assert!((h.cells[1][0].unwrap() - 2.0 / 19f64.sqrt()).abs() < 1e-12);
        let mean = (compound_score("good", &lex(), &rules) + compound_score("bad", &lex(), &rules)) / 2.0;
        assert!((h.cells[2][0].unwrap() - mean).abs() < 1e-12);
        assert_eq!(h.counts[2][0], 2);
    }

    #[test]
    fn heatmap_opposite_scores_average_to_zero() {
        let lexicon = Lexicon::parse("up\t1.0\ndown\t-1.0\n", "", "", 0.293).unwrap();
        let corpus = Corpus::new("e", [art("a", 1, "up"), art("b", 1, "down")]);
        let h =
            sentiment_heatmap(&corpus, &db(), BarrierKind::Economic, &window(), &lexicon, &SentimentRules::default());
        assert_eq!(h.cells[0][0], Some(0.0));
    }

    #[test]
    fn heatmap_empty_corpus() {
        let h = sentiment_heatmap(
            &Corpus::new("e", []),
            &db(),
            BarrierKind::Economic,
            &window(),
            &lex(),
            &SentimentRules::default(),
        );
        assert_eq!(h.days.len(), 3);
        assert!(h.cells.iter().flatten().all(Option::is_none));
    }

    proptest! {
        #[test]
        fn bounded_and_signed(words in prop::collection::vec(prop::sample::select(vec![
            "good", "war", "very", "not", "peace", "kill", "the", "no", "extremely", "relief", "crisis",
        ]), 0..60)) {
            let text = words.join(" ");
            let v = compound_score(&text, &lex(), &SentimentRules::default());
            prop_assert!(v > -1.0 && v < 1.0);
            prop_assert_eq!(v, compound_score(&text, &lex(), &SentimentRules::default()));
        }

        #[test]
        fn positive_only_scores_positive(words in prop::collection::vec(prop::sample::select(vec!["good", "peace", "hope", "relief", "win"]), 1..30)) {
            prop_assert!(compound_score(&words.join(" "), &lex(), &SentimentRules::default()) > 0.0);
        }

        #[test]
        fn negative_only_scores_negative(words in prop::collection::vec(prop::sample::select(vec!["war", "kill", "crisis", "bomb", "fear"]), 1..30)) {
            prop_assert!(compound_score(&words.join(" "), &lex(), &SentimentRules::default()) < 0.0);
        }
    }
}
