use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::text::TokenizedDoc;
use super::TopicError;

/// A ranked `(term, score)` list for one topic.
pub type RankedTerms = Vec<(String, f64)>;

/// Class-based term scoring over the concatenated documents of each topic:
/// `tf(t,c) · ln(1 + A / f(t))`, with `f(t)` the term's count over all
/// classes and `A` the mean class token count. Keeps the top `m` per class;
/// equal scores are ordered alphabetically.
pub fn topic_terms(assignment: &[usize], docs: &[TokenizedDoc], m: usize) -> Vec<RankedTerms> {
    let k = assignment.iter().copied().max().map_or(0, |c| c + 1);
    let mut per_class: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); k];
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    let mut tokens = 0usize;
    for (doc, &c) in docs.iter().zip(assignment) {
        for t in &doc.tokens {
            *per_class[c].entry(t).or_default() += 1;
            *totals.entry(t).or_default() += 1;
            tokens += 1;
        }
    }
    if k == 0 {
        return Vec::new();
    }
    let mean_class_tokens = tokens as f64 / k as f64;
    per_class
        .into_iter()
        .map(|counts| {
            let mut scored: RankedTerms = counts
                .into_iter()
                .map(|(t, tf)| (t.to_string(), tf as f64 * (1.0 + mean_class_tokens / totals[t] as f64).ln()))
                .collect();
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            scored.truncate(m);
            scored
        })
        .collect()
}

/// Mean NPMI over term pairs `i < j`, with probabilities from boolean
/// document occurrence:
/// `NPMI = ln((P(a,b)+ε) / (P(a)P(b))) / −ln(P(a,b)+ε)`.
///
/// Terms found in no document are left out of the pairs. A pair present in
/// every document scores 1. Errors only when fewer than two usable terms
/// remain.
pub fn npmi_coherence(terms: &[String], docs: &[TokenizedDoc], epsilon: f64) -> Result<f64, TopicError> {
    let n = docs.len() as f64;
    let sets: Vec<HashSet<&str>> = docs.iter().map(|d| d.tokens.iter().map(String::as_str).collect()).collect();
    let mut usable = Vec::new();
    for t in terms {
        let hits: Vec<bool> = sets.iter().map(|s| s.contains(t.as_str())).collect();
        if hits.iter().any(|&h| h) {
            usable.push(hits);
        } else {
            tracing::warn!(term = %t, "term occurs in no document; excluded from coherence");
        }
    }
    if usable.len() < 2 {
        return Err(TopicError::DegenerateTerm { usable: usable.len() });
    }
    let count = |v: &[bool]| v.iter().filter(|&&h| h).count() as f64;
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..usable.len() {
        for j in (i + 1)..usable.len() {
            let joint = usable[i].iter().zip(&usable[j]).filter(|(&a, &b)| a && b).count() as f64 / n;
            let (pi, pj) = (count(&usable[i]) / n, count(&usable[j]) / n);
            let npmi = if joint >= 1.0 {
                1.0
            } else {
                let pj_eps = joint + epsilon;
                ((pj_eps / (pi * pj)).ln() / -pj_eps.ln()).clamp(-1.0, 1.0)
            };
            total += npmi;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Fraction of distinct terms across all topics' top-`m` lists:
/// `|∪ terms| / (k·m)`.
pub fn topic_diversity(topics: &[RankedTerms], m: usize) -> f64 {
    if topics.is_empty() || m == 0 {
        return 0.0;
    }
    let unique: BTreeSet<&str> = topics.iter().flat_map(|t| t.iter().take(m).map(|(w, _)| w.as_str())).collect();
    unique.len() as f64 / (topics.len() * m) as f64
}
