//! Brute-force oracles and fixtures shared by the integration tests.
//! Nothing here calls the code under test's algorithms.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use barrierlens::corpus::read_corpus;
use barrierlens::data::{ECONOMIC_CLUSTERS_CSV, SYNTHETIC_CORPUS_JSONL, SYNTHETIC_EVENT, SYNTHETIC_PUBLISHERS_CSV};
use barrierlens::time::parse_timestamp;
use barrierlens::{Article, BarriersDb, Corpus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bundled_corpus() -> Corpus {
    read_corpus(SYNTHETIC_CORPUS_JSONL.as_bytes(), SYNTHETIC_EVENT, "bundled").unwrap().0
}

pub fn bundled_db() -> BarriersDb {
    BarriersDb::from_csv_strs(SYNTHETIC_PUBLISHERS_CSV, ECONOMIC_CLUSTERS_CSV).unwrap()
}

/// Random simple graph on `n` nodes as a sorted, deduplicated edge list.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn bfs_dist(n: usize, adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; n];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
        }
    }
    dist
}

/// Every shortest path from `s` to `t`, as node sequences.
fn all_shortest_paths(n: usize, adj: &[Vec<usize>], s: usize, t: usize) -> Vec<Vec<usize>> {
    let from_t = bfs_dist(n, adj, t);
    if from_t[s] == usize::MAX {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut stack = vec![vec![s]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        if last == t {
            out.push(path);
            continue;
        }
        for &w in &adj[last] {
            if from_t[w] + 1 == from_t[last] {
                let mut next = path.clone();
                next.push(w);
                stack.push(next);
            }
        }
    }
    out
}

/// Edge betweenness by explicit path enumeration: each unordered pair's
/// shortest paths share one unit of credit equally.
pub fn brute_betweenness(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut score = vec![0.0; edges.len()];
    for s in 0..n {
        for t in (s + 1)..n {
            let paths = all_shortest_paths(n, &adj, s, t);
            let share = 1.0 / paths.len().max(1) as f64;
            for path in &paths {
                for w in path.windows(2) {
                    let key = (w[0].min(w[1]), w[0].max(w[1]));
                    let e = edges.iter().position(|&x| x == key).unwrap();
                    score[e] += share;
                }
            }
        }
    }
    score
}

/// Sum of shortest-path lengths over connected unordered pairs.
pub fn total_path_length(n: usize, edges: &[(usize, usize)]) -> f64 {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    (0..n).map(|s| bfs_dist(n, &adj, s).iter().skip(s + 1).filter(|&&d| d != usize::MAX).sum::<usize>() as f64).sum()
}

fn sse(points: &[Vec<f64>], members: &[usize]) -> f64 {
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for &i in members {
        for (m, x) in mean.iter_mut().zip(&points[i]) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= members.len() as f64);
    members.iter().map(|&i| points[i].iter().zip(&mean).map(|(x, m)| (x - m) * (x - m)).sum::<f64>()).sum()
}

/// One naive Ward step record: merged cluster ids, height `sqrt(2·ΔSSE)`,
/// and the partition (as sorted leaf sets) after the merge.
pub struct OracleMerge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub partition: BTreeSet<Vec<usize>>,
}

/// Ward clustering by recomputing every pair's SSE increase from the raw
/// points at every step. Ties go to the smallest `(min id, max id)`.
pub fn naive_ward(points: &[Vec<f64>]) -> Vec<OracleMerge> {
    let n = points.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let mut best: Option<(f64, (usize, usize), usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let mut union = clusters[a].1.clone();
                union.extend(&clusters[b].1);
                let delta = sse(points, &union) - sse(points, &clusters[a].1) - sse(points, &clusters[b].1);
                let ids = (clusters[a].0.min(clusters[b].0), clusters[a].0.max(clusters[b].0));
                let better = match best {
                    None => true,
                    Some((d, key, _, _)) => delta < d - 1e-12 || ((delta - d).abs() <= 1e-12 && ids < key),
                };
                if better {
                    best = Some((delta, ids, a, b));
                }
            }
        }
        let (delta, ids, a, b) = best.unwrap();
        let mut merged = clusters[a].1.clone();
        merged.extend(&clusters[b].1);
        merged.sort_unstable();
        clusters.remove(b);
        clusters.remove(a);
        clusters.push((n + step, merged));
        out.push(OracleMerge {
            left: ids.0,
            right: ids.1,
            height: (2.0 * delta.max(0.0)).sqrt(),
            partition: clusters.iter().map(|(_, m)| m.clone()).collect(),
        });
    }
    out
}

/// Partition as sorted leaf sets from a flat assignment.
pub fn partition_of(assignment: &[usize]) -> BTreeSet<Vec<usize>> {
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); k];
    for (leaf, &c) in assignment.iter().enumerate() {
        groups[c].push(leaf);
    }
    groups.into_iter().filter(|g| !g.is_empty()).collect()
}

/// Minimal-SSE split of `points` into two non-empty groups, by enumerating
/// every subset containing point 0. Returns the side flag of each point.
pub fn best_two_partition(points: &[Vec<f64>]) -> (Vec<bool>, f64) {
    let n = points.len();
    let mut best = (Vec::new(), f64::INFINITY);
    for mask in 0u32..(1 << (n - 1)) {
        let side: Vec<bool> = (0..n).map(|i| i > 0 && mask & (1 << (i - 1)) != 0).collect();
        let a: Vec<usize> = (0..n).filter(|&i| !side[i]).collect();
        let b: Vec<usize> = (0..n).filter(|&i| side[i]).collect();
        if b.is_empty() {
            continue;
        }
        let total = sse(points, &a) + sse(points, &b);
        if total < best.1 {
            best = (side, total);
        }
    }
    best
}

/// Random article with concepts from a small vocabulary.
pub fn random_article(rng: &mut ChaCha8Rng, i: usize, vocab: usize, days: i64) -> Article {
    let base = parse_timestamp("2023-11-01").unwrap();
    let concepts: Vec<(String, f64)> = (0..rng.random_range(1..5))
        .map(|_| (format!("c{}", rng.random_range(0..vocab)), rng.random_range(1..100) as f64))
        .collect();
    Article {
        id: format!("r{i:03}"),
        title: format!("article {i}"),
        body: String::new(),
        source_name: "timesofisrael.com".into(),
        // Coarse hours so equal timestamps (id tie-break) are common.
        published_at: base + chrono::Duration::hours(rng.random_range(0..days * 24 / 6) * 6),
        concepts,
        categories: vec![],
    }
}

pub fn random_corpus(rng: &mut ChaCha8Rng, max_articles: usize) -> Corpus {
    let n = rng.random_range(1..=max_articles);
    let vocab = rng.random_range(3..12);
    Corpus::new("random", (0..n).map(|i| random_article(rng, i, vocab, 10)).collect::<Vec<_>>())
}

/// Cosine of two concept lists computed densely.
pub fn dense_cosine(a: &Article, b: &Article) -> f64 {
    let vocab: BTreeSet<String> = a.concepts.iter().chain(&b.concepts).map(|(c, _)| c.to_lowercase()).collect();
    let vec = |x: &Article| -> Vec<f64> {
        vocab.iter().map(|v| x.concepts.iter().filter(|(c, _)| c.to_lowercase() == *v).map(|(_, w)| w).sum()).collect()
    };
    let (u, v) = (vec(a), vec(b));
    let dot: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
    let nu: f64 = u.iter().map(|x| x * x).sum::<f64>();
    let nv: f64 = v.iter().map(|x| x * x).sum::<f64>();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        (dot / (nu * nv).sqrt()).clamp(0.0, 1.0)
    }
}

/// Kahn's algorithm; true when the directed graph has no cycle.
pub fn is_acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut indeg = vec![0; n];
    let mut out = vec![Vec::new(); n];
    for &(u, v) in edges {
        indeg[v] += 1;
        out[u].push(v);
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop_front() {
        seen += 1;
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    seen == n
}

/// Two disjoint 30-term vocabularies, `per_side` documents each.
pub fn two_vocabulary_corpus(rng: &mut ChaCha8Rng, per_side: usize) -> Corpus {
    let base = parse_timestamp("2023-11-01").unwrap();
    let mut articles = Vec::new();
    for side in ["alpha", "omega"] {
        for i in 0..per_side {
            let words: Vec<String> = (0..40).map(|_| format!("{side}{}", word(rng.random_range(0..30)))).collect();
            articles.push(Article {
                id: format!("{side}-{i:02}"),
                title: String::new(),
                body: words.join(" "),
                source_name: "s".into(),
                published_at: base + chrono::Duration::hours(rng.random_range(0..240)),
                concepts: vec![],
                categories: vec![],
            });
        }
    }
    Corpus::new("two-vocab", articles)
}

/// Letters-only suffix so tokens are not dropped as numbers.
fn word(i: usize) -> String {
    let letters = b"abcdefghijklmnopqrstuvwxyz";
    format!("{}{}", letters[i % 26] as char, letters[(i / 26) % 26] as char)
}
