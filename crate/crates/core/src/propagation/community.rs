use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CommunityError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("edge ({0}, {1}) references a missing node")]
    BadEdge(usize, usize),
}

/// Simple undirected graph with unit edge weights. Edges are stored with
/// `u < v`; self-loops and duplicates are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct UndirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl UndirectedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, CommunityError> {
        let mut list: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(CommunityError::BadEdge(a, b));
            }
            if a != b {
                list.push((a.min(b), a.max(b)));
            }
        }
        list.sort_unstable();
        list.dedup();
        let mut adj = vec![Vec::new(); n];
        for (e, &(u, v)) in list.iter().enumerate() {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        Ok(UndirectedGraph { n, edges: list, adj })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    /// Connected components over the edges flagged alive, each sorted, ordered
    /// by smallest member.
    fn components(&self, alive: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = self.reach(start, alive);
            comp.iter().for_each(|&x| seen[x] = true);
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn reach(&self, start: usize, alive: &[bool]) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut out = vec![start];
        while let Some(x) = stack.pop() {
            for &(y, e) in &self.adj[x] {
                if alive[e] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                    out.push(y);
                }
            }
        }
        out
    }

    /// Adds the Brandes edge credit from each of `sources` into `scores`,
    /// counting every ordered pair (so each unordered pair twice).
    fn accumulate(&self, sources: &[usize], alive: &[bool], scores: &mut [f64]) {
        let n = self.n;
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![usize::MAX; n];
        let mut delta = vec![0.0f64; n];
        let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        for &s in sources {
            for &v in &order {
                sigma[v] = 0.0;
                dist[v] = usize::MAX;
                delta[v] = 0.0;
                preds[v].clear();
            }
            order.clear();
            sigma[s] = 1.0;
            dist[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &(w, e) in &self.adj[v] {
                    if !alive[e] {
                        continue;
                    }
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push((v, e));
                    }
                }
            }
            for &w in order.iter().rev() {
                for &(v, e) in &preds[w] {
                    let credit = sigma[v] / sigma[w] * (1.0 + delta[w]);
                    scores[e] += credit;
                    delta[v] += credit;
                }
            }
        }
    }
}

/// Edge betweenness over unweighted shortest paths: for every unordered node
/// pair, each shortest path between them contributes `1 / #paths` to each
/// of its edges. Indexed like [`UndirectedGraph::edges`].
pub fn edge_betweenness(graph: &UndirectedGraph) -> Vec<f64> {
    let alive = vec![true; graph.edges.len()];
    let mut scores = vec![0.0; graph.edges.len()];
    let sources: Vec<usize> = (0..graph.n).collect();
    graph.accumulate(&sources, &alive, &mut scores);
    scores.iter_mut().for_each(|s| *s /= 2.0);
    scores
}

/// Newman–Girvan modularity of `communities` on `graph` (unit weights).
/// Zero for a graph without edges.
pub fn modularity(graph: &UndirectedGraph, communities: &[Vec<usize>]) -> f64 {
    let m = graph.edges.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut community_of = vec![usize::MAX; graph.n];
    for (c, members) in communities.iter().enumerate() {
        for &v in members {
            community_of[v] = c;
        }
    }
    let mut internal = vec![0.0; communities.len()];
    let mut degree = vec![0.0; communities.len()];
    for &(u, v) in &graph.edges {
        if community_of[u] == community_of[v] {
            internal[community_of[u]] += 1.0;
        }
        degree[community_of[u]] += 1.0;
        degree[community_of[v]] += 1.0;
    }
    internal.iter().zip(&degree).map(|(l, d)| l / m - (d / (2.0 * m)).powi(2)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "count")]
pub enum StopRule {
    /// Best-modularity partition over the whole removal sequence.
    MaxModularity,
    /// First partition with at least this many components.
    TargetCount(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityPartition {
    /// Node indices per community, sorted; communities ordered by smallest
    /// member.
    pub communities: Vec<Vec<usize>>,
    pub modularity: f64,
}

impl CommunityPartition {
    pub fn community_of(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (c, members) in self.communities.iter().enumerate() {
            for &v in members {
                out[v] = c;
            }
        }
        out
    }
}

/// Result of a Girvan–Newman run.
#[derive(Debug, Clone, PartialEq)]
pub struct GirvanNewmanRun {
    pub partition: CommunityPartition,
    /// Edge indices in the order they were removed.
    pub removal_order: Vec<usize>,
    /// Betweenness of each removed edge at the moment of removal.
    pub removal_scores: Vec<f64>,
}

/// Girvan–Newman with edges tie-broken by their endpoints' index pair.
pub fn girvan_newman(graph: &UndirectedGraph, stop: StopRule) -> Result<CommunityPartition, CommunityError> {
    let keys: Vec<(usize, usize)> = graph.edges.clone();
    girvan_newman_run(graph, stop, &keys).map(|r| r.partition)
}

/// Repeatedly removes the edge of highest betweenness, recomputing scores
/// inside the component that lost the edge, and tracks the component
/// partition. Scores within a relative 1e-9 count as tied; ties go to the
/// smallest `tie_key`. Modularity is always measured on the original graph.
pub fn girvan_newman_run<K: Ord>(
    graph: &UndirectedGraph,
    stop: StopRule,
    tie_keys: &[K],
) -> Result<GirvanNewmanRun, CommunityError> {
    if graph.n == 0 {
        return Err(CommunityError::EmptyGraph);
    }
    let m = graph.edges.len();
    let mut alive = vec![true; m];
    let mut scores = vec![0.0; m];
    let all: Vec<usize> = (0..graph.n).collect();
    graph.accumulate(&all, &alive, &mut scores);

    let mut components = graph.components(&alive);
    let mut best = CommunityPartition { modularity: modularity(graph, &components), communities: components.clone() };
    let mut removal_order = Vec::new();
    let mut removal_scores = Vec::new();

    let reached = |count: usize| matches!(stop, StopRule::TargetCount(c) if count >= c);
    if reached(components.len()) {
        return Ok(GirvanNewmanRun { partition: best, removal_order, removal_scores });
    }

    for _ in 0..m {
        let mut pick: Option<usize> = None;
        for e in (0..m).filter(|&e| alive[e]) {
            pick = Some(match pick {
                None => e,
                Some(p) => {
                    let tol = 1e-9 * scores[p].abs().max(1.0);
                    if scores[e] > scores[p] + tol
                        || ((scores[e] - scores[p]).abs() <= tol && tie_keys[e] < tie_keys[p])
                    {
                        e
                    } else {
                        p
                    }
                }
            });
        }
        let Some(e) = pick else { break };
        alive[e] = false;
        removal_order.push(e);
        removal_scores.push(scores[e] / 2.0);

        let (u, v) = graph.edges[e];
        let side_u = graph.reach(u, &alive);
        let split = !side_u.contains(&v);
        let mut affected = side_u;
        if split {
            affected.extend(graph.reach(v, &alive));
        }
        for &x in &affected {
            for &(_, f) in &graph.adj[x] {
                scores[f] = 0.0;
            }
        }
        graph.accumulate(&affected, &alive, &mut scores);

        if split {
            components = graph.components(&alive);
            let q = modularity(graph, &components);
            if reached(components.len()) {
                return Ok(GirvanNewmanRun {
                    partition: CommunityPartition { communities: components, modularity: q },
                    removal_order,
                    removal_scores,
                });
            }
            if matches!(stop, StopRule::MaxModularity) && q > best.modularity {
                best = CommunityPartition { communities: components.clone(), modularity: q };
            }
        }
    }
    if let StopRule::TargetCount(_) = stop {
        // Target above the node count: every node alone.
        best = CommunityPartition { modularity: modularity(graph, &components), communities: components };
    }
    Ok(GirvanNewmanRun { partition: best, removal_order, removal_scores })
}
