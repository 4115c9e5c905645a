//! Serialized analysis results.
//!
//! One JSON object per analysis, tagged by `analysis`. Field order is fixed
//! and maps are ordered, so equal results always serialize to equal bytes.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::barriers::BarrierKind;
use crate::corpus::TimeWindow;
use crate::propagation::{CommunityPartition, GraphEdge, GraphNode, PropagationConfig, PropagationGraph, StopRule};
use crate::sentiment::{SentimentHeatmap, SentimentRules};
use crate::time::{format_timestamp, parse_timestamp, BinSize};
use crate::topics::{Merge, RankedTerms, TemporalTopicSeries, TopicModel};
use crate::trends::TrendSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "analysis", rename_all = "snake_case")]
pub enum AnalysisDocument {
    Propagation(PropagationDoc),
    Trends(TrendsDoc),
    Sentiment(HeatmapDoc),
    Topics(TopicsDoc),
}

impl AnalysisDocument {
    /// Pretty JSON with a trailing newline.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("documents serialize");
        out.push(b'\n');
        out
    }

    pub fn from_json(raw: &[u8]) -> serde_json::Result<Self> {
        serde_json::from_slice(raw)
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnalysisDocument::Propagation(_) => "propagation",
            AnalysisDocument::Trends(_) => "trends",
            AnalysisDocument::Sentiment(_) => "sentiment",
            AnalysisDocument::Topics(_) => "topics",
        }
    }
}

/// Half-open window as ISO timestamps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowEcho {
    pub from: String,
    pub to: String,
}

impl From<&TimeWindow> for WindowEcho {
    fn from(w: &TimeWindow) -> Self {
        WindowEcho { from: format_timestamp(&w.start()), to: format_timestamp(&w.end()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: String,
    pub title: String,
    pub source: String,
    pub published_at: String,
    pub label: String,
    pub community: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub src: String,
    pub dst: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationDoc {
    pub event: String,
    pub kind: BarrierKind,
    pub window: WindowEcho,
    pub config: PropagationConfig,
    pub stop: StopRule,
    pub nodes: Vec<NodeEntry>,
    pub edges: Vec<EdgeEntry>,
    /// Member ids per community, indexed by `NodeEntry::community`.
    pub communities: Vec<Vec<String>>,
    pub modularity: f64,
}

/// Builds the propagation document. `partition` must cover every node; for
/// an empty graph pass an empty partition.
pub fn export_propagation(
    event: &str,
    window: &TimeWindow,
    graph: &PropagationGraph,
    partition: &CommunityPartition,
    stop: StopRule,
) -> PropagationDoc {
    let community = partition.community_of(graph.nodes.len());
    let nodes = graph
        .nodes
        .iter()
        .zip(&community)
        .map(|(n, &c)| NodeEntry {
            id: n.id.clone(),
            title: n.title.clone(),
            source: n.source_name.clone(),
            published_at: format_timestamp(&n.published_at),
            label: n.label.clone(),
            community: c,
        })
        .collect();
    let edges = graph
        .edges
        .iter()
        .map(|e| EdgeEntry { src: graph.nodes[e.src].id.clone(), dst: graph.nodes[e.dst].id.clone(), weight: e.weight })
        .collect();
    let communities =
        partition.communities.iter().map(|c| c.iter().map(|&i| graph.nodes[i].id.clone()).collect()).collect();
    PropagationDoc {
        event: event.to_string(),
        kind: graph.kind,
        window: window.into(),
        config: graph.config,
        stop,
        nodes,
        edges,
        communities,
        modularity: partition.modularity,
    }
}

impl PropagationDoc {
    /// Rebuilds the graph and partition the document was exported from.
    pub fn to_graph(&self) -> Result<(PropagationGraph, CommunityPartition), String> {
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| format!("edge references unknown node `{id}`"));
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                Ok(GraphNode {
                    id: n.id.clone(),
                    title: n.title.clone(),
                    source_name: n.source.clone(),
                    published_at: parse_timestamp(&n.published_at)
                        .ok_or_else(|| format!("bad timestamp `{}`", n.published_at))?,
                    label: n.label.clone(),
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let edges = self
            .edges
            .iter()
            .map(|e| Ok(GraphEdge { src: lookup(&e.src)?, dst: lookup(&e.dst)?, weight: e.weight }))
            .collect::<Result<Vec<_>, String>>()?;
        let communities = self
            .communities
            .iter()
            .map(|c| c.iter().map(|id| lookup(id)).collect::<Result<Vec<_>, String>>())
            .collect::<Result<Vec<_>, String>>()?;
        let graph = PropagationGraph { kind: self.kind, config: self.config, nodes, edges };
        Ok((graph, CommunityPartition { communities, modularity: self.modularity }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendsDoc {
    pub event: String,
    pub kind: BarrierKind,
    pub window: WindowEcho,
    pub bin: BinSize,
    pub cumulative: bool,
    pub bins: Vec<String>,
    pub series: BTreeMap<String, Vec<u64>>,
    pub total: u64,
}

pub fn export_trends(event: &str, window: &TimeWindow, trends: &TrendSeries) -> TrendsDoc {
    TrendsDoc {
        event: event.to_string(),
        kind: trends.kind,
        window: window.into(),
        bin: trends.bin,
        cumulative: trends.cumulative,
        bins: trends.bins.clone(),
        series: trends.series.clone(),
        total: trends.total(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapDoc {
    pub event: String,
    pub kind: BarrierKind,
    pub window: WindowEcho,
    pub rules: SentimentRules,
    pub days: Vec<String>,
    pub labels: Vec<String>,
    /// Mean compound score per `[day][label]`; `null` where no article fell.
    pub cells: Vec<Vec<Option<f64>>>,
    pub counts: Vec<Vec<u64>>,
    /// `[negative, neutral, positive]` per label.
    pub classes: BTreeMap<String, [u64; 3]>,
}

pub fn export_heatmap(
    event: &str,
    window: &TimeWindow,
    rules: &SentimentRules,
    heatmap: SentimentHeatmap,
) -> HeatmapDoc {
    HeatmapDoc {
        event: event.to_string(),
        kind: heatmap.kind,
        window: window.into(),
        rules: *rules,
        days: heatmap.days,
        labels: heatmap.labels,
        cells: heatmap.cells,
        counts: heatmap.counts,
        classes: heatmap.classes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEntry {
    pub id: usize,
    pub size: usize,
    pub terms: RankedTerms,
    pub coherence: Option<f64>,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendrogramEcho {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsDoc {
    pub event: String,
    pub kind: BarrierKind,
    /// Barrier label the corpus was restricted to, if any.
    pub label: Option<String>,
    pub window: WindowEcho,
    pub k: usize,
    pub m: usize,
    pub min_df: usize,
    pub topics: Vec<TopicEntry>,
    pub mean_coherence: Option<f64>,
    pub diversity: f64,
    pub dendrogram: DendrogramEcho,
    pub temporal: TemporalTopicSeries,
}

pub fn export_topics(
    event: &str,
    kind: BarrierKind,
    label: Option<&str>,
    window: &TimeWindow,
    model: &TopicModel,
    temporal: TemporalTopicSeries,
) -> TopicsDoc {
    TopicsDoc {
        event: event.to_string(),
        kind,
        label: label.map(str::to_string),
        window: window.into(),
        k: model.config.k,
        m: model.config.m,
        min_df: model.config.min_df,
        topics: model
            .topics
            .iter()
            .map(|t| TopicEntry {
                id: t.id,
                size: t.size,
                terms: t.terms.clone(),
                coherence: t.coherence,
                members: t.members.clone(),
            })
            .collect(),
        mean_coherence: model.mean_coherence,
        diversity: model.diversity,
        dendrogram: DendrogramEcho { leaves: model.dendrogram.leaves, merges: model.dendrogram.merges.clone() },
        temporal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::VectorMode;

    fn window() -> TimeWindow {
        TimeWindow::new(parse_timestamp("2023-11-01").unwrap(), parse_timestamp("2023-11-02").unwrap()).unwrap()
    }

    fn node(id: &str, hour: u32) -> GraphNode {
        GraphNode {
            id: id.into(),
            title: format!("title {id}"),
            source_name: "src".into(),
            published_at: parse_timestamp(&format!("2023-11-01T{hour:02}:00:00Z")).unwrap(),
            label: "C1".into(),
        }
    }

    fn graph(nodes: Vec<GraphNode>, edges: Vec<GraphEdge>) -> PropagationGraph {
        PropagationGraph {
            kind: BarrierKind::Economic,
            config: PropagationConfig::for_mode(VectorMode::ConceptWeights),
            nodes,
            edges,
        }
    }

    #[test]
    fn empty_graph_exports_empty_arrays() {
        let g = graph(vec![], vec![]);
        let part = CommunityPartition { communities: vec![], modularity: 0.0 };
        let doc = export_propagation("e", &window(), &g, &part, StopRule::MaxModularity);
        assert!(doc.nodes.is_empty() && doc.edges.is_empty() && doc.communities.is_empty());
    }

    #[test]
    fn two_nodes_one_edge_round_trip() {
        let g = graph(vec![node("a", 1), node("b", 2)], vec![GraphEdge { src: 0, dst: 1, weight: 0.75 }]);
        let part = g.communities(StopRule::MaxModularity).unwrap();
        let doc = AnalysisDocument::Propagation(export_propagation("e", &window(), &g, &part, StopRule::MaxModularity));
        let bytes = doc.to_bytes();
        let parsed = AnalysisDocument::from_json(&bytes).unwrap();
        assert_eq!(parsed, doc);
        assert_eq!(parsed.to_bytes(), bytes);
        let AnalysisDocument::Propagation(p) = parsed else { panic!("wrong variant") };
        assert_eq!((p.nodes.len(), p.edges.len()), (2, 1));
        let (g2, part2) = p.to_graph().unwrap();
        assert_eq!(g2, g);
        assert_eq!(part2, part);
    }

    #[test]
    fn tagged_by_analysis() {
        let doc = AnalysisDocument::Trends(TrendsDoc {
            event: "e".into(),
            kind: BarrierKind::Political,
            window: (&window()).into(),
            bin: BinSize::Day,
            cumulative: false,
            bins: vec!["2023-11-01".into()],
            series: BTreeMap::new(),
            total: 0,
        });
        let v: serde_json::Value = serde_json::from_slice(&doc.to_bytes()).unwrap();
        assert_eq!(v["analysis"], "trends");
        assert_eq!(v["kind"], "political");
        assert_eq!(v["window"]["from"], "2023-11-01T00:00:00Z");
    }

    #[test]
    fn null_cells_survive() {
        let doc = AnalysisDocument::Sentiment(HeatmapDoc {
            event: "e".into(),
            kind: BarrierKind::Geographic,
            window: (&window()).into(),
            rules: SentimentRules::default(),
            days: vec!["2023-11-01".into()],
            labels: vec!["Israel".into(), "Qatar".into()],
            cells: vec![vec![None, Some(0.0)]],
            counts: vec![vec![0, 2]],
            classes: BTreeMap::new(),
        });
        let v: serde_json::Value = serde_json::from_slice(&doc.to_bytes()).unwrap();
        assert!(v["cells"][0][0].is_null());
        assert_eq!(v["cells"][0][1], 0.0);
        assert_eq!(AnalysisDocument::from_json(&doc.to_bytes()).unwrap(), doc);
    }
}
