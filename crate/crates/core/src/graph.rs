//! Weighted undirected graphs, the shortest-path oracle and exports.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel;
use crate::metric::{Label, LabeledMatrix, MetricError};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    /// Row label of the input matrix.
    Leaf,
    /// Node introduced by the algorithm.
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on node {0}")]
    SelfLoop(Label),
    #[error("negative weight {w} on edge ({u},{v})")]
    NegativeWeight { u: Label, v: Label, w: Rational },
    #[error("unknown node {0}")]
    UnknownNode(Label),
    #[error("node {0} already exists")]
    DuplicateNode(Label),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph is empty")]
    Empty,
    #[error("malformed graph document: {0}")]
    Document(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Simple undirected graph with nonnegative rational edge weights.
/// Edges are keyed by `(min, max)` label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightedGraph {
    nodes: BTreeMap<Label, NodeKind>,
    edges: BTreeMap<(Label, Label), Rational>,
}

fn key(u: Label, v: Label) -> (Label, Label) {
    (u.min(v), u.max(v))
}

impl WeightedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a node, or updates its kind if present.
    pub fn add_node(&mut self, label: Label, kind: NodeKind) {
        self.nodes.insert(label, kind);
    }

    /// Adds (or replaces) the edge `{u, v}`, creating missing endpoints as
    /// internal nodes.
    pub fn add_edge(&mut self, u: Label, v: Label, w: Rational) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if w.is_negative() {
            return Err(GraphError::NegativeWeight { u, v, w });
        }
        self.nodes.entry(u).or_insert(NodeKind::Internal);
        self.nodes.entry(v).or_insert(NodeKind::Internal);
        self.edges.insert(key(u, v), w);
        Ok(())
    }

    pub fn contains(&self, label: Label) -> bool {
        self.nodes.contains_key(&label)
    }

    pub fn kind(&self, label: Label) -> Option<NodeKind> {
        self.nodes.get(&label).copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Label, NodeKind)> + '_ {
        self.nodes.iter().map(|(&l, &k)| (l, k))
    }

    /// Edges in canonical `(min, max)` order.
    pub fn edges(&self) -> impl Iterator<Item = (Label, Label, &Rational)> + '_ {
        self.edges.iter().map(|(&(u, v), w)| (u, v, w))
    }

    pub fn weight(&self, u: Label, v: Label) -> Option<&Rational> {
        self.edges.get(&key(u, v))
    }

    pub fn neighbors(&self, label: Label) -> Vec<Label> {
        self.edges
            .keys()
            .filter_map(|&(a, b)| {
                if a == label {
                    Some(b)
                } else if b == label {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, label: Label) -> usize {
        self.edges.keys().filter(|&&(a, b)| a == label || b == label).count()
    }

    /// Renames a node, keeping its edges.
    pub fn rename_node(&mut self, from: Label, to: Label) -> Result<(), GraphError> {
        if from == to {
            return Ok(());
        }
        let kind = self.nodes.remove(&from).ok_or(GraphError::UnknownNode(from))?;
        if self.nodes.contains_key(&to) {
            self.nodes.insert(from, kind);
            return Err(GraphError::DuplicateNode(to));
        }
        self.nodes.insert(to, kind);
        let moved: Vec<((Label, Label), Rational)> = self
            .edges
            .iter()
            .filter(|((a, b), _)| *a == from || *b == from)
            .map(|(k, w)| (*k, w.clone()))
            .collect();
        for ((a, b), w) in moved {
            self.edges.remove(&(a, b));
            let other = if a == from { b } else { a };
            self.edges.insert(key(other, to), w);
        }
        Ok(())
    }

    /// Merges `gone` into `keep` along the edge between them, which is
    /// removed. Parallel edges produced by the merge keep the lighter weight.
    pub fn contract_edge(&mut self, keep: Label, gone: Label) -> Result<(), GraphError> {
        if self.edges.remove(&key(keep, gone)).is_none() {
            return Err(GraphError::UnknownNode(gone));
        }
        self.nodes.remove(&gone);
        let moved: Vec<((Label, Label), Rational)> = self
            .edges
            .iter()
            .filter(|((a, b), _)| *a == gone || *b == gone)
            .map(|(k, w)| (*k, w.clone()))
            .collect();
        for ((a, b), w) in moved {
            self.edges.remove(&(a, b));
            let other = if a == gone { b } else { a };
            let slot = self.edges.entry(key(other, keep)).or_insert_with(|| w.clone());
            if w < *slot {
                *slot = w;
            }
        }
        Ok(())
    }

    pub fn total_weight(&self) -> Rational {
        self.edges.values().sum()
    }

    pub fn connected_components(&self) -> usize {
        let adjacency = self.adjacency();
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for &start in self.nodes.keys() {
            if !seen.insert(start) {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adjacency[&u] {
                    if seen.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    /// Cyclomatic number `|E| − |V| + #components`.
    pub fn cyclomatic(&self) -> i64 {
        self.edge_count() as i64 - self.node_count() as i64 + self.connected_components() as i64
    }

    fn adjacency(&self) -> BTreeMap<Label, Vec<Label>> {
        let mut adj: BTreeMap<Label, Vec<Label>> =
            self.nodes.keys().map(|&l| (l, Vec::new())).collect();
        for &(u, v) in self.edges.keys() {
            adj.get_mut(&u).expect("endpoint").push(v);
            adj.get_mut(&v).expect("endpoint").push(u);
        }
        adj
    }

    /// The unique cycle of a unicyclic graph, anchored at its smallest node
    /// and heading toward the smaller neighbour. `None` when the 2-core is
    /// empty or not a single cycle.
    pub fn cycle(&self) -> Option<Vec<Label>> {
        let mut adj: BTreeMap<Label, BTreeSet<Label>> = self
            .adjacency()
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect();
        let mut queue: Vec<Label> = adj.iter().filter(|(_, n)| n.len() <= 1).map(|(&k, _)| k).collect();
        while let Some(u) = queue.pop() {
            let Some(nbrs) = adj.remove(&u) else { continue };
            for v in nbrs {
                if let Some(set) = adj.get_mut(&v) {
                    set.remove(&u);
                    if set.len() == 1 {
                        queue.push(v);
                    }
                }
            }
        }
        if adj.len() < 3 || adj.values().any(|n| n.len() != 2) {
            return None;
        }
        let start = *adj.keys().next().expect("nonempty");
        let first = *adj[&start].iter().next().expect("degree 2");
        let mut seq = vec![start, first];
        loop {
            let cur = *seq.last().expect("nonempty");
            let prev = seq[seq.len() - 2];
            let next = *adj[&cur].iter().find(|&&x| x != prev).expect("degree 2");
            if next == start {
                break;
            }
            seq.push(next);
        }
        (seq.len() == adj.len()).then_some(seq)
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            status: None,
            nodes: self
                .nodes
                .iter()
                .map(|(&id, &kind)| NodeRecord { id, kind })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|(&(u, v), w)| EdgeRecord { u, v, w: w.clone() })
                .collect(),
            cycle: None,
            total_weight: Some(self.total_weight()),
        }
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self, GraphError> {
        let mut g = WeightedGraph::new();
        for n in &doc.nodes {
            if g.contains(n.id) {
                return Err(GraphError::DuplicateNode(n.id));
            }
            g.add_node(n.id, n.kind);
        }
        for e in &doc.edges {
            if !g.contains(e.u) {
                return Err(GraphError::UnknownNode(e.u));
            }
            if !g.contains(e.v) {
                return Err(GraphError::UnknownNode(e.v));
            }
            if g.weight(e.u, e.v).is_some() {
                return Err(GraphError::Document(format!("parallel edge ({},{})", e.u, e.v)));
            }
            g.add_edge(e.u, e.v, e.w.clone())?;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        self.to_document().to_json()
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| GraphError::Document(e.to_string()))?;
        Self::from_document(&doc)
    }

    /// Undirected DOT, weights as edge labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph G {\n");
        for (&id, &kind) in &self.nodes {
            let shape = match kind {
                NodeKind::Leaf => "box",
                NodeKind::Internal => "circle",
            };
            let _ = writeln!(out, "  {id} [shape={shape}];");
        }
        for (&(u, v), w) in &self.edges {
            let _ = writeln!(out, "  {u} -- {v} [label=\"{w}\"];");
        }
        out.push_str("}\n");
        out
    }

    /// GraphML with the weight under data key `w` and node kind under `kind`.
    pub fn to_graphml(&self) -> String {
        let mut out = String::from(concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
            "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n",
            "  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n",
            "  <key id=\"w\" for=\"edge\" attr.name=\"w\" attr.type=\"string\"/>\n",
            "  <graph id=\"G\" edgedefault=\"undirected\">\n",
        ));
        for (&id, &kind) in &self.nodes {
            let kind = match kind {
                NodeKind::Leaf => "leaf",
                NodeKind::Internal => "internal",
            };
            let _ = writeln!(
                out,
                "    <node id=\"n{id}\"><data key=\"kind\">{kind}</data></node>"
            );
        }
        for (&(u, v), w) in &self.edges {
            let _ = writeln!(
                out,
                "    <edge source=\"n{u}\" target=\"n{v}\"><data key=\"w\">{w}</data></edge>"
            );
        }
        out.push_str("  </graph>\n</graphml>\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: Label,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub u: Label,
    pub v: Label,
    pub w: Rational,
}

/// Wire form of a graph, optionally carrying a realization status and cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_weight: Option<Rational>,
}

impl GraphDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph document serializes")
    }
}

/// Shortest-path distances between every pair of nodes, rows in ascending
/// label order.
pub fn apsp(g: &WeightedGraph) -> Result<LabeledMatrix, GraphError> {
    if g.node_count() == 0 {
        return Err(GraphError::Empty);
    }
    let labels: Vec<Label> = g.nodes.keys().copied().collect();
    let index: BTreeMap<Label, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let edges: Vec<(usize, usize, &Rational)> = g
        .edges
        .iter()
        .map(|(&(u, v), w)| (index[&u], index[&v], w))
        .collect();
    let n = labels.len();
    let dist = kernel::floyd_warshall(n, &edges);
    let entries = dist
        .into_iter()
        .map(|d| d.ok_or(GraphError::Disconnected))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LabeledMatrix::from_parts(labels, entries))
}

/// Shortest-path distances restricted to `labels`, in the given order.
pub fn distances_between(g: &WeightedGraph, labels: &[Label]) -> Result<LabeledMatrix, GraphError> {
    for &l in labels {
        if !g.contains(l) {
            return Err(GraphError::UnknownNode(l));
        }
    }
    let all = apsp(g)?;
    let positions: Vec<usize> = labels
        .iter()
        .map(|&l| all.position(l).expect("checked"))
        .collect();
    Ok(all.select(&positions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn square(weights: [i64; 4]) -> WeightedGraph {
        let mut g = WeightedGraph::new();
        for k in 0..4u64 {
            g.add_edge(k + 1, (k + 1) % 4 + 1, q(weights[k as usize], 1)).unwrap();
        }
        g
    }

    #[test]
    fn single_edge_apsp() {
        let mut g = WeightedGraph::new();
        g.add_edge(1, 2, q(3, 1)).unwrap();
        let d = apsp(&g).unwrap();
        assert_eq!(d.rows(), vec![vec![q(0, 1), q(3, 1)], vec![q(3, 1), q(0, 1)]]);
    }

    #[test]
    fn square_opposite_corners() {
        let g = square([1, 2, 1, 2]);
        let d = apsp(&g).unwrap();
        assert_eq!(d.get(1, 3), Some(&q(3, 1)));
        assert_eq!(d.get(2, 4), Some(&q(3, 1)));
        assert_eq!(g.cyclomatic(), 1);
        assert_eq!(g.cycle().unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn cyclomatic_numbers() {
        let mut tree = WeightedGraph::new();
        tree.add_edge(1, 5, q(1, 1)).unwrap();
        tree.add_edge(2, 5, q(1, 1)).unwrap();
        tree.add_edge(5, 6, q(1, 1)).unwrap();
        assert_eq!(tree.cyclomatic(), 0);
        assert_eq!(tree.cycle(), None);

        let mut eight = WeightedGraph::new();
        for (u, v) in [(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 3)] {
            eight.add_edge(u, v, q(1, 1)).unwrap();
        }
        assert_eq!(eight.cyclomatic(), 2);
        assert_eq!(eight.cycle(), None);
    }

    #[test]
    fn disconnected_and_empty() {
        let mut g = WeightedGraph::new();
        g.add_edge(1, 2, q(1, 1)).unwrap();
        g.add_node(7, NodeKind::Leaf);
        assert_eq!(apsp(&g).unwrap_err(), GraphError::Disconnected);
        assert_eq!(g.connected_components(), 2);
        assert_eq!(apsp(&WeightedGraph::new()).unwrap_err(), GraphError::Empty);
    }

    #[test]
    fn edge_validation() {
        let mut g = WeightedGraph::new();
        assert_eq!(g.add_edge(1, 1, q(1, 1)).unwrap_err(), GraphError::SelfLoop(1));
        assert!(matches!(
            g.add_edge(1, 2, q(-1, 1)),
            Err(GraphError::NegativeWeight { .. })
        ));
    }

    #[test]
    fn rename_and_contract() {
        let mut g = WeightedGraph::new();
        g.add_edge(10, 1, q(2, 1)).unwrap();
        g.add_edge(10, 11, q(0, 1)).unwrap();
        g.add_edge(11, 2, q(1, 1)).unwrap();
        g.rename_node(11, 3).unwrap();
        assert_eq!(g.weight(3, 2), Some(&q(1, 1)));
        assert_eq!(g.rename_node(3, 1).unwrap_err(), GraphError::DuplicateNode(1));
        g.contract_edge(3, 10).unwrap();
        assert_eq!(g.weight(3, 1), Some(&q(2, 1)));
        assert!(!g.contains(10));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn json_wire_format() {
        let mut g = WeightedGraph::new();
        g.add_node(1, NodeKind::Leaf);
        g.add_node(2, NodeKind::Leaf);
        g.add_edge(1, 2, q(3, 2)).unwrap();
        let json = g.to_json();
        assert_eq!(
            json,
            r#"{"nodes":[{"id":1,"kind":"leaf"},{"id":2,"kind":"leaf"}],"edges":[{"u":1,"v":2,"w":"3/2"}],"total_weight":"3/2"}"#
        );
        assert_eq!(WeightedGraph::from_json(&json).unwrap(), g);
    }

    #[test]
    fn empty_exports() {
        let g = WeightedGraph::new();
        assert_eq!(g.to_json(), r#"{"nodes":[],"edges":[],"total_weight":"0"}"#);
        assert_eq!(g.to_dot(), "graph G {\n}\n");
        assert!(g.to_graphml().contains("<graph id=\"G\" edgedefault=\"undirected\">\n  </graph>"));
        assert_eq!(WeightedGraph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn dot_and_graphml_carry_weights() {
        let g = square([1, 2, 1, 2]);
        let dot = g.to_dot();
        assert!(dot.contains("1 -- 2 [label=\"1\"];"));
        assert_eq!(dot.matches(" -- ").count(), 4);
        let xml = g.to_graphml();
        assert!(xml.contains("<edge source=\"n2\" target=\"n3\"><data key=\"w\">2</data></edge>"));
    }
}
