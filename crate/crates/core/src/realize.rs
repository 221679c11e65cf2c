//! Iterated compaction, terminal classification and backward reconstruction.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::compaction::{compaction_vector, reduce, CompactionVector, ReductionStep};
use crate::cycle::{
    exhaustive_cycle_search, find_cycle_order, verify_cycle, CycleCertificate, CycleError,
    DEFAULT_EXHAUSTIVE_MAX,
};
use crate::graph::{distances_between, GraphError, NodeKind, WeightedGraph};
use crate::metric::{DistanceMatrix, Label};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("inconsistent trace: label {0} is missing from the partial graph")]
    InconsistentTrace(Label),
    #[error("internal verification failure: {0}")]
    InternalVerificationFailure(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminal {
    /// Two survivors at distance `delta`.
    Order2 { labels: [Label; 2], delta: Rational },
    /// The compaction matrix vanished: every label of the last matrix hangs
    /// off `hub` with its compaction value.
    StarCase {
        hub: Label,
        labels: Vec<Label>,
        a: CompactionVector,
    },
    /// Null compaction vector; the matrix must be realized by a cycle.
    CycleCase { matrix: DistanceMatrix },
    Stuck { diagnostics: Vec<String> },
}

impl Terminal {
    pub fn name(&self) -> &'static str {
        match self {
            Terminal::Order2 { .. } => "order2",
            Terminal::StarCase { .. } => "star",
            Terminal::CycleCase { .. } => "cycle",
            Terminal::Stuck { .. } => "stuck",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    /// The input labels.
    pub labels: Vec<Label>,
    /// One step per reduction performed; the labels of step `k + 1` are the
    /// fresh labels issued by step `k`.
    pub trace: Vec<ReductionStep>,
    pub terminal: Terminal,
    pub rho_final: Label,
}

impl Analysis {
    /// Index of the last iteration examined.
    pub fn iterations(&self) -> usize {
        match self.terminal {
            Terminal::CycleCase { .. } => self.trace.len(),
            _ => self.trace.len().saturating_sub(1),
        }
    }
}

/// Runs compaction and reduction until a terminal case is reached.
pub fn analyze(d: &DistanceMatrix) -> Analysis {
    let labels = d.labels().to_vec();
    let n = d.order();
    let rho = d.max_label();
    if n == 1 {
        return Analysis {
            labels: labels.clone(),
            trace: Vec::new(),
            terminal: Terminal::StarCase {
                hub: labels[0],
                labels: labels.clone(),
                a: CompactionVector::zeros(&labels),
            },
            rho_final: rho,
        };
    }
    if n == 2 {
        return Analysis {
            labels: labels.clone(),
            trace: Vec::new(),
            terminal: Terminal::Order2 {
                labels: [labels[0], labels[1]],
                delta: d.at(0, 1).clone(),
            },
            rho_final: rho,
        };
    }

    let mut trace = Vec::new();
    let mut current = d.clone();
    let mut rho = rho;
    for t in 0..n {
        let a = match compaction_vector(&current) {
            Ok(a) => a,
            Err(e) => return stuck(labels, trace, rho, vec![e.to_string()]),
        };
        if a.is_null() {
            return Analysis {
                labels,
                trace,
                terminal: Terminal::CycleCase { matrix: current },
                rho_final: rho,
            };
        }
        let (next, step) = match reduce(&current, &a, rho, t) {
            Ok(r) => r,
            Err(e) => {
                let msg = format!("iteration {t}: {e}");
                return stuck(labels, trace, rho, vec![msg]);
            }
        };
        rho = step.rho_after();
        let step_labels = step.labels.clone();
        trace.push(step);
        match next.order() {
            1 => {
                return Analysis {
                    labels,
                    trace,
                    terminal: Terminal::StarCase {
                        hub: next.labels()[0],
                        labels: step_labels,
                        a,
                    },
                    rho_final: rho,
                }
            }
            2 => {
                let [u, v] = [next.labels()[0], next.labels()[1]];
                return Analysis {
                    labels,
                    trace,
                    terminal: Terminal::Order2 {
                        labels: [u, v],
                        delta: next.at(0, 1).clone(),
                    },
                    rho_final: rho,
                };
            }
            _ => current = next,
        }
    }
    stuck(
        labels,
        trace,
        rho,
        vec![format!("no terminal case within {n} iterations")],
    )
}

fn stuck(labels: Vec<Label>, trace: Vec<ReductionStep>, rho: Label, diagnostics: Vec<String>) -> Analysis {
    Analysis {
        labels,
        trace,
        terminal: Terminal::Stuck { diagnostics },
        rho_final: rho,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealizeOptions {
    /// Fall back to trying every cyclic order when the greedy search fails.
    pub exhaustive: bool,
    pub exhaustive_max: usize,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions {
            exhaustive: true,
            exhaustive_max: DEFAULT_EXHAUSTIVE_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalGraph {
    pub graph: WeightedGraph,
    pub certificate: Option<CycleCertificate>,
}

/// Builds the graph of the terminal case, or explains why there is none.
pub fn terminal_graph(
    analysis: &Analysis,
    options: &RealizeOptions,
) -> Result<TerminalGraph, Vec<String>> {
    let original: BTreeSet<Label> = analysis.labels.iter().copied().collect();
    let kind = |l: Label| {
        if original.contains(&l) {
            NodeKind::Leaf
        } else {
            NodeKind::Internal
        }
    };
    let mut g = WeightedGraph::new();
    match &analysis.terminal {
        Terminal::Order2 { labels: [u, v], delta } => {
            g.add_node(*u, kind(*u));
            g.add_node(*v, kind(*v));
            g.add_edge(*u, *v, delta.clone()).map_err(|e| vec![e.to_string()])?;
            Ok(TerminalGraph { graph: g, certificate: None })
        }
        Terminal::StarCase { hub, .. } => {
            g.add_node(*hub, kind(*hub));
            Ok(TerminalGraph { graph: g, certificate: None })
        }
        Terminal::CycleCase { matrix } => {
            let cert = find_certificate(matrix, options)?;
            for &l in cert.order.as_slice() {
                g.add_node(l, kind(l));
            }
            for (u, v, w) in cert.edges() {
                g.add_edge(u, v, w.clone()).map_err(|e| vec![e.to_string()])?;
            }
            Ok(TerminalGraph { graph: g, certificate: Some(cert) })
        }
        Terminal::Stuck { diagnostics } => Err(diagnostics.clone()),
    }
}

fn find_certificate(
    d: &DistanceMatrix,
    options: &RealizeOptions,
) -> Result<CycleCertificate, Vec<String>> {
    let mut notes = Vec::new();
    match find_cycle_order(d) {
        Some(order) => match verify_cycle(d, &order) {
            Ok(cert) => return Ok(cert),
            Err(e) => notes.push(format!("greedy order {order} rejected: {e}")),
        },
        None => notes.push("greedy search found no cyclic order".to_string()),
    }
    if !options.exhaustive {
        notes.push("exhaustive search disabled".to_string());
        return Err(notes);
    }
    match exhaustive_cycle_search(d, options.exhaustive_max) {
        Ok(Some(order)) => match verify_cycle(d, &order) {
            Ok(cert) => Ok(cert),
            Err(e) => {
                notes.push(e.to_string());
                Err(notes)
            }
        },
        Ok(None) => {
            notes.push(format!("no cyclic order of the {} remaining labels satisfies the cycle condition", d.order()));
            Err(notes)
        }
        Err(e @ CycleError::OrderTooLarge { .. }) => {
            notes.push(e.to_string());
            Err(notes)
        }
        Err(e) => {
            notes.push(e.to_string());
            Err(notes)
        }
    }
}

/// Unrolls the trace from the last step back to the first, growing the
/// terminal graph, then contracts zero-weight edges.
pub fn reconstruct(analysis: &Analysis, terminal: &WeightedGraph) -> Result<WeightedGraph, RealizeError> {
    let original: BTreeSet<Label> = analysis.labels.iter().copied().collect();
    let kind = |l: Label| {
        if original.contains(&l) {
            NodeKind::Leaf
        } else {
            NodeKind::Internal
        }
    };
    let mut g = terminal.clone();
    for step in analysis.trace.iter().rev() {
        for (k, &j) in step.singletons.iter().enumerate() {
            let fresh = step.singleton_label(k);
            if !g.contains(fresh) {
                return Err(RealizeError::InconsistentTrace(fresh));
            }
            let a = step.a.get(j).ok_or(RealizeError::InconsistentTrace(j))?;
            if a.is_zero() {
                g.rename_node(fresh, j)?;
            } else {
                g.add_edge(fresh, j, a.clone())?;
            }
            g.add_node(j, kind(j));
        }
        for (k, members) in step.groups.iter().enumerate() {
            let hub = step.group_label(k);
            if !g.contains(hub) {
                return Err(RealizeError::InconsistentTrace(hub));
            }
            for &m in members {
                let a = step.a.get(m).ok_or(RealizeError::InconsistentTrace(m))?;
                g.add_edge(hub, m, a.clone())?;
                g.add_node(m, kind(m));
            }
        }
    }
    contract_zero_edges(&mut g)?;
    Ok(g)
}

/// Merges the endpoints of every zero-weight edge, keeping the input label
/// when there is one and the smaller label otherwise.
pub fn contract_zero_edges(g: &mut WeightedGraph) -> Result<(), GraphError> {
    loop {
        let zero = g.edges().find(|(_, _, w)| w.is_zero()).map(|(u, v, _)| (u, v));
        let Some((u, v)) = zero else { return Ok(()) };
        let (keep, gone) = match (g.kind(u), g.kind(v)) {
            (Some(NodeKind::Internal), Some(NodeKind::Leaf)) => (v, u),
            _ => (u, v),
        };
        g.contract_edge(keep, gone)?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Tree,
    Genus1,
    Unrealizable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Tree => "tree",
            Status::Genus1 => "genus1",
            Status::Unrealizable => "unrealizable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizationResult {
    pub status: Status,
    pub graph: Option<WeightedGraph>,
    pub certificate: Option<CycleCertificate>,
    pub analysis: Analysis,
    pub verified: bool,
    pub diagnostics: Vec<String>,
}

impl RealizationResult {
    pub fn total_weight(&self) -> Option<Rational> {
        self.graph.as_ref().map(WeightedGraph::total_weight)
    }

    /// The unique cycle of a genus-1 result.
    pub fn cycle(&self) -> Option<Vec<Label>> {
        match self.status {
            Status::Genus1 => self.graph.as_ref().and_then(WeightedGraph::cycle),
            _ => None,
        }
    }
}

/// Realizes `d` by a tree or a unicyclic graph, checking the output against
/// the shortest-path oracle.
pub fn realize(d: &DistanceMatrix, options: &RealizeOptions) -> Result<RealizationResult, RealizeError> {
    let analysis = analyze(d);
    let term = match terminal_graph(&analysis, options) {
        Ok(t) => t,
        Err(mut notes) => {
            notes.insert(0, "not realizable by this algorithm's criteria".to_string());
            return Ok(RealizationResult {
                status: Status::Unrealizable,
                graph: None,
                certificate: None,
                analysis,
                verified: false,
                diagnostics: notes,
            });
        }
    };
    let graph = reconstruct(&analysis, &term.graph)?;
    let fail = |msg: String| Err(RealizeError::InternalVerificationFailure(msg));

    for &l in d.labels() {
        if graph.kind(l) != Some(NodeKind::Leaf) {
            return fail(format!("label {l} missing from the output graph"));
        }
    }
    let oracle = distances_between(&graph, d.labels())?;
    if oracle.entries() != d.as_labeled().entries() {
        return fail("shortest-path distances differ from the input".to_string());
    }
    let status = match graph.cyclomatic() {
        0 => Status::Tree,
        1 => Status::Genus1,
        c => return fail(format!("output has cyclomatic number {c}")),
    };
    if (status == Status::Genus1) != term.certificate.is_some() {
        return fail("cycle certificate does not match the output genus".to_string());
    }
    Ok(RealizationResult {
        status,
        graph: Some(graph),
        certificate: term.certificate,
        analysis,
        verified: true,
        diagnostics: Vec::new(),
    })
}

pub fn total_weight(g: &WeightedGraph) -> Rational {
    g.total_weight()
}
