//! Seeded generators of labeled trees, unicyclic graphs and their metrics.

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{distances_between, NodeKind, WeightedGraph};
use crate::metric::{DistanceMatrix, Label};
use crate::rational::Rational;

/// Denominators of sampled weights.
const DENOMINATORS: [i64; 4] = [1, 2, 4, 8];
const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    /// Labeled leaves, internal nodes of degree at least 3.
    Tree,
    /// One cycle with pendant trees.
    Genus1,
    /// A bare cycle whose nodes are the labels.
    Cycle,
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenKind::Tree => "tree",
            GenKind::Genus1 => "genus1",
            GenKind::Cycle => "cycle",
        })
    }
}

impl FromStr for GenKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tree" => Ok(GenKind::Tree),
            "genus1" => Ok(GenKind::Genus1),
            "cycle" => Ok(GenKind::Cycle),
            other => Err(format!("unknown kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n_labels: usize,
    pub seed: u64,
    /// Inclusive bounds for edge weights.
    pub weight_range: (Rational, Rational),
    /// Number of cycle nodes, bare ones included. Random in 4..=8 when unset.
    pub cycle_len: Option<usize>,
}

impl GenSpec {
    pub fn new(kind: GenKind, n_labels: usize, seed: u64) -> Self {
        GenSpec {
            kind,
            n_labels,
            seed,
            weight_range: (Rational::from(1), Rational::from(4)),
            cycle_len: None,
        }
    }

    pub fn with_weight_range(mut self, lo: Rational, hi: Rational) -> Self {
        self.weight_range = (lo, hi);
        self
    }

    pub fn with_cycle_len(mut self, len: usize) -> Self {
        self.cycle_len = Some(len);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedInstance {
    pub graph: WeightedGraph,
    pub matrix: DistanceMatrix,
    /// The cycle in walk order, bare nodes included.
    pub cycle: Option<Vec<Label>>,
    /// Unlabeled nodes of degree 2 in `graph`.
    pub unlabeled_degree2: usize,
}

impl GeneratedInstance {
    pub fn total_weight(&self) -> Rational {
        self.graph.total_weight()
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    /// (denominator, smallest numerator, largest numerator)
    grids: Vec<(i64, i64, i64)>,
    next_internal: Label,
}

impl Sampler {
    fn new(spec: &GenSpec) -> Result<Self, GenError> {
        let (lo, hi) = &spec.weight_range;
        if !lo.is_positive() || lo > hi {
            return Err(GenError::InfeasibleSpec(format!(
                "weight range [{lo}, {hi}] must be positive and nonempty"
            )));
        }
        let grids: Vec<(i64, i64, i64)> = DENOMINATORS
            .iter()
            .filter_map(|&q| {
                let kmin = (lo.clone() * Rational::from(q)).ceil().to_i64()?;
                let kmax = (hi.clone() * Rational::from(q)).floor().to_i64()?;
                (kmin <= kmax).then_some((q, kmin.max(1), kmax))
            })
            .collect();
        if grids.is_empty() {
            return Err(GenError::InfeasibleSpec(format!(
                "no weight with denominator up to 8 lies in [{lo}, {hi}]"
            )));
        }
        Ok(Sampler {
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            grids,
            next_internal: spec.n_labels as Label + 1,
        })
    }

    fn weight(&mut self) -> Rational {
        let (q, kmin, kmax) = self.grids[self.rng.random_range(0..self.grids.len())];
        Rational::new(self.rng.random_range(kmin..=kmax), q)
    }

    fn internal(&mut self, g: &mut WeightedGraph) -> Label {
        let l = self.next_internal;
        self.next_internal += 1;
        g.add_node(l, NodeKind::Internal);
        l
    }

    /// Hangs `labels` below `parent` in at least `min_parts` branches; every
    /// new internal node gets two or more children.
    fn attach(&mut self, g: &mut WeightedGraph, parent: Label, mut labels: Vec<Label>, min_parts: usize) {
        labels.shuffle(&mut self.rng);
        let n = labels.len();
        let parts = self.rng.random_range(min_parts.min(n)..=n);
        let mut cuts: Vec<usize> = (1..n).collect();
        cuts.shuffle(&mut self.rng);
        let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
        cuts.sort_unstable();
        cuts.push(n);
        let mut start = 0;
        for end in cuts {
            let chunk = labels[start..end].to_vec();
            start = end;
            let w = self.weight();
            if chunk.len() == 1 {
                g.add_node(chunk[0], NodeKind::Leaf);
                g.add_edge(parent, chunk[0], w).expect("fresh edge");
            } else {
                let x = self.internal(g);
                g.add_edge(parent, x, w).expect("fresh edge");
                self.attach(g, x, chunk, 2);
            }
        }
    }

    /// Cycle weights with every adjacent pair at most half the total.
    fn cycle_weights(&mut self, m: usize) -> Vec<Rational> {
        if m == 4 {
            let (a, b) = (self.weight(), self.weight());
            return vec![a.clone(), b.clone(), a, b];
        }
        for _ in 0..MAX_RESAMPLES {
            let w: Vec<Rational> = (0..m).map(|_| self.weight()).collect();
            let half = w.iter().sum::<Rational>().half();
            if (0..m).all(|i| &w[i] + &w[(i + 1) % m] <= half) {
                return w;
            }
        }
        vec![self.weight(); m]
    }
}

/// Builds a random instance. Identical specs give identical instances.
pub fn generate(spec: &GenSpec) -> Result<GeneratedInstance, GenError> {
    let n = spec.n_labels;
    if n == 0 {
        return Err(GenError::InfeasibleSpec("n_labels must be at least 1".into()));
    }
    let mut s = Sampler::new(spec)?;
    let mut g = WeightedGraph::new();
    let mut labels: Vec<Label> = (1..=n as Label).collect();
    labels.shuffle(&mut s.rng);
    let mut cycle = None;
    let mut bare = 0;

    match spec.kind {
        GenKind::Tree => match n {
            1 => g.add_node(labels[0], NodeKind::Leaf),
            2 => {
                g.add_node(labels[0], NodeKind::Leaf);
                g.add_node(labels[1], NodeKind::Leaf);
                let w = s.weight();
                g.add_edge(labels[0], labels[1], w).expect("fresh edge");
            }
            _ => {
                let root = s.internal(&mut g);
                s.attach(&mut g, root, labels, 3);
            }
        },
        GenKind::Cycle => {
            if spec.cycle_len.is_some_and(|l| l != n) {
                return Err(GenError::InfeasibleSpec(
                    "a bare cycle has exactly one node per label".into(),
                ));
            }
            if n < 4 {
                return Err(infeasible_cycle(n));
            }
            for &l in &labels {
                g.add_node(l, NodeKind::Leaf);
            }
            let w = s.cycle_weights(n);
            for k in 0..n {
                g.add_edge(labels[k], labels[(k + 1) % n], w[k].clone()).expect("fresh edge");
            }
            cycle = Some(labels);
        }
        GenKind::Genus1 => {
            let len = match spec.cycle_len {
                Some(l) => l,
                None => s.rng.random_range(4..=8),
            };
            let m = len.min(n);
            if m < 4 {
                return Err(infeasible_cycle(m));
            }
            // split labels into m nonempty groups, one per effective node
            let mut cuts: Vec<usize> = (1..n).collect();
            cuts.shuffle(&mut s.rng);
            let mut cuts: Vec<usize> = cuts.into_iter().take(m - 1).collect();
            cuts.sort_unstable();
            cuts.push(n);
            let mut nodes = Vec::with_capacity(m);
            let mut start = 0;
            for end in cuts {
                let mut group = labels[start..end].to_vec();
                start = end;
                let node = if s.rng.random_bool(0.5) {
                    let l = group.pop().expect("nonempty group");
                    g.add_node(l, NodeKind::Leaf);
                    l
                } else {
                    s.internal(&mut g)
                };
                if !group.is_empty() {
                    s.attach(&mut g, node, group, 1);
                }
                nodes.push(node);
            }
            let w = s.cycle_weights(m);
            // spread the bare nodes over the effective edges
            bare = len - m;
            let mut extra = vec![0usize; m];
            for _ in 0..bare {
                extra[s.rng.random_range(0..m)] += 1;
            }
            let mut walk = Vec::with_capacity(len);
            for k in 0..m {
                let (u, v) = (nodes[k], nodes[(k + 1) % m]);
                walk.push(u);
                let pieces = split(&mut s, &w[k], extra[k] + 1);
                let mut prev = u;
                for piece in &pieces[..pieces.len() - 1] {
                    let x = s.internal(&mut g);
                    g.add_edge(prev, x, piece.clone()).expect("fresh edge");
                    walk.push(x);
                    prev = x;
                }
                g.add_edge(prev, v, pieces[pieces.len() - 1].clone()).expect("fresh edge");
            }
            cycle = Some(walk);
        }
    }

    let ids: Vec<Label> = (1..=n as Label).collect();
    let metric = distances_between(&g, &ids).expect("generated graph is connected");
    let matrix = DistanceMatrix::from_labeled(metric).expect("generated metric is valid");
    let unlabeled_degree2 = g
        .nodes()
        .filter(|&(l, k)| k == NodeKind::Internal && g.degree(l) == 2)
        .count();
    debug_assert_eq!(unlabeled_degree2, bare);
    Ok(GeneratedInstance {
        graph: g,
        matrix,
        cycle,
        unlabeled_degree2,
    })
}

fn infeasible_cycle(m: usize) -> GenError {
    GenError::InfeasibleSpec(format!(
        "a cycle of {m} weighted nodes cannot keep every adjacent pair within half the total"
    ))
}

/// Cuts `w` into `parts` positive pieces with sixteenths as fractions.
fn split(s: &mut Sampler, w: &Rational, parts: usize) -> Vec<Rational> {
    if parts == 1 {
        return vec![w.clone()];
    }
    let slots = 16.max(parts);
    let mut cuts: Vec<usize> = (1..slots).collect();
    cuts.shuffle(&mut s.rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    cuts.push(slots);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let piece = w.clone() * Rational::new((c - prev) as i64, slots as i64);
            prev = c;
            piece
        })
        .collect()
}
