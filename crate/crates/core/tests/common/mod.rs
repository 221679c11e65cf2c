#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use metreal::graph::WeightedGraph;
use metreal::rational::q;
use metreal::{DistanceMatrix, Label, Rational};

pub fn ints<R: AsRef<[i64]>>(rows: &[R]) -> DistanceMatrix {
    DistanceMatrix::from_integers(rows).unwrap()
}

/// Rows of small fractions written as (numerator, denominator).
pub fn fracs(rows: &[&[(i64, i64)]]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|r| r.iter().map(|&(a, b)| q(a, b)).collect())
        .collect()
}

pub fn genus_one_six() -> DistanceMatrix {
    ints(&[
        [0, 2, 5, 6, 7, 4],
        [2, 0, 5, 6, 7, 4],
        [5, 5, 0, 4, 5, 3],
        [6, 6, 4, 0, 3, 2],
        [7, 7, 5, 3, 0, 3],
        [4, 4, 3, 2, 3, 0],
    ])
}

pub fn genus_one_nine() -> DistanceMatrix {
    ints(&[
        [0, 4, 2, 6, 4, 6, 2, 2, 5],
        [4, 0, 4, 4, 4, 4, 4, 4, 4],
        [2, 4, 0, 6, 4, 6, 2, 2, 5],
        [6, 4, 6, 0, 5, 2, 6, 6, 4],
        [4, 4, 4, 5, 0, 5, 4, 4, 3],
        [6, 4, 6, 2, 5, 0, 6, 6, 4],
        [2, 4, 2, 6, 4, 6, 0, 2, 5],
        [2, 4, 2, 6, 4, 6, 2, 0, 5],
        [5, 4, 5, 4, 3, 4, 5, 5, 0],
    ])
}

pub fn five_point() -> DistanceMatrix {
    ints(&[
        [0, 4, 6, 6, 3],
        [4, 0, 5, 5, 5],
        [6, 5, 0, 2, 5],
        [6, 5, 2, 0, 5],
        [3, 5, 5, 5, 0],
    ])
}

pub fn square_with_leaves() -> DistanceMatrix {
    ints(&[[0, 5, 7, 7], [5, 0, 7, 10], [7, 7, 0, 9], [7, 10, 9, 0]])
}

pub fn leaf_tree() -> DistanceMatrix {
    ints(&[[0, 3, 5, 6], [3, 0, 6, 7], [5, 6, 0, 7], [6, 7, 7, 0]])
}

pub fn two_realizations() -> DistanceMatrix {
    ints(&[[0, 3, 5, 4], [3, 0, 5, 5], [5, 5, 0, 5], [4, 5, 5, 0]])
}

pub fn two_cherries() -> DistanceMatrix {
    ints(&[[0, 2, 3, 3], [2, 0, 3, 3], [3, 3, 0, 2], [3, 3, 2, 0]])
}

/// The star example with the asymmetric entry in its last row set to 7.
pub fn star() -> DistanceMatrix {
    ints(&[[0, 3, 4, 5], [3, 0, 5, 6], [4, 5, 0, 7], [5, 6, 7, 0]])
}

pub fn hexagon() -> DistanceMatrix {
    ints(&[
        [0, 3, 4, 1, 3, 2],
        [3, 0, 2, 4, 3, 1],
        [4, 2, 0, 3, 1, 3],
        [1, 4, 3, 0, 2, 3],
        [3, 3, 1, 2, 0, 4],
        [2, 1, 3, 3, 4, 0],
    ])
}

/// Two unit triangles glued at label 3.
pub fn figure_eight_graph() -> WeightedGraph {
    let mut g = WeightedGraph::new();
    for (u, v) in [(1, 2), (2, 3), (3, 1), (3, 4), (4, 5), (5, 3)] {
        g.add_edge(u, v, q(1, 1)).unwrap();
    }
    g
}

/// Single-source shortest paths from every label, by Dijkstra on exact
/// rationals. Independent of the Floyd–Warshall oracle.
pub fn dijkstra_distances(g: &WeightedGraph, labels: &[Label]) -> Option<Vec<Vec<Rational>>> {
    let mut adj: BTreeMap<Label, Vec<(Label, Rational)>> = BTreeMap::new();
    for (l, _) in g.nodes() {
        adj.entry(l).or_default();
    }
    for (u, v, w) in g.edges() {
        adj.get_mut(&u).unwrap().push((v, w.clone()));
        adj.get_mut(&v).unwrap().push((u, w.clone()));
    }
    let mut out = Vec::new();
    for &src in labels {
        let mut dist: BTreeMap<Label, Rational> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((Rational::zero(), src)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if dist.contains_key(&u) {
                continue;
            }
            dist.insert(u, d.clone());
            for (v, w) in &adj[&u] {
                if !dist.contains_key(v) {
                    heap.push(Reverse((&d + w, *v)));
                }
            }
        }
        let row = labels.iter().map(|l| dist.get(l).cloned()).collect::<Option<Vec<_>>>()?;
        out.push(row);
    }
    Some(out)
}

pub fn sorted(mut v: Vec<Rational>) -> Vec<Rational> {
    v.sort();
    v
}
