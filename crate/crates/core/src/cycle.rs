//! Recognition of metrics realized by a single weighted cycle.
//!
//! A matrix is a cycle metric iff some cyclic order of its labels makes
//! every entry equal to the shorter of the two arcs between its endpoints,
//! with consecutive entries as edge weights. [`verify_cycle`] checks a
//! given order in O(n²); [`find_cycle_order`] proposes one in O(n³) and
//! [`exhaustive_cycle_search`] enumerates all orders for small n.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::metric::{DistanceMatrix, Label};
use crate::rational::Rational;

pub const DEFAULT_EXHAUSTIVE_MAX: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycleError {
    #[error("permutation is not a bijection on its label set")]
    NotABijection,
    #[error("cyclic order needs at least 3 labels, got {0}")]
    OrderTooSmall(usize),
    #[error("cyclic order does not list exactly the matrix labels")]
    LabelMismatch,
    #[error("{0}")]
    ConditionFailed(Box<CycleViolation>),
    #[error("exhaustive search limited to {max} labels, got {n}")]
    OrderTooLarge { n: usize, max: usize },
}

/// A label `i` and step count `s` where `d(i, π^s(i))` differs from the
/// shorter arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleViolation {
    pub i: Label,
    pub s: usize,
    pub partner: Label,
    pub lhs: Rational,
    pub forward: Rational,
    pub backward: Rational,
}

impl fmt::Display for CycleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ConditionFailed(i={}, s={}): d({},{}) = {} != min({}, {})",
            self.i, self.s, self.i, self.partner, self.lhs, self.forward, self.backward
        )
    }
}

/// Cyclic sequence of labels, rotated to start at the smallest label.
/// Consecutive entries (and last/first) are adjacent on the cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct CyclicOrder(Vec<Label>);

impl CyclicOrder {
    pub fn new(sequence: Vec<Label>) -> Result<Self, CycleError> {
        if sequence.len() < 3 {
            return Err(CycleError::OrderTooSmall(sequence.len()));
        }
        let distinct: BTreeSet<Label> = sequence.iter().copied().collect();
        if distinct.len() != sequence.len() {
            return Err(CycleError::NotABijection);
        }
        let start = sequence.iter().position_min().expect("nonempty");
        let mut seq = sequence;
        seq.rotate_left(start);
        Ok(CyclicOrder(seq))
    }

    /// Orbit `(1, π(1), π²(1), …)` of a permutation given as a map.
    pub fn from_permutation(perm: &BTreeMap<Label, Label>) -> Result<Self, CycleError> {
        if !is_real_permutation(perm)? {
            return Err(CycleError::NotABijection);
        }
        let start = *perm.keys().next().expect("nonempty");
        let mut seq = vec![start];
        let mut cur = perm[&start];
        while cur != start {
            seq.push(cur);
            cur = perm[&cur];
        }
        CyclicOrder::new(seq)
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Label `s` steps after position `p`.
    pub fn step(&self, p: usize, s: usize) -> Label {
        self.0[(p + s) % self.0.len()]
    }

    /// Same cycle traversed the other way.
    pub fn reversed(&self) -> CyclicOrder {
        let mut seq = self.0.clone();
        seq[1..].reverse();
        CyclicOrder(seq)
    }

    /// Representative of the rotation/reflection class: anchored at the
    /// smallest label and heading toward its smaller neighbor.
    pub fn canonical(&self) -> CyclicOrder {
        let n = self.0.len();
        if self.0[n - 1] < self.0[1] {
            self.reversed()
        } else {
            self.clone()
        }
    }

    /// The permutation `label ↦ next label`.
    pub fn successor_map(&self) -> BTreeMap<Label, Label> {
        let n = self.0.len();
        (0..n).map(|p| (self.0[p], self.step(p, 1))).collect()
    }
}

impl fmt::Display for CyclicOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

/// Cycle realization witnessed by a cyclic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleCertificate {
    pub order: CyclicOrder,
    /// `weights[k]` is the edge between `order[k]` and `order[k+1]`.
    pub weights: Vec<Rational>,
    /// Adjacent-triple equality holds everywhere, so the cycle is the
    /// unique optimal realization.
    pub optimal: bool,
}

impl CycleCertificate {
    pub fn total_weight(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Label, Label, &Rational)> + '_ {
        let seq = self.order.as_slice();
        let n = seq.len();
        self.weights
            .iter()
            .enumerate()
            .map(move |(k, w)| (seq[k], seq[(k + 1) % n], w))
    }
}

/// True iff `perm` is a single cycle through all of its labels.
pub fn is_real_permutation(perm: &BTreeMap<Label, Label>) -> Result<bool, CycleError> {
    let images: BTreeSet<Label> = perm.values().copied().collect();
    if images.len() != perm.len() || images.iter().any(|l| !perm.contains_key(l)) {
        return Err(CycleError::NotABijection);
    }
    let Some(&start) = perm.keys().next() else {
        return Ok(false);
    };
    let mut len = 1;
    let mut cur = perm[&start];
    while cur != start {
        len += 1;
        cur = perm[&cur];
    }
    Ok(len == perm.len() && len >= 2)
}

/// Permutation of `1..=n` in one-line notation: `images[k-1]` is the image of `k`.
pub fn permutation_from_images(images: &[Label]) -> BTreeMap<Label, Label> {
    images
        .iter()
        .enumerate()
        .map(|(k, &v)| (k as Label + 1, v))
        .collect()
}

struct Arcs<'a> {
    d: &'a DistanceMatrix,
    pos: Vec<usize>,
    /// prefix[k] = sum of the first k edges, over two laps
    prefix: Vec<Rational>,
    total: Rational,
}

impl<'a> Arcs<'a> {
    fn new(d: &'a DistanceMatrix, order: &CyclicOrder) -> Result<Self, CycleError> {
        let n = order.len();
        if n < 3 {
            return Err(CycleError::OrderTooSmall(n));
        }
        if n != d.order() {
            return Err(CycleError::LabelMismatch);
        }
        let pos = order
            .as_slice()
            .iter()
            .map(|&l| d.position(l).ok_or(CycleError::LabelMismatch))
            .collect::<Result<Vec<_>, _>>()?;
        let mut prefix = Vec::with_capacity(2 * n + 1);
        prefix.push(Rational::zero());
        for k in 0..2 * n {
            let w = d.at(pos[k % n], pos[(k + 1) % n]);
            let next = prefix[k].clone() + w;
            prefix.push(next);
        }
        let total = prefix[n].clone();
        Ok(Arcs { d, pos, prefix, total })
    }

    fn n(&self) -> usize {
        self.pos.len()
    }

    fn weight(&self, k: usize) -> &Rational {
        let n = self.n();
        self.d.at(self.pos[k % n], self.pos[(k + 1) % n])
    }

    /// (entry, forward arc, backward arc) for position `p` and step `s`.
    fn terms(&self, p: usize, s: usize) -> (Rational, Rational, Rational) {
        let n = self.n();
        let lhs = self.d.at(self.pos[p], self.pos[(p + s) % n]).clone();
        let forward = &self.prefix[p + s] - &self.prefix[p];
        let backward = &self.total - &forward;
        (lhs, forward, backward)
    }

    fn violation(&self, order: &CyclicOrder, p: usize, s: usize) -> Option<CycleViolation> {
        let (lhs, forward, backward) = self.terms(p, s);
        let shorter = if forward <= backward { &forward } else { &backward };
        (lhs != *shorter).then(|| CycleViolation {
            i: order.as_slice()[p],
            s,
            partner: order.step(p, s),
            lhs,
            forward,
            backward,
        })
    }
}

/// Every `(i, s)` with `2 <= s <= n-2` violating the arc condition, in
/// order of position then step. Steps 1 and n−1 hold trivially.
pub fn cycle_violations(
    d: &DistanceMatrix,
    order: &CyclicOrder,
) -> Result<Vec<CycleViolation>, CycleError> {
    let arcs = Arcs::new(d, order)?;
    let n = arcs.n();
    let mut out = Vec::new();
    for p in 0..n {
        for s in 2..n.saturating_sub(1) {
            if let Some(v) = arcs.violation(order, p, s) {
                out.push(v);
            }
        }
    }
    Ok(out)
}

/// Checks that `order` realizes `d` as a weighted cycle; returns the
/// certificate or the first violation found.
pub fn verify_cycle(d: &DistanceMatrix, order: &CyclicOrder) -> Result<CycleCertificate, CycleError> {
    let arcs = Arcs::new(d, order)?;
    let n = arcs.n();
    for p in 0..n {
        for s in 2..n - 1 {
            if let Some(v) = arcs.violation(order, p, s) {
                return Err(CycleError::ConditionFailed(Box::new(v)));
            }
        }
    }
    let weights = (0..n).map(|k| arcs.weight(k).clone()).collect();
    Ok(CycleCertificate {
        order: order.clone(),
        weights,
        optimal: check_cycle_optimality(d, order),
    })
}

/// Adjacent-triple condition: `d(v_{k-1}, v_k) + d(v_k, v_{k+1}) = d(v_{k-1}, v_{k+1})`
/// for every position `k`.
pub fn check_cycle_optimality(d: &DistanceMatrix, order: &CyclicOrder) -> bool {
    let seq = order.as_slice();
    let n = seq.len();
    let at = |a: Label, b: Label| d.get(a, b).expect("order labels belong to the matrix");
    (0..n).all(|k| {
        let prev = seq[(k + n - 1) % n];
        let cur = seq[k];
        let next = seq[(k + 1) % n];
        at(prev, cur) + at(cur, next) == *at(prev, next)
    })
}

/// Positions of the two smallest off-diagonal entries of row `i` among
/// `candidates`, ties broken by smaller label.
fn nearest(
    d: &DistanceMatrix,
    i: usize,
    candidates: impl Iterator<Item = usize>,
) -> Vec<(&Rational, Label, usize)> {
    let labels = d.labels();
    let mut all: Vec<(&Rational, Label, usize)> = candidates
        .filter(|&j| j != i)
        .map(|j| (d.at(i, j), labels[j], j))
        .collect();
    all.sort();
    all
}

/// Proposes a cyclic order, or `None` when no candidate is found. Tries the
/// betweenness graph first, then a greedy nearest-neighbour walk. Either
/// candidate still has to pass [`verify_cycle`].
pub fn find_cycle_order(d: &DistanceMatrix) -> Option<CyclicOrder> {
    betweenness_order(d).or_else(|| greedy_order(d))
}

/// Joins `i` and `j` when no third label sits on a shortest path between
/// them. On a cycle metric whose edges are all shorter than half the
/// circumference this graph is the cycle itself.
fn betweenness_order(d: &DistanceMatrix) -> Option<CyclicOrder> {
    let n = d.order();
    if n < 3 {
        return None;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let between = (0..n).any(|k| k != i && k != j && d.at(i, k) + d.at(k, j) == *d.at(i, j));
            if !between {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    if adj.iter().any(|a| a.len() != 2) {
        return None;
    }
    let mut walk = vec![0usize];
    let (mut prev, mut cur) = (0usize, adj[0][0]);
    while cur != 0 {
        if walk.len() == n {
            return None;
        }
        walk.push(cur);
        let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
        (prev, cur) = (cur, next);
    }
    if walk.len() != n {
        return None;
    }
    let labels = d.labels();
    CyclicOrder::new(walk.into_iter().map(|p| labels[p]).collect()).ok()
}

/// Greedy nearest-neighbour proposal. The anchor is the
/// smallest label; its nearest neighbour comes next and its second nearest
/// is held back to close the cycle. The walk then repeatedly moves to the
/// nearest unvisited label. The candidate is returned only if the closing
/// edge is among the two shortest entries of the last row.
fn greedy_order(d: &DistanceMatrix) -> Option<CyclicOrder> {
    let n = d.order();
    if n < 3 {
        return None;
    }
    let anchor = d.labels().iter().position_min().expect("nonempty");
    let first = nearest(d, anchor, 0..n);
    let (next, closing) = (first[0].2, first[1].2);
    let mut used = vec![false; n];
    for p in [anchor, next, closing] {
        used[p] = true;
    }
    let mut walk = vec![anchor, next];
    for _ in 2..n - 1 {
        let last = *walk.last().expect("nonempty");
        let pick = nearest(d, last, (0..n).filter(|&j| !used[j]))[0].2;
        used[pick] = true;
        walk.push(pick);
    }
    let last = *walk.last().expect("nonempty");
    let row = nearest(d, last, 0..n);
    if d.at(last, closing) > row[1].0 {
        return None;
    }
    walk.push(closing);
    let labels = d.labels();
    CyclicOrder::new(walk.into_iter().map(|p| labels[p]).collect()).ok()
}

/// Tries every cyclic order with the smallest label first and the second
/// entry smaller than the last, in lexicographic order; returns the first
/// that verifies.
pub fn exhaustive_cycle_search(
    d: &DistanceMatrix,
    max_n: usize,
) -> Result<Option<CyclicOrder>, CycleError> {
    let n = d.order();
    if n > max_n {
        return Err(CycleError::OrderTooLarge { n, max: max_n });
    }
    if n < 3 {
        return Ok(None);
    }
    let mut labels = d.labels().to_vec();
    labels.sort_unstable();
    let anchor = labels[0];
    for rest in labels[1..].iter().copied().permutations(n - 1) {
        if rest[0] > rest[n - 2] {
            continue;
        }
        let mut seq = Vec::with_capacity(n);
        seq.push(anchor);
        seq.extend(rest);
        let order = CyclicOrder(seq);
        if verify_cycle(d, &order).is_ok() {
            return Ok(Some(order));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn hexagon() -> DistanceMatrix {
        DistanceMatrix::from_integers(&[
            [0, 3, 4, 1, 3, 2],
            [3, 0, 2, 4, 3, 1],
            [4, 2, 0, 3, 1, 3],
            [1, 4, 3, 0, 2, 3],
            [3, 3, 1, 2, 0, 4],
            [2, 1, 3, 3, 4, 0],
        ])
        .unwrap()
    }

    fn order(seq: &[Label]) -> CyclicOrder {
        CyclicOrder::new(seq.to_vec()).unwrap()
    }

    #[test]
    fn real_permutations() {
        assert!(is_real_permutation(&permutation_from_images(&[2, 3, 4, 5, 1])).unwrap());
        assert!(!is_real_permutation(&permutation_from_images(&[2, 1, 4, 5, 3])).unwrap());
        assert!(!is_real_permutation(&permutation_from_images(&[1, 2, 3])).unwrap());
        assert_eq!(
            is_real_permutation(&permutation_from_images(&[2, 2, 3])).unwrap_err(),
            CycleError::NotABijection
        );
        assert_eq!(
            is_real_permutation(&permutation_from_images(&[2, 7, 1])).unwrap_err(),
            CycleError::NotABijection
        );
    }

    #[test]
    fn orbit_notation_of_hexagon_permutation() {
        // 1 -> 4 -> 5 -> 3 -> 2 -> 6 -> 1
        let perm: BTreeMap<Label, Label> =
            [(1, 4), (4, 5), (5, 3), (3, 2), (2, 6), (6, 1)].into_iter().collect();
        let o = CyclicOrder::from_permutation(&perm).unwrap();
        assert_eq!(o.as_slice(), &[1, 4, 5, 3, 2, 6]);
        assert_eq!(o.step(0, 2), 5);
        assert_eq!(o.successor_map(), perm);
    }

    #[test]
    fn canonical_orientation() {
        let o = order(&[3, 1, 6, 2, 5, 4]);
        assert_eq!(o.as_slice(), &[1, 6, 2, 5, 4, 3]);
        assert_eq!(o.canonical().as_slice(), &[1, 3, 4, 5, 2, 6]);
        assert_eq!(o.canonical(), o.reversed().canonical());
    }

    #[test]
    fn hexagon_order_verifies() {
        let cert = verify_cycle(&hexagon(), &order(&[1, 4, 5, 3, 2, 6])).unwrap();
        let w: Vec<Rational> = [1, 2, 1, 2, 1, 2].iter().map(|&x| q(x, 1)).collect();
        assert_eq!(cert.weights, w);
        assert!(cert.optimal);
        assert_eq!(cert.total_weight(), q(9, 1));
    }

    #[test]
    fn naive_order_is_rejected() {
        let d = hexagon();
        let naive = order(&[1, 2, 3, 4, 5, 6]);
        assert!(matches!(verify_cycle(&d, &naive), Err(CycleError::ConditionFailed(_))));
        let all = cycle_violations(&d, &naive).unwrap();
        let pair = all.iter().find(|v| v.i == 1 && v.partner == 5).unwrap();
        assert_eq!((pair.s, &pair.lhs), (4, &q(3, 1)));
        assert_eq!((&pair.forward, &pair.backward), (&q(10, 1), &q(6, 1)));
    }

    #[test]
    fn triangle_is_vacuous() {
        let tri = DistanceMatrix::from_integers(&[[0, 2, 2], [2, 0, 2], [2, 2, 0]]).unwrap();
        let cert = verify_cycle(&tri, &order(&[1, 2, 3])).unwrap();
        assert_eq!(cert.weights, vec![q(2, 1); 3]);
        assert!(!cert.optimal);
        assert_eq!(find_cycle_order(&tri).unwrap().as_slice(), &[1, 2, 3]);
        assert_eq!(exhaustive_cycle_search(&tri, 9).unwrap().unwrap().as_slice(), &[1, 2, 3]);
    }

    #[test]
    fn recovers_hexagon_order() {
        assert_eq!(find_cycle_order(&hexagon()).unwrap().as_slice(), &[1, 4, 5, 3, 2, 6]);
    }

    #[test]
    fn nearest_label_need_not_be_adjacent() {
        // edges 1,1,3,3,3,3 around the cycle; label 3 is closer to 1 than 6 is
        let pos = [0i64, 1, 2, 5, 8, 11];
        let rows: Vec<Vec<i64>> = pos
            .iter()
            .map(|&p| pos.iter().map(|&r| (p - r).abs().min(14 - (p - r).abs())).collect())
            .collect();
        let d = DistanceMatrix::from_integers(&rows).unwrap();
        assert!(greedy_order(&d).is_none_or(|o| verify_cycle(&d, &o).is_err()));
        let found = find_cycle_order(&d).unwrap();
        assert_eq!(found.as_slice(), &[1, 2, 3, 4, 5, 6]);
        assert!(verify_cycle(&d, &found).is_ok());
    }

    #[test]
    fn greedy_on_square_of_three_halves() {
        let d = DistanceMatrix::validate(
            [[0, 3, 6, 3], [3, 0, 3, 6], [6, 3, 0, 3], [3, 6, 3, 0]]
                .iter()
                .map(|r| r.iter().map(|&x| q(x, 2)).collect())
                .collect(),
            None,
        )
        .unwrap();
        assert_eq!(find_cycle_order(&d).unwrap().as_slice(), &[1, 2, 3, 4]);
    }

    #[test]
    fn exhaustive_search_cases() {
        let found = exhaustive_cycle_search(&hexagon(), 9).unwrap().unwrap();
        assert_eq!(found.canonical(), order(&[1, 4, 5, 3, 2, 6]).canonical());
        let tree = DistanceMatrix::from_integers(&[[0, 3, 5, 6], [3, 0, 6, 7], [5, 6, 0, 7], [6, 7, 7, 0]])
            .unwrap();
        assert_eq!(exhaustive_cycle_search(&tree, 9).unwrap(), None);
        assert_eq!(
            exhaustive_cycle_search(&hexagon(), 5).unwrap_err(),
            CycleError::OrderTooLarge { n: 6, max: 5 }
        );
    }

    #[test]
    fn heavy_edge_square_is_not_optimal() {
        // path metric of a 4-cycle with weights 1, 1, 1, 100
        let d = DistanceMatrix::from_integers(&[[0, 1, 2, 3], [1, 0, 1, 2], [2, 1, 0, 1], [3, 2, 1, 0]])
            .unwrap();
        let o = order(&[1, 2, 3, 4]);
        let cert = verify_cycle(&d, &o).unwrap();
        assert!(!cert.optimal);
        assert!(!check_cycle_optimality(&d, &o));
    }

    #[test]
    fn mismatched_orders() {
        let d = hexagon();
        assert_eq!(
            verify_cycle(&d, &order(&[1, 2, 3])).unwrap_err(),
            CycleError::LabelMismatch
        );
        assert_eq!(
            verify_cycle(&d, &order(&[1, 2, 3, 4, 5, 9])).unwrap_err(),
            CycleError::LabelMismatch
        );
        assert_eq!(CyclicOrder::new(vec![1, 2]).unwrap_err(), CycleError::OrderTooSmall(2));
        assert_eq!(CyclicOrder::new(vec![1, 2, 2]).unwrap_err(), CycleError::NotABijection);
    }
}
