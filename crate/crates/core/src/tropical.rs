//! Min-plus evaluation of the cycle polynomials and their pendant-weighted
//! variants.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::compaction::CompactionVector;
use crate::cycle::CyclicOrder;
use crate::metric::{DistanceMatrix, Label};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TropicalError {
    #[error("step {s} outside 2..={max}")]
    SOutOfRange { s: usize, max: usize },
    #[error("label {0} is not in the cyclic order")]
    UnknownLabel(Label),
    #[error("cyclic order does not list exactly the matrix labels")]
    LabelMismatch,
    #[error("compaction vector labels do not match the matrix")]
    MisalignedVector,
}

/// Evaluated monomials of a tropical polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TropicalEvaluation {
    pub terms: Vec<Rational>,
    pub minimum: Rational,
    /// Number of terms attaining the minimum.
    pub multiplicity: usize,
}

impl TropicalEvaluation {
    pub fn from_terms(terms: Vec<Rational>) -> Self {
        let minimum = Rational::min_of(terms.iter()).expect("at least one term");
        let multiplicity = terms.iter().filter(|t| **t == minimum).count();
        TropicalEvaluation {
            terms,
            minimum,
            multiplicity,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.multiplicity >= 2
    }
}

impl fmt::Display for TropicalEvaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.terms.iter().map(ToString::to_string).collect();
        write!(
            f,
            "min({}) = {} x{}",
            terms.join(", "),
            self.minimum,
            self.multiplicity
        )
    }
}

struct Walk<'a> {
    d: &'a DistanceMatrix,
    /// Orbit of `i`: orbit[k] = π^k(i).
    orbit: Vec<Label>,
}

impl<'a> Walk<'a> {
    fn new(d: &'a DistanceMatrix, order: &CyclicOrder, i: Label, s: usize) -> Result<Self, TropicalError> {
        let n = order.len();
        if n != d.order() || order.as_slice().iter().any(|&l| d.position(l).is_none()) {
            return Err(TropicalError::LabelMismatch);
        }
        let start = order
            .as_slice()
            .iter()
            .position(|&l| l == i)
            .ok_or(TropicalError::UnknownLabel(i))?;
        let max = n.saturating_sub(2);
        if s < 2 || s > max {
            return Err(TropicalError::SOutOfRange { s, max });
        }
        let orbit = (0..n).map(|k| order.step(start, k)).collect();
        Ok(Walk { d, orbit })
    }

    fn n(&self) -> usize {
        self.orbit.len()
    }

    fn at(&self, k: usize) -> Label {
        self.orbit[k % self.n()]
    }

    fn dist(&self, a: Label, b: Label) -> Rational {
        self.d.get(a, b).expect("checked labels").clone()
    }

    /// Sum of edge weights from orbit position `from` to `to` (exclusive end
    /// index is `to`, wrapping at n).
    fn arc(&self, from: usize, to: usize) -> Rational {
        (from..to).map(|t| self.dist(self.at(t), self.at(t + 1))).sum()
    }

    fn plain_terms(&self, s: usize) -> [Rational; 3] {
        let n = self.n();
        [
            self.dist(self.at(0), self.at(s)),
            self.arc(0, s),
            self.arc(s, n),
        ]
    }
}

/// The three monomials `d(i, π^s i)`, the forward arc and the backward arc.
pub fn eval_p(
    d: &DistanceMatrix,
    order: &CyclicOrder,
    i: Label,
    s: usize,
) -> Result<TropicalEvaluation, TropicalError> {
    let walk = Walk::new(d, order, i, s)?;
    Ok(TropicalEvaluation::from_terms(walk.plain_terms(s).to_vec()))
}

/// True when every `p_is`, `2 <= s <= n-2`, attains its minimum twice.
/// Vacuously true below four labels.
pub fn is_tropical_cycle_zero(d: &DistanceMatrix, order: &CyclicOrder) -> Result<bool, TropicalError> {
    for (_, _, e) in sweep(d, order)? {
        if !e.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// As [`eval_p`], each term shifted by twice the compaction values over:
/// every label except `i` and `π^s i` for the entry; the backward interior
/// `π^{s+1} i ..= π^{n-1} i` for the forward arc; the forward interior
/// `π i ..= π^{s-1} i` for the backward arc.
pub fn eval_p_tilde(
    d: &DistanceMatrix,
    a: &CompactionVector,
    order: &CyclicOrder,
    i: Label,
    s: usize,
) -> Result<TropicalEvaluation, TropicalError> {
    let walk = Walk::new(d, order, i, s)?;
    if a.labels().len() != d.order() || d.labels().iter().any(|&l| a.get(l).is_none()) {
        return Err(TropicalError::MisalignedVector);
    }
    let n = walk.n();
    let two_a = |k: usize| {
        let v = a.get(walk.at(k)).expect("aligned");
        v + v
    };
    let [entry, forward, backward] = walk.plain_terms(s);
    let entry_shift: Rational = (1..n).filter(|&k| k != s).map(two_a).sum();
    let forward_shift: Rational = (s + 1..n).map(two_a).sum();
    let backward_shift: Rational = (1..s).map(two_a).sum();
    Ok(TropicalEvaluation::from_terms(vec![
        entry + entry_shift,
        forward + forward_shift,
        backward + backward_shift,
    ]))
}

/// Every `(i, s, p_is)` in the order's label sequence, then by step.
pub fn sweep(
    d: &DistanceMatrix,
    order: &CyclicOrder,
) -> Result<Vec<(Label, usize, TropicalEvaluation)>, TropicalError> {
    sweep_with(order, |i, s| eval_p(d, order, i, s))
}

/// Every `(i, s, p̃_is)`, same ordering as [`sweep`].
pub fn sweep_tilde(
    d: &DistanceMatrix,
    a: &CompactionVector,
    order: &CyclicOrder,
) -> Result<Vec<(Label, usize, TropicalEvaluation)>, TropicalError> {
    sweep_with(order, |i, s| eval_p_tilde(d, a, order, i, s))
}

fn sweep_with(
    order: &CyclicOrder,
    mut eval: impl FnMut(Label, usize) -> Result<TropicalEvaluation, TropicalError>,
) -> Result<Vec<(Label, usize, TropicalEvaluation)>, TropicalError> {
    let n = order.len();
    let mut out = Vec::new();
    for &i in order.as_slice() {
        for s in 2..n.saturating_sub(1) {
            out.push((i, s, eval(i, s)?));
        }
    }
    Ok(out)
}
