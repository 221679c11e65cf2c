//! Compaction and reduction of distance matrices.
//!
//! The compaction value of an index is the largest amount that can be
//! subtracted from its row and column while keeping a metric:
//! `a_i = ½ · min { d(p,i) + d(i,r) − d(p,r) : p ≠ r, p, r ≠ i }`.
//! The compaction matrix subtracts all of these at once; rows that become
//! identical mark leaves hanging off a common interior node and are merged
//! by [`reduce`].

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::kernel;
use crate::metric::{DistanceMatrix, Label, LabeledMatrix, MetricError};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompactionError {
    #[error("compaction needs at least 3 rows, got {0}")]
    OrderTooSmall(usize),
    #[error("unknown label {0}")]
    UnknownLabel(Label),
    #[error("compaction vector labels do not match the matrix")]
    MisalignedVector,
    #[error("alpha {alpha} exceeds the maximal compaction {max} of label {label}")]
    AlphaTooLarge {
        label: Label,
        alpha: Rational,
        max: Rational,
    },
    #[error("alpha {0} is negative")]
    NegativeAlpha(Rational),
    /// Subtracting all compaction values at once left a negative entry or a
    /// broken triangle; the input lies outside the realizable class.
    #[error("simultaneous compaction broken at ({i},{j}){}", .k.map(|k| format!(" via {k}")).unwrap_or_default())]
    SimultaneousCompactionBroken {
        i: Label,
        j: Label,
        k: Option<Label>,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Per-label maximal compaction values, aligned with a matrix's labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompactionVector {
    labels: Vec<Label>,
    values: Vec<Rational>,
}

impl CompactionVector {
    pub fn new(labels: Vec<Label>, values: Vec<Rational>) -> Self {
        assert_eq!(labels.len(), values.len());
        CompactionVector { labels, values }
    }

    pub fn zeros(labels: &[Label]) -> Self {
        CompactionVector {
            labels: labels.to_vec(),
            values: vec![Rational::zero(); labels.len()],
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, label: Label) -> Option<&Rational> {
        let pos = self.labels.iter().position(|&l| l == label)?;
        Some(&self.values[pos])
    }

    pub fn is_null(&self) -> bool {
        self.values.iter().all(Rational::is_zero)
    }

    /// `(1, 3/2, 1)` style rendering.
    pub fn display_tuple(&self) -> String {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// Maximal admissible compaction of a single label.
pub fn max_single_compaction(d: &DistanceMatrix, label: Label) -> Result<Rational, CompactionError> {
    let n = d.order();
    if n < 3 {
        return Err(CompactionError::OrderTooSmall(n));
    }
    let i = d.position(label).ok_or(CompactionError::UnknownLabel(label))?;
    let mut best: Option<Rational> = None;
    for p in 0..n {
        for r in (p + 1)..n {
            if p == i || r == i {
                continue;
            }
            let v = &(d.at(p, i) + d.at(i, r)) - d.at(p, r);
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    Ok(best.expect("n >= 3").half())
}

/// All compaction values, each computed on the original matrix.
pub fn compaction_vector(d: &DistanceMatrix) -> Result<CompactionVector, CompactionError> {
    let n = d.order();
    if n < 3 {
        return Err(CompactionError::OrderTooSmall(n));
    }
    let scaled = d.as_labeled().scaled();
    let twice_scale = &scaled.scale * BigInt::from(2);
    let values = kernel::gromov_minima(&scaled)
        .into_iter()
        .map(|g| Rational::new(g, twice_scale.clone()))
        .collect();
    Ok(CompactionVector {
        labels: d.labels().to_vec(),
        values,
    })
}

/// `m_ij = d_ij − a_i − a_j` off the diagonal, checked to be a nonnegative
/// dissimilarity satisfying the triangle inequality.
pub fn compaction_matrix(
    d: &DistanceMatrix,
    a: &CompactionVector,
) -> Result<LabeledMatrix, CompactionError> {
    if a.labels() != d.labels() {
        return Err(CompactionError::MisalignedVector);
    }
    let n = d.order();
    let labels = d.labels();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                entries.push(Rational::zero());
                continue;
            }
            let m = &(d.at(i, j) - &a.values[i]) - &a.values[j];
            if m.is_negative() {
                return Err(CompactionError::SimultaneousCompactionBroken {
                    i: labels[i],
                    j: labels[j],
                    k: None,
                });
            }
            entries.push(m);
        }
    }
    let m = LabeledMatrix::from_parts(labels.to_vec(), entries);
    if let Some((i, j, k)) = kernel::first_triangle_violation(&m.scaled()) {
        return Err(CompactionError::SimultaneousCompactionBroken {
            i: labels[i],
            j: labels[j],
            k: Some(labels[k]),
        });
    }
    Ok(m)
}

/// Subtracts `alpha` from the off-diagonal row and column of `label`.
/// Admissible for `0 <= alpha <= max_single_compaction`; the result is
/// re-validated, so a compaction that drives an entry to zero is rejected
/// like any other pseudometric.
pub fn single_compaction(
    d: &DistanceMatrix,
    label: Label,
    alpha: &Rational,
) -> Result<DistanceMatrix, CompactionError> {
    if alpha.is_negative() {
        return Err(CompactionError::NegativeAlpha(alpha.clone()));
    }
    let max = max_single_compaction(d, label)?;
    if *alpha > max {
        return Err(CompactionError::AlphaTooLarge {
            label,
            alpha: alpha.clone(),
            max,
        });
    }
    let i = d.position(label).expect("checked above");
    let rows = subtract_index(d.as_labeled(), i, alpha);
    Ok(DistanceMatrix::validate(rows, Some(d.labels().to_vec()))?)
}

pub(crate) fn subtract_index(m: &LabeledMatrix, i: usize, alpha: &Rational) -> Vec<Vec<Rational>> {
    let n = m.order();
    (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let v = m.at(r, c);
                    if r != c && (r == i || c == i) {
                        v - alpha
                    } else {
                        v.clone()
                    }
                })
                .collect()
        })
        .collect()
}

/// Partition of labels into classes of identical rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowGroups {
    /// Classes of size ≥ 2, ordered by the row position of their first member.
    pub groups: Vec<Vec<Label>>,
    /// Labels whose row is unique, in row order.
    pub singletons: Vec<Label>,
}

/// Groups labels whose rows are equal in every coordinate.
///
/// Classes keep the matrix's row order: a class is listed at the position
/// of its first member, and members are listed in row order.
pub fn group_rows(m: &LabeledMatrix) -> RowGroups {
    let n = m.order();
    let mut class_of: HashMap<&[Rational], usize> = HashMap::with_capacity(n);
    let mut classes: Vec<Vec<Label>> = Vec::new();
    for i in 0..n {
        let idx = *class_of.entry(m.row(i)).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[idx].push(m.labels()[i]);
    }
    let (groups, singles): (Vec<_>, Vec<_>) = classes.into_iter().partition(|c| c.len() >= 2);
    RowGroups {
        groups,
        singletons: singles.into_iter().map(|c| c[0]).collect(),
    }
}

/// Bookkeeping for one compaction/reduction iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionStep {
    /// Iteration index.
    pub t: usize,
    /// Labels of the matrix this iteration started from, in row order.
    pub labels: Vec<Label>,
    pub a: CompactionVector,
    pub groups: Vec<Vec<Label>>,
    pub singletons: Vec<Label>,
    /// Largest label issued before this iteration.
    pub rho_before: Label,
    /// Old label → fresh label. Group `k` (1-based) maps its first member to
    /// `rho_before + k`; singleton `k` maps to `rho_before + theta + k`.
    pub relabel: BTreeMap<Label, Label>,
}

impl ReductionStep {
    pub fn theta(&self) -> usize {
        self.groups.len()
    }

    pub fn sigma(&self) -> usize {
        self.singletons.len()
    }

    pub fn group_label(&self, k: usize) -> Label {
        self.rho_before + 1 + k as Label
    }

    pub fn singleton_label(&self, k: usize) -> Label {
        self.rho_before + (self.theta() + 1 + k) as Label
    }

    /// Largest label issued by this iteration.
    pub fn rho_after(&self) -> Label {
        self.rho_before + (self.theta() + self.sigma()) as Label
    }
}

/// Compacts, merges identical rows and relabels the survivors.
///
/// The reduced matrix keeps the row order of the surviving rows; its labels
/// are the fresh ones recorded in the step's relabel map.
pub fn reduce(
    d: &DistanceMatrix,
    a: &CompactionVector,
    rho: Label,
    t: usize,
) -> Result<(DistanceMatrix, ReductionStep), CompactionError> {
    let m = compaction_matrix(d, a)?;
    let RowGroups { groups, singletons } = group_rows(&m);
    let theta = groups.len() as Label;
    let mut relabel = BTreeMap::new();
    for (k, g) in groups.iter().enumerate() {
        relabel.insert(g[0], rho + 1 + k as Label);
    }
    for (k, &j) in singletons.iter().enumerate() {
        relabel.insert(j, rho + theta + 1 + k as Label);
    }
    let survivors: Vec<usize> = (0..m.order())
        .filter(|&i| relabel.contains_key(&m.labels()[i]))
        .collect();
    let reduced = m.select(&survivors);
    let fresh = reduced.labels().iter().map(|l| relabel[l]).collect();
    // distinct classes are at positive distance once the triangle
    // inequality holds, so the survivors form a metric
    let reduced = DistanceMatrix::trusted(reduced.with_labels(fresh));
    let step = ReductionStep {
        t,
        labels: d.labels().to_vec(),
        a: a.clone(),
        groups,
        singletons,
        rho_before: rho,
        relabel,
    };
    Ok((reduced, step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn ints(rows: &[&[i64]]) -> DistanceMatrix {
        DistanceMatrix::from_integers(rows).unwrap()
    }

    fn brute_force_a(d: &DistanceMatrix, i: usize) -> Rational {
        // all ordered pairs, p == r excluded
        let n = d.order();
        let mut vals = Vec::new();
        for p in 0..n {
            for r in 0..n {
                if p != i && r != i && p != r {
                    vals.push(&(d.at(p, i) + d.at(i, r)) - d.at(p, r));
                }
            }
        }
        vals.into_iter().min().unwrap().half()
    }

    fn small_tree() -> DistanceMatrix {
        ints(&[&[0, 3, 5, 6], &[3, 0, 6, 7], &[5, 6, 0, 7], &[6, 7, 7, 0]])
    }

    #[test]
    fn single_compaction_values() {
        assert_eq!(max_single_compaction(&small_tree(), 1).unwrap(), q(1, 1));
        let square = ints(&[&[0, 3, 5, 4], &[3, 0, 5, 5], &[5, 5, 0, 5], &[4, 5, 5, 0]]);
        assert_eq!(max_single_compaction(&square, 2).unwrap(), q(3, 2));
        let tri = ints(&[&[0, 2, 2], &[2, 0, 2], &[2, 2, 0]]);
        assert_eq!(max_single_compaction(&tri, 1).unwrap(), brute_force_a(&tri, 0));
        assert_eq!(max_single_compaction(&tri, 1).unwrap(), q(1, 1));
    }

    #[test]
    fn small_orders_are_rejected() {
        let d = ints(&[&[0, 3], &[3, 0]]);
        assert_eq!(
            max_single_compaction(&d, 1).unwrap_err(),
            CompactionError::OrderTooSmall(2)
        );
        assert_eq!(compaction_vector(&d).unwrap_err(), CompactionError::OrderTooSmall(2));
    }

    #[test]
    fn compaction_vector_matches_single_and_brute_force() {
        let d = ints(&[&[0, 3, 5, 4], &[3, 0, 5, 5], &[5, 5, 0, 5], &[4, 5, 5, 0]]);
        let a = compaction_vector(&d).unwrap();
        assert_eq!(a.values(), &[q(1, 1), q(3, 2), q(5, 2), q(2, 1)]);
        for (i, &l) in d.labels().iter().enumerate() {
            assert_eq!(a.get(l).unwrap(), &max_single_compaction(&d, l).unwrap());
            assert_eq!(a.get(l).unwrap(), &brute_force_a(&d, i));
        }
    }

    #[test]
    fn zero_vector_keeps_matrix() {
        let d = small_tree();
        let m = compaction_matrix(&d, &CompactionVector::zeros(d.labels())).unwrap();
        assert_eq!(&m, d.as_labeled());
    }

    #[test]
    fn misaligned_vector_is_rejected() {
        let d = small_tree();
        let a = CompactionVector::zeros(&[1, 2, 3]);
        assert_eq!(compaction_matrix(&d, &a).unwrap_err(), CompactionError::MisalignedVector);
    }

    #[test]
    fn oversized_vector_breaks_compaction() {
        let d = small_tree();
        let a = CompactionVector::new(d.labels().to_vec(), vec![q(2, 1), q(2, 1), q(3, 1), q(4, 1)]);
        assert!(matches!(
            compaction_matrix(&d, &a),
            Err(CompactionError::SimultaneousCompactionBroken { i: 1, j: 2, k: None })
        ));
    }

    #[test]
    fn single_compaction_subtracts_row_and_column() {
        let d = small_tree();
        let same = single_compaction(&d, 1, &Rational::zero()).unwrap();
        assert_eq!(same, d);
        let c = single_compaction(&d, 1, &q(1, 1)).unwrap();
        assert_eq!(c.as_labeled().row(0), &[q(0, 1), q(2, 1), q(4, 1), q(5, 1)]);
        assert_eq!(c.get(3, 1), Some(&q(4, 1)));
        assert_eq!(max_single_compaction(&c, 1).unwrap(), Rational::zero());
        assert!(matches!(
            single_compaction(&d, 1, &q(3, 2)),
            Err(CompactionError::AlphaTooLarge { .. })
        ));
        assert!(matches!(
            single_compaction(&d, 1, &q(-1, 2)),
            Err(CompactionError::NegativeAlpha(_))
        ));
    }

    #[test]
    fn group_rows_on_zero_matrix() {
        let zero = LabeledMatrix::from_parts(vec![1, 2, 3, 4], vec![Rational::zero(); 16]);
        let g = group_rows(&zero);
        assert_eq!(g.groups, vec![vec![1, 2, 3, 4]]);
        assert!(g.singletons.is_empty());
    }

    #[test]
    fn reduce_without_equal_rows_only_relabels() {
        let d = ints(&[&[0, 5, 7, 7], &[5, 0, 7, 10], &[7, 7, 0, 9], &[7, 10, 9, 0]]);
        let a = compaction_vector(&d).unwrap();
        let (r, step) = reduce(&d, &a, 4, 0).unwrap();
        assert_eq!(step.theta(), 0);
        assert_eq!(step.sigma(), 4);
        assert_eq!(r.labels(), &[5, 6, 7, 8]);
        let m = compaction_matrix(&d, &a).unwrap();
        assert_eq!(r.as_labeled().entries(), m.entries());
    }

    #[test]
    fn reduce_zero_matrix_to_single_point() {
        let star = ints(&[&[0, 3, 4, 5], &[3, 0, 5, 6], &[4, 5, 0, 7], &[5, 6, 7, 0]]);
        let a = compaction_vector(&star).unwrap();
        let (r, step) = reduce(&star, &a, 4, 0).unwrap();
        assert_eq!(r.order(), 1);
        assert_eq!(r.labels(), &[5]);
        assert_eq!(step.groups, vec![vec![1, 2, 3, 4]]);
        assert_eq!(step.rho_after(), 5);
    }
}
