//! Distance matrices with persistent labels.
//!
//! A [`LabeledMatrix`] is any square rational matrix whose rows carry
//! integer labels. A [`DistanceMatrix`] wraps one and guarantees zero
//! diagonal, symmetry, strictly positive off-diagonal entries and the
//! triangle inequality.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{self, ScaledMatrix};
use crate::rational::{Rational, RationalParseError};

/// Row/column identity. Input labels are positive; the realization
/// algorithm issues fresh labels above the largest one in use.
pub type Label = u64;

/// One violated distance-matrix condition, reported with row labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    Asymmetric(Label, Label),
    NonzeroDiagonal(Label),
    NonpositiveEntry(Label, Label),
    /// `d(i, j) > d(i, k) + d(k, j)`
    TriangleViolation(Label, Label, Label),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Asymmetric(i, j) => write!(f, "Asymmetric({i},{j})"),
            Violation::NonzeroDiagonal(i) => write!(f, "NonzeroDiagonal({i})"),
            Violation::NonpositiveEntry(i, j) => write!(f, "NonpositiveEntry({i},{j})"),
            Violation::TriangleViolation(i, j, k) => write!(f, "TriangleViolation({i},{j},{k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("matrix is empty")]
    Empty,
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("{labels} labels given for a matrix of order {order}")]
    LabelCountMismatch { labels: usize, order: usize },
    #[error("duplicate label {0}")]
    DuplicateLabel(Label),
    #[error("label 0 is reserved; labels must be positive")]
    ZeroLabel,
    #[error("unknown label {0}")]
    UnknownLabel(Label),
    #[error("not a distance matrix: {}", summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("parse error at line {line}, column {column}: {source}")]
    Parse {
        line: usize,
        column: usize,
        source: RationalParseError,
    },
    #[error("malformed JSON matrix: {0}")]
    Json(String),
}

fn summarize(violations: &[Violation]) -> String {
    const SHOWN: usize = 8;
    let mut text: Vec<String> = violations.iter().take(SHOWN).map(|v| v.to_string()).collect();
    if violations.len() > SHOWN {
        text.push(format!("... ({} total)", violations.len()));
    }
    text.join(", ")
}

/// Square rational matrix with labeled rows, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledMatrix {
    labels: Vec<Label>,
    entries: Vec<Rational>,
}

impl LabeledMatrix {
    pub fn new(labels: Vec<Label>, rows: Vec<Vec<Rational>>) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        if labels.len() != n {
            return Err(MetricError::LabelCountMismatch {
                labels: labels.len(),
                order: n,
            });
        }
        let mut seen = HashSet::with_capacity(n);
        for &l in &labels {
            if l == 0 {
                return Err(MetricError::ZeroLabel);
            }
            if !seen.insert(l) {
                return Err(MetricError::DuplicateLabel(l));
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != n {
                return Err(MetricError::NotSquare {
                    row: row + 1,
                    len: values.len(),
                    expected: n,
                });
            }
            entries.extend(values);
        }
        Ok(LabeledMatrix { labels, entries })
    }

    pub(crate) fn from_parts(labels: Vec<Label>, entries: Vec<Rational>) -> Self {
        debug_assert_eq!(labels.len() * labels.len(), entries.len());
        LabeledMatrix { labels, entries }
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Entry by row/column position.
    pub fn at(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.order() + j]
    }

    pub fn position(&self, label: Label) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Entry by row/column label.
    pub fn get(&self, a: Label, b: Label) -> Option<&Rational> {
        Some(self.at(self.position(a)?, self.position(b)?))
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        let n = self.order();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        (0..self.order()).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Rational::is_zero)
    }

    /// Principal submatrix on `keep`, in this matrix's row order.
    pub fn restrict(&self, keep: &[Label]) -> Result<LabeledMatrix, MetricError> {
        if keep.is_empty() {
            return Err(MetricError::Empty);
        }
        for &l in keep {
            if self.position(l).is_none() {
                return Err(MetricError::UnknownLabel(l));
            }
        }
        let wanted: HashSet<Label> = keep.iter().copied().collect();
        let positions: Vec<usize> = (0..self.order())
            .filter(|&i| wanted.contains(&self.labels[i]))
            .collect();
        Ok(self.select(&positions))
    }

    pub(crate) fn select(&self, positions: &[usize]) -> LabeledMatrix {
        let labels = positions.iter().map(|&i| self.labels[i]).collect();
        let mut entries = Vec::with_capacity(positions.len() * positions.len());
        for &i in positions {
            for &j in positions {
                entries.push(self.at(i, j).clone());
            }
        }
        LabeledMatrix { labels, entries }
    }

    pub(crate) fn with_labels(mut self, labels: Vec<Label>) -> LabeledMatrix {
        assert_eq!(labels.len(), self.order());
        self.labels = labels;
        self
    }

    pub(crate) fn scaled(&self) -> ScaledMatrix {
        ScaledMatrix::from_rationals(self.order(), &self.entries)
    }

    /// Every violated distance-matrix condition. Triangle triples are only
    /// checked once the matrix is symmetric.
    pub fn violations(&self) -> Vec<Violation> {
        let n = self.order();
        let l = &self.labels;
        let mut out = Vec::new();
        for i in 0..n {
            if !self.at(i, i).is_zero() {
                out.push(Violation::NonzeroDiagonal(l[i]));
            }
        }
        let mut symmetric = true;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.at(i, j) != self.at(j, i) {
                    symmetric = false;
                    out.push(Violation::Asymmetric(l[i], l[j]));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && !self.at(i, j).is_positive() && (i < j || self.at(i, j) != self.at(j, i))
                {
                    out.push(Violation::NonpositiveEntry(l[i], l[j]));
                }
            }
        }
        if symmetric {
            out.extend(
                kernel::all_triangle_violations(&self.scaled())
                    .into_iter()
                    .map(|(i, j, k)| Violation::TriangleViolation(l[i], l[j], l[k])),
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.order() {
            let line: Vec<String> = self.row(i).iter().map(|r| r.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = MatrixDocument {
            labels: self.labels.clone(),
            matrix: self.rows(),
        };
        serde_json::to_string(&doc).expect("matrix serializes")
    }
}

impl fmt::Display for LabeledMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.order();
        let cells: Vec<Vec<String>> = (0..n)
            .map(|i| self.row(i).iter().map(|r| r.to_string()).collect())
            .collect();
        let width = cells
            .iter()
            .flatten()
            .map(String::len)
            .chain(self.labels.iter().map(|l| l.to_string().len()))
            .max()
            .unwrap_or(1);
        write!(f, "{:>width$} |", "")?;
        for l in &self.labels {
            write!(f, " {l:>width$}")?;
        }
        writeln!(f)?;
        for (i, row) in cells.iter().enumerate() {
            write!(f, "{:>width$} |", self.labels[i])?;
            for c in row {
                write!(f, " {c:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A validated distance matrix. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DistanceMatrix(LabeledMatrix);

impl DistanceMatrix {
    /// Checks every distance-matrix condition, collecting all failures.
    /// `labels = None` means `1..=n`.
    pub fn validate(
        rows: Vec<Vec<Rational>>,
        labels: Option<Vec<Label>>,
    ) -> Result<DistanceMatrix, MetricError> {
        let labels = labels.unwrap_or_else(|| (1..=rows.len() as Label).collect());
        Self::from_labeled(LabeledMatrix::new(labels, rows)?)
    }

    pub fn from_labeled(m: LabeledMatrix) -> Result<DistanceMatrix, MetricError> {
        let violations = m.violations();
        if violations.is_empty() {
            Ok(DistanceMatrix(m))
        } else {
            Err(MetricError::Invalid(violations))
        }
    }

    /// Convenience for integer literals; labels `1..=n`.
    pub fn from_integers<R: AsRef<[i64]>>(rows: &[R]) -> Result<DistanceMatrix, MetricError> {
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| Rational::from(x)).collect())
            .collect();
        Self::validate(rows, None)
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn trusted(m: LabeledMatrix) -> DistanceMatrix {
        debug_assert!(m.violations().is_empty(), "{:?}", m.violations());
        DistanceMatrix(m)
    }

    pub fn as_labeled(&self) -> &LabeledMatrix {
        &self.0
    }

    pub fn into_labeled(self) -> LabeledMatrix {
        self.0
    }

    pub fn order(&self) -> usize {
        self.0.order()
    }

    pub fn labels(&self) -> &[Label] {
        self.0.labels()
    }

    pub fn at(&self, i: usize, j: usize) -> &Rational {
        self.0.at(i, j)
    }

    pub fn get(&self, a: Label, b: Label) -> Option<&Rational> {
        self.0.get(a, b)
    }

    pub fn position(&self, label: Label) -> Option<usize> {
        self.0.position(label)
    }

    pub fn max_label(&self) -> Label {
        self.labels().iter().copied().max().unwrap_or(0)
    }

    pub fn restrict(&self, keep: &[Label]) -> Result<DistanceMatrix, MetricError> {
        // a principal submatrix of a metric is a metric
        Ok(DistanceMatrix(self.0.restrict(keep)?))
    }

    pub fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    pub fn to_json(&self) -> String {
        self.0.to_json()
    }
}

impl fmt::Display for DistanceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
struct MatrixDocument {
    labels: Vec<Label>,
    matrix: Vec<Vec<Rational>>,
}

/// Reads CSV (`n` lines of `n` comma-separated rationals, labels `1..=n`)
/// or JSON (`{"labels": [...], "matrix": [["0","3/2"], ...]}`), then
/// validates.
pub fn parse_matrix(text: &str, format: MatrixFormat) -> Result<DistanceMatrix, MetricError> {
    match format {
        MatrixFormat::Csv => {
            let mut rows = Vec::new();
            for (line_no, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let row = line
                    .split(',')
                    .enumerate()
                    .map(|(col, cell)| {
                        cell.parse::<Rational>().map_err(|source| MetricError::Parse {
                            line: line_no + 1,
                            column: col + 1,
                            source,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push(row);
            }
            DistanceMatrix::validate(rows, None)
        }
        MatrixFormat::Json => {
            let doc: MatrixDocument =
                serde_json::from_str(text).map_err(|e| MetricError::Json(e.to_string()))?;
            DistanceMatrix::validate(doc.matrix, Some(doc.labels))
        }
    }
}
