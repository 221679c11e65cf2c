//! Common-denominator integer kernels for the cubic loops.
//!
//! A matrix of rationals is rescaled by the lcm of its denominators so that
//! the inner loops only add, subtract and compare integers. When every
//! scaled entry is small the loops run on `i128`; otherwise they fall back
//! to `BigInt`. Both paths are exact.

use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

/// Scaled entries stay below this bound on the `i128` path, which leaves
/// room for sums over a few thousand terms without overflow.
const SMALL_LIMIT: i128 = 1 << 96;

pub(crate) trait Exact: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> {}

impl Exact for i128 {}
impl Exact for BigInt {}

/// Integer image of a rational matrix: `value = data / scale`.
#[derive(Debug, Clone)]
pub(crate) enum Scaled {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

#[derive(Debug, Clone)]
pub(crate) struct ScaledMatrix {
    pub n: usize,
    pub scale: BigInt,
    pub data: Scaled,
}

impl ScaledMatrix {
    pub fn from_rationals(n: usize, entries: &[Rational]) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        let scale = entries
            .iter()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let big: Vec<BigInt> = entries
            .iter()
            .map(|r| r.numer() * (&scale / r.denom()))
            .collect();
        ScaledMatrix {
            n,
            scale,
            data: shrink(big),
        }
    }

    #[cfg(test)]
    pub fn to_rational(&self, value: &BigInt) -> Rational {
        Rational::new(value.clone(), self.scale.clone())
    }
}

fn shrink(big: Vec<BigInt>) -> Scaled {
    let small: Option<Vec<i128>> = big
        .iter()
        .map(|v| v.to_i128().filter(|x| x.abs() < SMALL_LIMIT))
        .collect();
    match small {
        Some(values) => Scaled::Small(values),
        None => Scaled::Big(big),
    }
}

/// For each index `i`, the minimum of `d[p][i] + d[i][r] - d[p][r]` over
/// ordered pairs `p != r`, both different from `i`. Requires `n >= 3`.
pub(crate) fn gromov_minima(m: &ScaledMatrix) -> Vec<BigInt> {
    match &m.data {
        Scaled::Small(d) => gromov_minima_impl(m.n, d)
            .into_iter()
            .map(BigInt::from)
            .collect(),
        Scaled::Big(d) => gromov_minima_impl(m.n, d),
    }
}

fn gromov_minima_impl<T: Exact>(n: usize, d: &[T]) -> Vec<T> {
    assert!(n >= 3);
    (0..n)
        .map(|i| {
            let row_i = &d[i * n..(i + 1) * n];
            let mut best: Option<T> = None;
            for p in 0..n {
                if p == i {
                    continue;
                }
                let row_p = &d[p * n..(p + 1) * n];
                // symmetric in (p, r), so r > p suffices
                for r in (p + 1)..n {
                    if r == i {
                        continue;
                    }
                    let v = row_i[p].clone() + row_i[r].clone() - row_p[r].clone();
                    if best.as_ref().is_none_or(|b| v < *b) {
                        best = Some(v);
                    }
                }
            }
            best.expect("n >= 3 yields at least one pair")
        })
        .collect()
}

/// First ordered triple (i, j, k) of distinct indices with
/// `d[i][j] > d[i][k] + d[k][j]`, scanning i < j.
pub(crate) fn first_triangle_violation(m: &ScaledMatrix) -> Option<(usize, usize, usize)> {
    match &m.data {
        Scaled::Small(d) => triangle_violations_impl(m.n, d, true).into_iter().next(),
        Scaled::Big(d) => triangle_violations_impl(m.n, d, true).into_iter().next(),
    }
}

pub(crate) fn all_triangle_violations(m: &ScaledMatrix) -> Vec<(usize, usize, usize)> {
    match &m.data {
        Scaled::Small(d) => triangle_violations_impl(m.n, d, false),
        Scaled::Big(d) => triangle_violations_impl(m.n, d, false),
    }
}

fn triangle_violations_impl<T: Exact>(
    n: usize,
    d: &[T],
    stop_at_first: bool,
) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = &d[i * n + j];
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if *dij > d[i * n + k].clone() + d[k * n + j].clone() {
                    out.push((i, j, k));
                    if stop_at_first {
                        return out;
                    }
                }
            }
        }
    }
    out
}

/// Exact Floyd–Warshall over an adjacency given as `(u, v, weight)` with
/// rational weights. Returns `None` for unreachable pairs.
pub(crate) fn floyd_warshall(
    n: usize,
    edges: &[(usize, usize, &Rational)],
) -> Vec<Option<Rational>> {
    let scale = edges
        .iter()
        .fold(BigInt::one(), |acc, (_, _, w)| acc.lcm(w.denom()));
    let scaled: Vec<BigInt> = edges
        .iter()
        .map(|(_, _, w)| w.numer() * (&scale / w.denom()))
        .collect();
    // path sums are bounded by the total weight
    let total: BigInt = scaled.iter().map(|w| w.abs()).sum();
    let small = total.to_i128().filter(|t| *t < SMALL_LIMIT).is_some();
    let to_rational = |v: BigInt| Rational::new(v, scale.clone());
    if small {
        let weights: Vec<i128> = scaled.iter().map(|w| w.to_i128().unwrap()).collect();
        floyd_warshall_impl(n, edges, &weights)
            .into_iter()
            .map(|v| v.map(|x| to_rational(BigInt::from(x))))
            .collect()
    } else {
        floyd_warshall_impl(n, edges, &scaled)
            .into_iter()
            .map(|v| v.map(to_rational))
            .collect()
    }
}

fn floyd_warshall_impl<T: Exact>(
    n: usize,
    edges: &[(usize, usize, &Rational)],
    weights: &[T],
) -> Vec<Option<T>> {
    let mut dist: Vec<Option<T>> = vec![None; n * n];
    for i in 0..n {
        dist[i * n + i] = Some(T::zero());
    }
    for ((u, v, _), w) in edges.iter().zip(weights) {
        for (a, b) in [(*u, *v), (*v, *u)] {
            let slot = &mut dist[a * n + b];
            if slot.as_ref().is_none_or(|cur| w < cur) {
                *slot = Some(w.clone());
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = dist[i * n + k].clone() else {
                continue;
            };
            for j in 0..n {
                let Some(dkj) = &dist[k * n + j] else {
                    continue;
                };
                let via = dik.clone() + dkj.clone();
                let slot = &mut dist[i * n + j];
                if slot.as_ref().is_none_or(|cur| via < *cur) {
                    *slot = Some(via);
                }
            }
        }
    }
    dist
}
