//! Expectations of products of centered Gaussian squares.
//!
//! Two routes are provided: brute-force Isserlis enumeration over perfect
//! matchings, and symbolic pair-partition expansions obtained by repeated
//! Gaussian integration by parts. Indices in expansions are 1-based.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest total degree accepted by [`isserlis_expectation`].
pub const ISSERLIS_MAX_DEGREE: usize = 16;
/// Default largest `n` for symbolic expansions.
pub const DEFAULT_SYMBOLIC_BUDGET: usize = 8;

/// Centered Gaussian vector whose coordinates share one variance.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualVarianceGaussianVector {
    cov: DMatrix<f64>,
}

impl EqualVarianceGaussianVector {
    pub fn new(cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        if n < 2 || cov.ncols() != n {
            return Err(Error::validation("covariance must be square with n >= 2"));
        }
        let scale = cov
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        for i in 0..n {
            if (cov[(i, i)] - cov[(0, 0)]).abs() > 1e-12 * scale {
                return Err(Error::validation(format!(
                    "diagonal entry {} differs from the first",
                    i + 1
                )));
            }
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::validation(format!(
                        "covariance not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let eig = cov.clone().symmetric_eigen();
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-10 * scale {
            return Err(Error::validation(format!(
                "covariance not positive semidefinite (eigenvalue {min:e})"
            )));
        }
        Ok(Self { cov })
    }

    pub fn n(&self) -> usize {
        self.cov.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn variance(&self) -> f64 {
        self.cov[(0, 0)]
    }
}

/// `E[∏ Z_i^{e_i}]` by summing over all perfect matchings of the factors.
pub fn isserlis_expectation(exponents: &[usize], cov: &DMatrix<f64>) -> Result<f64> {
    if exponents.len() > cov.nrows() {
        return Err(Error::validation(format!(
            "monomial has {} variables but the covariance is {}x{}",
            exponents.len(),
            cov.nrows(),
            cov.ncols()
        )));
    }
    let degree: usize = exponents.iter().sum();
    if degree % 2 == 1 {
        return Ok(0.0);
    }
    if degree > ISSERLIS_MAX_DEGREE {
        return Err(Error::Budget(format!(
            "Isserlis enumeration limited to degree {ISSERLIS_MAX_DEGREE}, got {degree}"
        )));
    }
    let mut factors: Vec<usize> = Vec::with_capacity(degree);
    for (i, &e) in exponents.iter().enumerate() {
        factors.extend(std::iter::repeat_n(i, e));
    }
    Ok(matchings(&mut factors, cov))
}

fn matchings(factors: &mut Vec<usize>, cov: &DMatrix<f64>) -> f64 {
    if factors.is_empty() {
        return 1.0;
    }
    let first = factors.remove(0);
    let mut total = 0.0;
    for k in 0..factors.len() {
        let other = factors.remove(k);
        let c = cov[(first, other)];
        if c != 0.0 {
            total += c * matchings(factors, cov);
        }
        factors.insert(k, other);
    }
    factors.insert(0, first);
    total
}

/// Which product an expansion represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionKind {
    /// `E ∏_{i=1}^n (Z_i² - E Z_i²)`, over partitions of `{1,1,...,n,n}`.
    CenteredSquares,
    /// `E[Z_1 Z_2 ∏_{i=3}^n (Z_i² - E Z_i²)]`, indices 1 and 2 used once.
    Mixed,
}

/// One term `coefficient · ∏ E[Z_i Z_j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub coefficient: i64,
    pub pairs: Vec<(usize, usize)>,
}

/// Symbolic sum over pair partitions with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairPartitionExpansion {
    pub n: usize,
    pub kind: ExpansionKind,
    pub terms: Vec<ExpansionTerm>,
}

type Terms = BTreeMap<Vec<(usize, usize)>, i64>;

fn pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn times_pair(terms: &Terms, p: (usize, usize), coef: i64, out: &mut Terms) {
    for (pairs, c) in terms {
        let mut v = pairs.clone();
        let pos = v.partition_point(|q| *q <= p);
        v.insert(pos, p);
        *out.entry(v).or_insert(0) += coef * c;
    }
}

fn without(rest: &[usize], m: usize) -> Vec<usize> {
    rest.iter().copied().filter(|&x| x != m).collect()
}

/// Expansion of `E ∏_{i ∈ list} (Z_i² - σ²)`.
fn centered(list: &[usize]) -> Terms {
    let mut out = Terms::new();
    match list.split_first() {
        None => {
            out.insert(Vec::new(), 1);
        }
        Some((&first, rest)) => {
            for &m in rest {
                let inner = mixed(first, m, &without(rest, m));
                times_pair(&inner, pair(first, m), 2, &mut out);
            }
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Expansion of `E[Z_a Z_b ∏_{i ∈ rest} (Z_i² - σ²)]`.
fn mixed(a: usize, b: usize, rest: &[usize]) -> Terms {
    let mut out = Terms::new();
    times_pair(&centered(rest), pair(a, b), 1, &mut out);
    for &m in rest {
        let inner = mixed(b, m, &without(rest, m));
        times_pair(&inner, pair(a, m), 2, &mut out);
    }
    out.retain(|_, c| *c != 0);
    out
}

fn check_budget(n: usize, budget: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("expansion needs n >= 2, got {n}")));
    }
    if n > budget {
        return Err(Error::Budget(format!(
            "symbolic expansion limited to n <= {budget}, got {n}; use Monte Carlo beyond the budget"
        )));
    }
    Ok(())
}

fn collect(n: usize, kind: ExpansionKind, terms: Terms) -> PairPartitionExpansion {
    PairPartitionExpansion {
        n,
        kind,
        terms: terms
            .into_iter()
            .map(|(pairs, coefficient)| ExpansionTerm { coefficient, pairs })
            .collect(),
    }
}

pub fn centered_square_product_expansion(n: usize) -> Result<PairPartitionExpansion> {
    centered_square_product_expansion_with_budget(n, DEFAULT_SYMBOLIC_BUDGET)
}

pub fn centered_square_product_expansion_with_budget(
    n: usize,
    budget: usize,
) -> Result<PairPartitionExpansion> {
    check_budget(n, budget)?;
    let list: Vec<usize> = (1..=n).collect();
    Ok(collect(n, ExpansionKind::CenteredSquares, centered(&list)))
}

pub fn mixed_product_expansion(n: usize) -> Result<PairPartitionExpansion> {
    mixed_product_expansion_with_budget(n, DEFAULT_SYMBOLIC_BUDGET)
}

pub fn mixed_product_expansion_with_budget(
    n: usize,
    budget: usize,
) -> Result<PairPartitionExpansion> {
    check_budget(n, budget)?;
    let rest: Vec<usize> = (3..=n).collect();
    Ok(collect(n, ExpansionKind::Mixed, mixed(1, 2, &rest)))
}

impl PairPartitionExpansion {
    /// Evaluate the expansion for a covariance matrix (0-based storage of 1-based indices).
    pub fn evaluate(&self, cov: &DMatrix<f64>) -> Result<f64> {
        if cov.nrows() < self.n || cov.ncols() < self.n {
            return Err(Error::validation(format!(
                "expansion needs an {0}x{0} covariance",
                self.n
            )));
        }
        Ok(self
            .terms
            .iter()
            .map(|t| {
                t.coefficient as f64
                    * t.pairs
                        .iter()
                        .map(|&(i, j)| cov[(i - 1, j - 1)])
                        .product::<f64>()
            })
            .sum())
    }

    /// How many times each index `1..=n` occurs across the pairs of every term
    /// matches the partition class of the expansion.
    pub fn membership_ok(&self) -> bool {
        self.terms.iter().all(|t| {
            let mut count = vec![0usize; self.n + 1];
            for &(i, j) in &t.pairs {
                if i >= j || j > self.n || i == 0 {
                    return false;
                }
                count[i] += 1;
                count[j] += 1;
            }
            (1..=self.n).all(|i| {
                let want = match (self.kind, i) {
                    (ExpansionKind::Mixed, 1 | 2) => 1,
                    _ => 2,
                };
                count[i] == want
            })
        })
    }
}

/// Cycle decomposition of the derangement induced by a pair partition of
/// `{1,1,...,n,n}`: pairs are sorted lexicographically, and each cycle is
/// traced from the smallest unvisited index by repeatedly following the
/// first unused pair through the current index.
pub fn partition_to_cycles(pairs: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
    let mut sorted: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| pair(a, b)).collect();
    sorted.sort_unstable();
    let n = sorted.iter().map(|p| p.1).max().unwrap_or(0);
    if n < 2 {
        return Err(Error::validation(
            "partition must involve at least two indices",
        ));
    }
    let mut count = vec![0usize; n + 1];
    for &(a, b) in &sorted {
        if a == 0 || a == b {
            return Err(Error::validation(format!("malformed pair ({a}, {b})")));
        }
        count[a] += 1;
        count[b] += 1;
    }
    if let Some(i) = (1..=n).find(|&i| count[i] != 2) {
        return Err(Error::validation(format!(
            "index {i} appears {} times, expected 2",
            count[i]
        )));
    }
    let mut used = vec![false; sorted.len()];
    let mut visited = vec![false; n + 1];
    let mut cycles = Vec::new();
    for start in 1..=n {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut cur = start;
        loop {
            let k = (0..sorted.len())
                .find(|&k| !used[k] && (sorted[k].0 == cur || sorted[k].1 == cur))
                .expect("degree-two structure guarantees an unused pair");
            used[k] = true;
            let next = if sorted[k].0 == cur {
                sorted[k].1
            } else {
                sorted[k].0
            };
            if next == start {
                break;
            }
            visited[next] = true;
            cycle.push(next);
            cur = next;
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}
