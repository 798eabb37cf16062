#![allow(dead_code)]

use nalgebra::DMatrix;

/// `E ∏_k Z_{idx[k]}` as a sum over all perfect matchings of the factors.
pub fn matching_expectation(idx: &[usize], cov: &DMatrix<f64>) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    if idx.len() % 2 == 1 {
        return 0.0;
    }
    let first = idx[0];
    let rest = &idx[1..];
    let mut total = 0.0;
    for j in 0..rest.len() {
        let c = cov[(first, rest[j])];
        if c == 0.0 {
            continue;
        }
        let others: Vec<usize> = rest
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, &v)| v)
            .collect();
        total += c * matching_expectation(&others, cov);
    }
    total
}

/// `E ∏_{i} (Z_i² - σ²)` by expanding into monomials.
pub fn centered_squares(cov: &DMatrix<f64>) -> f64 {
    let n = cov.nrows();
    let s2 = cov[(0, 0)];
    (0u32..1 << n)
        .map(|mask| {
            let idx: Vec<usize> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .flat_map(|i| [i, i])
                .collect();
            (-s2).powi(n as i32 - mask.count_ones() as i32) * matching_expectation(&idx, cov)
        })
        .sum()
}

/// `E Z_1 Z_2 ∏_{i>=3} (Z_i² - σ²)`.
pub fn mixed_squares(cov: &DMatrix<f64>) -> f64 {
    let n = cov.nrows();
    let s2 = cov[(0, 0)];
    (0u32..1 << (n - 2))
        .map(|mask| {
            let mut idx = vec![0, 1];
            idx.extend(
                (0..n - 2)
                    .filter(|i| mask >> i & 1 == 1)
                    .flat_map(|i| [i + 2, i + 2]),
            );
            (-s2).powi(n as i32 - 2 - mask.count_ones() as i32) * matching_expectation(&idx, cov)
        })
        .sum()
}

/// `σ² · D^{-1/2} A Aᵀ D^{-1/2}`: PSD with constant diagonal `σ²`.
pub fn equal_diagonal(n: usize, entries: &[f64], sigma2: f64) -> DMatrix<f64> {
    let a = DMatrix::from_row_slice(n, n, &entries[..n * n]);
    let c = &a * a.transpose();
    DMatrix::from_fn(n, n, |i, j| {
        sigma2 * c[(i, j)] / (c[(i, i)] * c[(j, j)]).sqrt()
    })
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}
