//! Chebyshev–Lobatto interpolation on an interval.

/// Interpolation nodes and barycentric weights on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct ChebyshevNodes {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebyshevNodes {
    /// `n + 1` Lobatto points on `[lo, hi]`.
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 1 && hi > lo);
        let c = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        let nodes = (0..=n)
            .map(|j| c - r * (std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        let weights = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Self {
            lo,
            hi,
            nodes,
            weights,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Barycentric evaluation of the interpolant through `values` at `x`.
    pub fn eval(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &wj), &fj) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = x - xj;
            if d == 0.0 {
                return fj;
            }
            let q = wj / d;
            num += q * fj;
            den += q;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_smooth_function() {
        let ch = ChebyshevNodes::new(-1.0, 3.0, 32);
        let vals: Vec<f64> = ch.nodes().iter().map(|x| (x * 0.7).sin() + x * x).collect();
        for i in 0..100 {
            let x = -1.0 + 4.0 * i as f64 / 99.0;
            let f = (x * 0.7).sin() + x * x;
            assert!((ch.eval(&vals, x) - f).abs() < 1e-13);
        }
    }
}
