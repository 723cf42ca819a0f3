use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A quadrature rule `∫_a^b g ≈ Σ w_k g(s_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    interval: (f64, f64),
    nodes: Vec<(f64, f64)>,
}

impl Quadrature {
    /// n-point Gauss–Legendre rule on `[a, b]`.
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Self {
        assert!(n >= 1, "quadrature needs at least one node");
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            // Newton iteration on P_n from the Chebyshev-like initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes.push((mid - half * x, half * w));
        }
        nodes.sort_by(|p, q| p.0.total_cmp(&q.0));
        Self { interval: (a, b), nodes }
    }

    /// Rule from explicit `(node, weight)` pairs on `[a, b]`.
    pub fn from_nodes(a: f64, b: f64, nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Domain("quadrature needs at least one node".into()));
        }
        for &(s, w) in &nodes {
            if !(s >= a && s <= b) || !(w > 0.0) {
                return Err(Error::Domain(format!("invalid quadrature node ({s}, {w}) on [{a}, {b}]")));
            }
        }
        Ok(Self { interval: (a, b), nodes })
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(s, w)| w * g(s)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (pn, pn1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
    let d = n as f64 * (x * pn - pn1) / (x * x - 1.0);
    (pn, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_length() {
        for n in [1, 2, 5, 16, 32] {
            let q = Quadrature::gauss_legendre(n, 0.0, 12.0);
            let s: f64 = q.nodes().iter().map(|p| p.1).sum();
            assert!((s - 12.0).abs() < 1e-12, "n={n}: {s}");
            assert!(q.nodes().iter().all(|&(x, w)| x > 0.0 && x < 12.0 && w > 0.0));
        }
    }

    #[test]
    fn exact_for_polynomials() {
        // 16 nodes integrate degree ≤ 31 exactly
        let q = Quadrature::gauss_legendre(16, 0.0, 1.0);
        for k in 0..=31 {
            let v = q.integrate(|s| s.powi(k));
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn exponential_integral() {
        let q = Quadrature::gauss_legendre(32, 0.0, 12.0);
        let v = q.integrate(|u| (-u).exp());
        assert!((v - (1.0 - (-12f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(Quadrature::from_nodes(0.0, 1.0, vec![(0.5, -1.0)]).is_err());
        assert!(Quadrature::from_nodes(0.0, 1.0, vec![(1.5, 1.0)]).is_err());
        assert!(Quadrature::from_nodes(0.0, 1.0, vec![]).is_err());
    }
}
