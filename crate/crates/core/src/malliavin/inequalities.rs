//! Monte Carlo checks of the moment inequalities satisfied by `D`, `P_s`
//! and `−D L^{-1}`: Poincaré, contractivity of `P_s` and domination of
//! `E|D_x L^{-1} F|^p` by `E|D_x F|^p`.

use serde::{Deserialize, Serialize};

use super::{inverse_ou_minus_dx, mehler_ps, Quadrature};
use crate::error::{Error, Result};
use crate::exec::try_map_range;
use crate::functionals::FunctionalSpec;
use crate::point_process::{sample_point, sample_poisson, IntensityModel};
use crate::rng::RngStream;
use crate::stats::mean_estimate;
use crate::variance::variance_of_sample;

/// An estimated inequality `lhs ≤ rhs` with the standard error of `lhs − rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub std_error: f64,
}

impl InequalityCheck {
    /// From per-replicate pairs sharing the same randomness.
    pub fn paired(name: impl Into<String>, pairs: &[(f64, f64)]) -> Self {
        let lhs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let rhs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
        Self {
            name: name.into(),
            lhs: mean_estimate(&lhs).mean,
            rhs: mean_estimate(&rhs).mean,
            std_error: mean_estimate(&diff).std_error,
        }
    }

    /// From two independent estimates.
    pub fn independent(name: impl Into<String>, lhs: f64, lhs_se: f64, rhs: f64, rhs_se: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            std_error: lhs_se.hypot(rhs_se),
        }
    }

    /// `rhs + k·se − lhs`; non-negative when the check passes.
    pub fn slack(&self, k: f64) -> f64 {
        self.rhs + k * self.std_error - self.lhs
    }

    /// `lhs ≤ rhs + k·se`, up to floating-point rounding of the two sides.
    pub fn holds(&self, k: f64) -> bool {
        self.slack(k) >= -1e-12 * self.lhs.abs().max(self.rhs.abs())
    }
}

/// `Var F ≤ E ∫ (D_x F)² λ(dx)`. The variance uses `n_reps` configurations
/// on `rng.child(0)`; the integral uses `n_reps` independent configurations
/// on `rng.child(1)`, each with `n_points` uniform insertion points weighted
/// by `λ(X)`.
pub fn poincare_check(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    n_reps: usize,
    n_points: usize,
    rng: &RngStream,
) -> Result<InequalityCheck> {
    if n_reps < 2 || n_points == 0 {
        return Err(Error::Domain("poincare check needs n_reps ≥ 2 and n_points ≥ 1".into()));
    }
    let values = try_map_range(n_reps, |i| {
        let eta = sample_poisson(model, &rng.grandchild(0, i as u64))?;
        Ok::<_, Error>(functional.eval(&eta))
    })?;
    let var = variance_of_sample(&values)?;
    let lambda = model.lambda_mass();
    let integrand = try_map_range(n_reps, |i| {
        let stream = rng.grandchild(1, i as u64);
        let eta = sample_poisson(model, &stream.child(0))?;
        let f0 = functional.eval(&eta);
        let mut r = stream.child(1).rng();
        let mut acc = 0.0;
        for _ in 0..n_points {
            let x = sample_point(model, &mut r);
            let d = functional.eval(&eta.add_points(std::slice::from_ref(&x))?) - f0;
            acc += d * d;
        }
        Ok::<_, Error>(lambda * acc / n_points as f64)
    })?;
    let rhs = mean_estimate(&integrand);
    check_finite(InequalityCheck::independent(
        "poincare",
        var.variance,
        var.std_error_of_variance,
        rhs.mean,
        rhs.std_error,
    ))
}

/// `E|P_s F|^p ≤ E|F|^p` for every `p` in `powers`, with `P_s F` estimated
/// from `n_inner` inner draws on each of `n_base` configurations.
pub fn contractivity_checks(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    s: f64,
    powers: &[f64],
    n_base: usize,
    n_inner: usize,
    rng: &RngStream,
) -> Result<Vec<InequalityCheck>> {
    let rows = try_map_range(n_base, |i| {
        let stream = rng.child(i as u64);
        let eta = sample_poisson(model, &stream.child(0))?;
        let ps = mehler_ps(functional, &eta, model, s, n_inner, &stream.child(1))?;
        Ok::<_, Error>((ps.value, functional.eval(&eta)))
    })?;
    powers
        .iter()
        .map(|&p| {
            let pairs: Vec<(f64, f64)> = rows.iter().map(|&(a, b)| (a.abs().powf(p), b.abs().powf(p))).collect();
            check_finite(InequalityCheck::paired(format!("contractivity s={s} p={p}"), &pairs))
        })
        .collect()
}

/// `E|D_x L^{-1} F|^p ≤ E|D_x F|^p` for every `p` in `powers`, with `x`
/// drawn from the normalised intensity measure.
pub fn inverse_ou_moment_checks(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    powers: &[f64],
    n_base: usize,
    nodes: &Quadrature,
    n_inner: usize,
    rng: &RngStream,
) -> Result<Vec<InequalityCheck>> {
    let rows = try_map_range(n_base, |i| {
        let stream = rng.child(i as u64);
        let eta = sample_poisson(model, &stream.child(0))?;
        let x = sample_point(model, &mut stream.child(1).rng());
        let est = inverse_ou_minus_dx(functional, &eta, model, &x, nodes, n_inner, &stream.child(2))?;
        let d = functional.eval(&eta.add_points(std::slice::from_ref(&x))?) - functional.eval(&eta);
        Ok::<_, Error>((est.value, d))
    })?;
    powers
        .iter()
        .map(|&p| {
            let pairs: Vec<(f64, f64)> = rows.iter().map(|&(a, b)| (a.abs().powf(p), b.abs().powf(p))).collect();
            check_finite(InequalityCheck::paired(format!("inverse_ou_moment p={p}"), &pairs))
        })
        .collect()
}

fn check_finite(c: InequalityCheck) -> Result<InequalityCheck> {
    if c.lhs.is_finite() && c.rhs.is_finite() && c.std_error.is_finite() {
        Ok(c)
    } else {
        Err(Error::NonFinite(c.name))
    }
}
