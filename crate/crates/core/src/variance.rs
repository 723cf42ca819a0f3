//! Empirical variance with standard errors, and the closed-form Euclidean
//! variance lower bound driven by a separation constant.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::try_map_range;
use crate::functionals::FunctionalSpec;
use crate::point_process::{sample_poisson, IntensityModel, Point};
use crate::rng::RngStream;
use crate::stats::{central_moment, mean, mean_estimate, sample_variance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub mean: f64,
    pub variance: f64,
    pub std_error_of_variance: f64,
    pub n_reps: usize,
}

/// `F(η_i)` for `n` independent configurations on streams `rng.child(i)`.
pub fn sample_values(functional: &FunctionalSpec, model: &IntensityModel, n: usize, rng: &RngStream) -> Result<Vec<f64>> {
    let values = try_map_range(n, |i| {
        let eta = sample_poisson(model, &rng.child(i as u64))?;
        Ok::<_, Error>(functional.eval(&eta))
    })?;
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{} at replicate {i}", functional.name())));
    }
    Ok(values)
}

/// Mean, unbiased variance and the standard error of the variance from a sample.
pub fn variance_of_sample(values: &[f64]) -> Result<VarianceEstimate> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, have: n });
    }
    let var = sample_variance(values);
    let m4 = central_moment(values, 4);
    let nf = n as f64;
    // Var(s²) ≈ (μ₄ − σ⁴ (n−3)/(n−1)) / n
    let v_of_v = ((m4 - var * var * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0);
    Ok(VarianceEstimate {
        mean: mean(values),
        variance: var,
        std_error_of_variance: v_of_v.sqrt(),
        n_reps: n,
    })
}

pub fn empirical_variance(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    n_reps: usize,
    rng: &RngStream,
) -> Result<VarianceEstimate> {
    if n_reps < 2 {
        return Err(Error::TooFewPoints { needed: 2, have: n_reps });
    }
    variance_of_sample(&sample_values(functional, model, n_reps, rng)?)
}

/// Where a standardisation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    Analytic,
    Pilot,
}

/// `(mean, variance)` used to standardise `F` as `(F − mean)/√variance`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub variance: f64,
    pub source: MomentSource,
    pub n_pilot: usize,
}

impl Standardization {
    pub fn analytic(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::Degenerate(format!("variance {variance} is not positive")));
        }
        Ok(Self {
            mean,
            variance,
            source: MomentSource::Analytic,
            n_pilot: 0,
        })
    }

    /// Analytic moments when the functional carries them, otherwise a pilot
    /// batch of `n_pilot` replicates on `rng`.
    pub fn for_functional(
        functional: &FunctionalSpec,
        model: &IntensityModel,
        n_pilot: usize,
        rng: &RngStream,
    ) -> Result<Self> {
        match functional.moments() {
            Some(m) => Self::analytic(m.mean, m.variance),
            None => Self::pilot(functional, model, n_pilot, rng),
        }
    }

    pub fn pilot(functional: &FunctionalSpec, model: &IntensityModel, n_pilot: usize, rng: &RngStream) -> Result<Self> {
        let v = empirical_variance(functional, model, n_pilot, rng)?;
        if !(v.variance > 0.0) {
            return Err(Error::Degenerate(format!(
                "{}: pilot variance {} over {n_pilot} replicates",
                functional.name(),
                v.variance
            )));
        }
        Ok(Self {
            mean: v.mean,
            variance: v.variance,
            source: MomentSource::Pilot,
            n_pilot,
        })
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd()
    }
}

/// Volume of the unit ball in `R^d`, `π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    (h * std::f64::consts::PI.ln() - statrs::function::gamma::ln_gamma(h + 1.0)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundInput {
    /// Separation constant.
    pub c: f64,
    /// Number of inserted points.
    pub k: usize,
    /// Continuity radius.
    pub tau: f64,
    /// Lebesgue measure of the translation set.
    pub area_a: f64,
    pub t: f64,
    pub d: usize,
}

impl LowerBoundInput {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.c) && pos(self.tau) && pos(self.area_a) && pos(self.t)) || self.k == 0 || self.d == 0 {
            return Err(Error::Domain(format!("lower-bound inputs must all be positive: {self:?}")));
        }
        Ok(())
    }
}

/// `c² / (4 · 8^{k+1} · k!) · min_{j=1..k} 2^{−d(k−j)} (t κ_d τ^d)^{j−1} · t · |A|`.
pub fn theorem53_lower_bound(input: &LowerBoundInput) -> f64 {
    let LowerBoundInput { c, k, tau, area_a, t, d } = *input;
    let kf = k as f64;
    let k_fact = statrs::function::gamma::ln_gamma(kf + 1.0).exp();
    let prefactor = c * c / (4.0 * 8f64.powf(kf + 1.0) * k_fact);
    let ball = t * unit_ball_volume(d) * tau.powi(d as i32);
    let min = (1..=k)
        .map(|j| 2f64.powf(-(d as f64) * (k - j) as f64) * ball.powi(j as i32 - 1))
        .fold(f64::INFINITY, f64::min);
    prefactor * min * t * area_a
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_reps: usize,
}

/// `|E[f(η + Σ_{I₁} δ) − f(η + Σ_{I₂} δ)]|` with both evaluations on the same η.
pub fn estimate_separation_constant(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    insert_sets: (&[Point], &[Point]),
    n_reps: usize,
    rng: &RngStream,
) -> Result<SeparationEstimate> {
    if n_reps == 0 {
        return Err(Error::Domain("n_reps must be at least 1".into()));
    }
    let (i1, i2) = insert_sets;
    let diffs = try_map_range(n_reps, |i| {
        let eta = sample_poisson(model, &rng.child(i as u64))?;
        let a = eta.add_points(i1)?;
        let b = eta.add_points(i2)?;
        Ok::<_, Error>(functional.eval(&a) - functional.eval(&b))
    })?;
    let est = mean_estimate(&diffs);
    Ok(SeparationEstimate {
        value: est.mean.abs(),
        std_error: est.std_error,
        n_reps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub functional: String,
    pub t: f64,
    pub variance: f64,
    pub se: f64,
    pub lower_bound: Option<f64>,
}

pub fn write_variance_csv<W: Write>(rows: &[VarianceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::rescaled_poisson;
    use crate::point_process::Window;
    use std::sync::Arc;

    #[test]
    fn hand_case_is_one_over_256() {
        let b = theorem53_lower_bound(&LowerBoundInput {
            c: 1.0,
            k: 1,
            tau: 1.0,
            area_a: 1.0,
            t: 1.0,
            d: 1,
        });
        assert_eq!(b, 1.0 / 256.0);
    }

    #[test]
    fn quadratic_in_c() {
        let mut i = LowerBoundInput {
            c: 0.7,
            k: 3,
            tau: 0.2,
            area_a: 0.5,
            t: 40.0,
            d: 2,
        };
        let a = theorem53_lower_bound(&i);
        i.c *= 2.0;
        assert!((theorem53_lower_bound(&i) / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn k_two_takes_smaller_branch() {
        // t κ_1 τ = 2 · 0.1 = 0.2 < 2^{-1}: the j = 2 term is the minimum
        let i = LowerBoundInput {
            c: 1.0,
            k: 2,
            tau: 0.1,
            area_a: 1.0,
            t: 1.0,
            d: 1,
        };
        let pre = 1.0 / (4.0 * 512.0 * 2.0);
        let j1: f64 = 0.5;
        let j2 = 0.2;
        assert!((theorem53_lower_bound(&i) - pre * j1.min(j2)).abs() < 1e-15);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_variance() {
        let m = IntensityModel::unmarked(Window::unit(1).unwrap(), 5.0).unwrap();
        let v = empirical_variance(&FunctionalSpec::constant(1.0), &m, 50, &RngStream::new(0, 0)).unwrap();
        assert_eq!(v.variance, 0.0);
    }

    #[test]
    fn rescaled_poisson_variance_is_one() {
        let m = IntensityModel::unmarked(Window::unit(1).unwrap(), 30.0).unwrap();
        let v = empirical_variance(&rescaled_poisson(30.0), &m, 20_000, &RngStream::new(2, 0)).unwrap();
        assert!((v.variance - 1.0).abs() <= 3.0 * v.std_error_of_variance, "{v:?}");
    }

    #[test]
    fn separation_of_first_chaos_is_exact() {
        let m = IntensityModel::unmarked(Window::unit(1).unwrap(), 5.0).unwrap();
        let f = crate::functionals::first_chaos(Arc::new(|p| 1.0 + p.loc[0]), 5.0 * 1.5);
        let x = [Point::new(vec![0.25])];
        let e = estimate_separation_constant(&f, &m, (&x, &[]), 100, &RngStream::new(1, 1)).unwrap();
        assert!((e.value - 1.25).abs() < 1e-12);
        assert!(e.std_error < 1e-12);
        let same = estimate_separation_constant(&f, &m, (&x, &x), 10, &RngStream::new(1, 1)).unwrap();
        assert_eq!(same.value, 0.0);
    }
}
