use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, try_map_range};
use crate::functionals::FunctionalSpec;
use crate::point_process::{sample_point, sample_poisson, IntensityModel, Point};
use crate::rng::RngStream;
use crate::stats::{mean, sample_variance};
use crate::variance::Standardization;

pub const DEFAULT_BOOTSTRAP: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaPlan {
    /// Outer samples of `(x₁, x₂, x₃)` from the normalised intensity measure.
    pub n_outer: usize,
    /// Configurations per outer sample.
    pub n_eta: usize,
    pub n_bootstrap: usize,
    pub rng: RngStream,
}

impl GammaPlan {
    pub fn new(n_outer: usize, n_eta: usize, rng: RngStream) -> Self {
        Self {
            n_outer,
            n_eta,
            n_bootstrap: DEFAULT_BOOTSTRAP,
            rng,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_outer < 2 || self.n_eta < 2 {
            return Err(Error::Domain(format!(
                "gamma estimation needs n_outer ≥ 2 and n_eta ≥ 2, got {} and {}",
                self.n_outer, self.n_eta
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourthMomentSource {
    /// Known standardised fourth moment of the functional.
    Analytic,
    /// The moment bound `max{256 [∫(E D⁴)^{1/2}]², 4∫E D⁴ + 2}`.
    Bound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimates {
    pub gamma: [f64; 6],
    pub std_error: [f64; 6],
    pub n_outer: usize,
    pub n_eta: usize,
    pub mean_used: f64,
    pub variance_used: f64,
    /// `E F⁴` of the standardised functional as consumed by γ₄.
    pub fourth_moment_used: f64,
    pub fourth_moment_source: FourthMomentSource,
    /// Value of the fourth-moment bound, always reported.
    pub fourth_moment_bound: f64,
    /// True when second differences vanish identically and γ₁ = γ₂ = γ₆ = 0.
    pub second_order_vanishes: bool,
}

/// `max{256 · a², 4 · b + 2}` with `a = ∫(E D⁴)^{1/2} dλ`, `b = ∫ E D⁴ dλ`.
pub fn fourth_moment_from_integrals(int_sqrt_fourth: f64, int_fourth: f64) -> f64 {
    (256.0 * int_sqrt_fourth * int_sqrt_fourth).max(4.0 * int_fourth + 2.0)
}

/// Per-outer-sample integrands, before multiplication by powers of λ(𝕏).
#[derive(Clone, Copy, Debug, Default)]
struct OuterTerms {
    g1: f64,
    g2: f64,
    g3: f64,
    g4: f64,
    fourth: f64,
    sqrt_fourth: f64,
    g6: f64,
}

fn draw_points(model: &IntensityModel, stream: &RngStream, n: usize) -> Vec<Point> {
    let mut r = stream.rng();
    (0..n).map(|_| sample_point(model, &mut r)).collect()
}

fn mean_of(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    mean(&v)
}

fn outer_terms(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    std: &Standardization,
    n_eta: usize,
    vanishing: bool,
    stream: &RngStream,
) -> Result<OuterTerms> {
    let pts = draw_points(model, &stream.child(0), 3);
    let sd = std.sd();
    let f = |c: &crate::point_process::PointConfiguration| functional.eval(c) / sd;
    // rows: a1, a2, a3, b13, b23, c12
    let mut rows = Vec::with_capacity(n_eta);
    for j in 0..n_eta {
        let eta = sample_poisson(model, &stream.grandchild(1, j as u64))?;
        let f0 = f(&eta);
        let e1 = eta.add_points(&pts[0..1])?;
        let e2 = eta.add_points(&pts[1..2])?;
        let e3 = eta.add_points(&pts[2..3])?;
        let (f1, f2, f3) = (f(&e1), f(&e2), f(&e3));
        let (a1, a2, a3) = (f1 - f0, f2 - f0, f3 - f0);
        let (b13, b23, c12) = if vanishing {
            (0.0, 0.0, 0.0)
        } else {
            let f13 = f(&e1.add_points(&pts[2..3])?);
            let f23 = f(&e2.add_points(&pts[2..3])?);
            let f12 = f(&e1.add_points(&pts[1..2])?);
            (f13 - f1 - f3 + f0, f23 - f2 - f3 + f0, f12 - f1 - f2 + f0)
        };
        rows.push([a1, a2, a3, b13, b23, c12]);
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("difference operator of {}", functional.name())));
    }
    let half = n_eta / 2;
    let (h1, h2) = rows.split_at(half);
    let m = |set: &[[f64; 6]], g: &dyn Fn(&[f64; 6]) -> f64| mean_of(set.iter().map(g));
    let a12 = |r: &[f64; 6]| r[0] * r[0] * r[1] * r[1];
    let b = |r: &[f64; 6]| r[3] * r[3] * r[4] * r[4];
    let a1_4 = |r: &[f64; 6]| r[0].powi(4);
    let c_4 = |r: &[f64; 6]| r[5].powi(4);

    let mut t = OuterTerms::default();
    let q: Vec<f64> = (0..3).map(|k| m(&rows, &|r| r[k].powi(4))).collect();
    t.g3 = mean_of((0..3).map(|k| m(&rows, &|r| r[k].abs().powi(3))));
    t.g4 = mean_of(q.iter().map(|v| v.powf(0.75)));
    t.fourth = mean_of(q.iter().copied());
    t.sqrt_fourth = mean_of(q.iter().map(|v| v.sqrt()));
    if !vanishing {
        // cross products from independent halves, symmetrised
        t.g1 = 0.5 * (m(h1, &a12).sqrt() * m(h2, &b).sqrt() + m(h2, &a12).sqrt() * m(h1, &b).sqrt());
        t.g2 = m(&rows, &b);
        t.g6 = 3.0 * (m(h1, &a1_4).sqrt() * m(h2, &c_4).sqrt() + m(h2, &a1_4).sqrt() * m(h1, &c_4).sqrt())
            + 3.0 * m(&rows, &c_4);
    }
    Ok(t)
}

struct Composed {
    gamma: [f64; 6],
    fourth_used: f64,
    fourth_bound: f64,
}

fn compose(terms: &[OuterTerms], idx: &[usize], lambda: f64, analytic_fourth: Option<f64>) -> Composed {
    let avg = |g: fn(&OuterTerms) -> f64| {
        let v: Vec<f64> = idx.iter().map(|&i| g(&terms[i])).collect();
        pairwise_sum(&v) / v.len() as f64
    };
    let l2 = lambda * lambda;
    let l3 = l2 * lambda;
    let int_fourth = lambda * avg(|t| t.fourth);
    let int_sqrt = lambda * avg(|t| t.sqrt_fourth);
    let bound = fourth_moment_from_integrals(int_sqrt, int_fourth);
    let fourth_used = analytic_fourth.unwrap_or(bound);
    let gamma = [
        4.0 * (l3 * avg(|t| t.g1)).max(0.0).sqrt(),
        (l3 * avg(|t| t.g2)).max(0.0).sqrt(),
        lambda * avg(|t| t.g3),
        0.5 * fourth_used.powf(0.25) * lambda * avg(|t| t.g4),
        int_fourth.max(0.0).sqrt(),
        (l2 * avg(|t| t.g6)).max(0.0).sqrt(),
    ];
    Composed {
        gamma,
        fourth_used,
        fourth_bound: bound,
    }
}

/// Monte Carlo estimates of γ₁…γ₆ for `(F − mean)/√variance`.
///
/// Outer points are drawn from λ/λ(𝕏) and weighted by powers of λ(𝕏); the
/// inner moments use `n_eta` configurations shared by all factors of one
/// outer sample. Standard errors come from a bootstrap over outer samples.
pub fn estimate_gammas(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    standardization: &Standardization,
    plan: &GammaPlan,
) -> Result<GammaEstimates> {
    plan.validate()?;
    if !(standardization.variance > 0.0) {
        return Err(Error::Degenerate("standardisation variance must be positive".into()));
    }
    let vanishing = functional.second_order_vanishes();
    let terms = try_map_range(plan.n_outer, |i| {
        outer_terms(functional, model, standardization, plan.n_eta, vanishing, &plan.rng.child(i as u64))
    })?;
    let lambda = model.lambda_mass();
    let analytic_fourth = functional.moments().and_then(|m| m.standardized_fourth);
    let all: Vec<usize> = (0..terms.len()).collect();
    let point = compose(&terms, &all, lambda, analytic_fourth);

    let boot_stream = plan.rng.child(u64::MAX);
    let boots = crate::exec::map_range(plan.n_bootstrap, |b| {
        let mut r = boot_stream.child(b as u64).rng();
        let idx: Vec<usize> = (0..terms.len()).map(|_| r.random_range(0..terms.len())).collect();
        compose(&terms, &idx, lambda, analytic_fourth).gamma
    });
    let mut se = [0.0; 6];
    for (k, s) in se.iter_mut().enumerate() {
        let col: Vec<f64> = boots.iter().map(|g| g[k]).collect();
        *s = sample_variance(&col).sqrt();
    }
    let mut gamma = point.gamma;
    if vanishing {
        gamma[0] = 0.0;
        gamma[1] = 0.0;
        gamma[5] = 0.0;
        se[0] = 0.0;
        se[1] = 0.0;
        se[5] = 0.0;
    }
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gamma estimates".into()));
    }
    Ok(GammaEstimates {
        gamma,
        std_error: se,
        n_outer: plan.n_outer,
        n_eta: plan.n_eta,
        mean_used: standardization.mean,
        variance_used: standardization.variance,
        fourth_moment_used: point.fourth_used,
        fourth_moment_source: if analytic_fourth.is_some() {
            FourthMomentSource::Analytic
        } else {
            FourthMomentSource::Bound
        },
        fourth_moment_bound: point.fourth_bound,
        second_order_vanishes: vanishing,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourthMomentBound {
    pub value: f64,
    /// `∫ (E D_z⁴)^{1/2} λ(dz)`.
    pub int_sqrt_fourth: f64,
    /// `∫ E D_z⁴ λ(dz)`.
    pub int_fourth: f64,
}

/// Upper bound on `E F⁴` for the standardised functional, with the two
/// λ-integrals estimated from `n_outer` single points and `n_eta`
/// configurations each.
pub fn fourth_moment_bound(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    standardization: &Standardization,
    plan: &GammaPlan,
) -> Result<FourthMomentBound> {
    plan.validate()?;
    let sd = standardization.sd();
    let per_outer = try_map_range(plan.n_outer, |i| {
        let stream = plan.rng.child(i as u64);
        let z = draw_points(model, &stream.child(0), 1);
        let mut d4 = Vec::with_capacity(plan.n_eta);
        for j in 0..plan.n_eta {
            let eta = sample_poisson(model, &stream.grandchild(1, j as u64))?;
            let d = (functional.eval(&eta.add_points(&z)?) - functional.eval(&eta)) / sd;
            d4.push(d.powi(4));
        }
        let q = mean(&d4);
        Ok::<_, Error>((q, q.sqrt()))
    })?;
    let lambda = model.lambda_mass();
    let int_fourth = lambda * mean(&per_outer.iter().map(|p| p.0).collect::<Vec<_>>());
    let int_sqrt_fourth = lambda * mean(&per_outer.iter().map(|p| p.1).collect::<Vec<_>>());
    if !(int_fourth.is_finite() && int_sqrt_fourth.is_finite()) {
        return Err(Error::NonFinite("fourth-moment integrals".into()));
    }
    Ok(FourthMomentBound {
        value: fourth_moment_from_integrals(int_sqrt_fourth, int_fourth),
        int_sqrt_fourth,
        int_fourth,
    })
}
