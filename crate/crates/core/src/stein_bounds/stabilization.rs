use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, try_map_range};
use crate::functionals::FunctionalSpec;
use crate::point_process::{sample_point, sample_poisson, IntensityModel, Point, PointConfiguration};
use crate::rng::RngStream;
use crate::stats::{mean, mean_estimate, MeanEstimate};
use crate::variance::Standardization;

/// Relative floor below which a difference counts as zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizationPlan {
    pub p1: f64,
    pub p2: f64,
    /// Outer samples of `x₁`.
    pub n_outer: usize,
    /// Partners `x₂` per outer sample.
    pub n_pair: usize,
    /// Configurations per outer sample (shared across its partners).
    pub n_eta: usize,
    /// Lattice probes per axis for the suprema defining `c₁`, `c₂`.
    pub probes_per_axis: usize,
    pub random_probes: usize,
    /// Configurations per probe.
    pub n_eta_probe: usize,
    pub rng: RngStream,
}

impl StabilizationPlan {
    pub fn new(n_outer: usize, n_pair: usize, n_eta: usize, rng: RngStream) -> Self {
        Self {
            p1: 1.0,
            p2: 1.0,
            n_outer,
            n_pair,
            n_eta,
            probes_per_axis: 32,
            random_probes: 64,
            n_eta_probe: n_eta,
            rng,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.p1 > 0.0 && self.p2 > 0.0) {
            return Err(Error::Domain("p1 and p2 must be positive".into()));
        }
        if self.n_outer == 0 || self.n_pair == 0 || self.n_eta == 0 || self.n_eta_probe == 0 {
            return Err(Error::Domain("stabilization plan sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityIntegrals {
    /// `[∫(∫ P(D²≠0)^{p₂/(16+4p₂)} λ(dx₂))² λ(dx₁)]^{1/2}`.
    pub double_nested: f64,
    /// `∫ P(D≠0)^{(1+p₁)/(4+p₁)} λ(dx)`.
    pub single: f64,
    /// `[∫ P(D²≠0)^{p₂/(8+2p₂)} λ²]^{1/2}`.
    pub pair: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizationReport {
    pub c1: f64,
    pub c2: f64,
    pub p1: f64,
    pub p2: f64,
    /// `sup_{x₁} ∫ P(D²_{x₁,y}≠0)^{p₂/(16+4p₂)} λ(dy)` over the outer samples.
    pub m_hat: f64,
    pub prob_integrals: ProbabilityIntegrals,
    pub gamma_f: f64,
    pub variance_used: f64,
    pub dw_bound: f64,
    pub dk_bound: f64,
    pub n_probes: usize,
}

fn nonzero(v: f64, floor: f64) -> bool {
    v.abs() > floor
}

/// Probe points: a `m^d` lattice of cell midpoints plus random points, with
/// marks drawn from the normalised mark measure.
fn probes(model: &IntensityModel, per_axis: usize, random: usize, rng: &RngStream) -> Vec<Point> {
    let w = &model.window;
    let d = w.dim();
    let mut r = rng.rng();
    let mut out = Vec::new();
    if per_axis > 0 {
        let total = per_axis.pow(d as u32);
        for code in 0..total {
            let mut rem = code;
            let loc: Vec<f64> = (0..d)
                .map(|j| {
                    let i = rem % per_axis;
                    rem /= per_axis;
                    w.lower()[j] + w.side(j) * (i as f64 + 0.5) / per_axis as f64
                })
                .collect();
            out.push(Point {
                loc,
                mark: model.marks.sample(&mut r),
            });
        }
    }
    out.extend((0..random).map(|_| sample_point(model, &mut r)));
    out
}

/// Nearby partner of `x`: a jitter of size `t^{-1/d}` in each coordinate,
/// clamped to the window.
fn jittered<R: Rng + ?Sized>(model: &IntensityModel, x: &Point, r: &mut R) -> Point {
    let w = &model.window;
    let scale = model.t.max(1e-12).powf(-1.0 / w.dim() as f64);
    let loc = x
        .loc
        .iter()
        .enumerate()
        .map(|(j, &v)| (v + scale * (2.0 * r.random::<f64>() - 1.0)).clamp(w.lower()[j], w.upper()[j]))
        .collect();
    Point {
        loc,
        mark: model.marks.sample(r),
    }
}

/// Estimate of `P(D²_{x₁,x₂} F ≠ 0)` over `n_eta` configurations, with
/// `|D²| > floor` counted as non-zero.
pub fn second_difference_nonzero_probability(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    x1: &Point,
    x2: &Point,
    n_eta: usize,
    floor: f64,
    rng: &RngStream,
) -> Result<MeanEstimate> {
    let hits = try_map_range(n_eta, |j| {
        let eta = sample_poisson(model, &rng.child(j as u64))?;
        let d2 = second_difference(functional, &eta, x1, x2)?;
        Ok::<_, Error>(if nonzero(d2, floor) { 1.0 } else { 0.0 })
    })?;
    Ok(mean_estimate(&hits))
}

fn second_difference(f: &FunctionalSpec, eta: &PointConfiguration, x1: &Point, x2: &Point) -> Result<f64> {
    let e1 = eta.add_points(std::slice::from_ref(x1))?;
    let e2 = eta.add_points(std::slice::from_ref(x2))?;
    let e12 = e1.add_points(std::slice::from_ref(x2))?;
    Ok(f.eval(&e12) - f.eval(&e1) - f.eval(&e2) + f.eval(eta))
}

struct ProbeMoments {
    first: f64,
    second: f64,
}

fn probe_moments(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    plan: &StabilizationPlan,
    x: &Point,
    stream: &RngStream,
    vanishing: bool,
) -> Result<ProbeMoments> {
    let mut r = stream.child(0).rng();
    let partners = [jittered(model, x, &mut r), sample_point(model, &mut r)];
    let mut first = Vec::with_capacity(plan.n_eta_probe);
    let mut second = [Vec::with_capacity(plan.n_eta_probe), Vec::with_capacity(plan.n_eta_probe)];
    for j in 0..plan.n_eta_probe {
        let eta = sample_poisson(model, &stream.grandchild(1, j as u64))?;
        let f0 = functional.eval(&eta);
        let ex = eta.add_points(std::slice::from_ref(x))?;
        let fx = functional.eval(&ex);
        first.push((fx - f0).abs().powf(4.0 + plan.p1));
        if !vanishing {
            for (k, y) in partners.iter().enumerate() {
                let fy = functional.eval(&eta.add_points(std::slice::from_ref(y))?);
                let fxy = functional.eval(&ex.add_points(std::slice::from_ref(y))?);
                second[k].push((fxy - fx - fy + f0).abs().powf(4.0 + plan.p2));
            }
        }
    }
    let second = if vanishing { 0.0 } else { mean(&second[0]).max(mean(&second[1])) };
    Ok(ProbeMoments {
        first: mean(&first),
        second,
    })
}

struct OuterProbabilities {
    /// `P(D_{x₁} ≠ 0)`.
    single: f64,
    /// `P(D²_{x₁,x₂ⱼ} ≠ 0)` for each partner.
    pairs: Vec<f64>,
}

fn outer_probabilities(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    plan: &StabilizationPlan,
    floor: f64,
    stream: &RngStream,
    vanishing: bool,
) -> Result<OuterProbabilities> {
    let mut r = stream.child(0).rng();
    let x1 = sample_point(model, &mut r);
    let partners: Vec<Point> = (0..plan.n_pair).map(|_| sample_point(model, &mut r)).collect();
    let mut single = 0usize;
    let mut pairs = vec![0usize; plan.n_pair];
    for j in 0..plan.n_eta {
        let eta = sample_poisson(model, &stream.grandchild(1, j as u64))?;
        let f0 = functional.eval(&eta);
        let e1 = eta.add_points(std::slice::from_ref(&x1))?;
        let f1 = functional.eval(&e1);
        if nonzero(f1 - f0, floor) {
            single += 1;
        }
        if vanishing {
            continue;
        }
        for (k, y) in partners.iter().enumerate() {
            let f2 = functional.eval(&eta.add_points(std::slice::from_ref(y))?);
            let f12 = functional.eval(&e1.add_points(std::slice::from_ref(y))?);
            if nonzero(f12 - f1 - f2 + f0, floor) {
                pairs[k] += 1;
            }
        }
    }
    let n = plan.n_eta as f64;
    Ok(OuterProbabilities {
        single: single as f64 / n,
        pairs: pairs.into_iter().map(|c| c as f64 / n).collect(),
    })
}

fn avg(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Evaluates both stabilization bounds for `(F − E F)/√V F` from estimated
/// moment caps and non-vanishing probabilities of the raw difference operators.
pub fn estimate_stabilization_bound(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    standardization: &Standardization,
    plan: &StabilizationPlan,
) -> Result<StabilizationReport> {
    plan.validate()?;
    let v = standardization.variance;
    if !(v > 0.0) {
        return Err(Error::Degenerate("variance must be positive".into()));
    }
    let vanishing = functional.second_order_vanishes();
    let floor = ZERO_TOLERANCE * (v.sqrt() + standardization.mean.abs());
    let (p1, p2) = (plan.p1, plan.p2);

    let probe_pts = probes(model, plan.probes_per_axis, plan.random_probes, &plan.rng.child(0));
    let probe_stream = plan.rng.child(1);
    let moments = try_map_range(probe_pts.len(), |i| {
        probe_moments(functional, model, plan, &probe_pts[i], &probe_stream.child(i as u64), vanishing)
    })?;
    let c1 = moments.iter().map(|m| m.first).fold(0.0, f64::max);
    let c2 = moments.iter().map(|m| m.second).fold(0.0, f64::max);
    if !(c1.is_finite() && c2.is_finite()) {
        return Err(Error::NonFinite("moment caps c1, c2".into()));
    }

    let outer_stream = plan.rng.child(2);
    let outer = try_map_range(plan.n_outer, |i| {
        outer_probabilities(functional, model, plan, floor, &outer_stream.child(i as u64), vanishing)
    })?;
    let lambda = model.lambda_mass();
    let e_nested = p2 / (16.0 + 4.0 * p2);
    let e_pair = p2 / (8.0 + 2.0 * p2);
    let inner: Vec<f64> = outer
        .iter()
        .map(|o| lambda * avg(&o.pairs.iter().map(|p| p.powf(e_nested)).collect::<Vec<_>>()))
        .collect();
    let double_nested = (lambda * avg(&inner.iter().map(|g| g * g).collect::<Vec<_>>())).sqrt();
    let m_hat = inner.iter().copied().fold(0.0, f64::max);
    let single = lambda * avg(&outer.iter().map(|o| o.single.powf((1.0 + p1) / (4.0 + p1))).collect::<Vec<_>>());
    let gamma_f = lambda * avg(&outer.iter().map(|o| o.single.powf(p1 / (8.0 + 2.0 * p1))).collect::<Vec<_>>());
    let pair_terms: Vec<f64> = outer.iter().flat_map(|o| o.pairs.iter().map(|p| p.powf(e_pair))).collect();
    let pair = (lambda * lambda * avg(&pair_terms)).sqrt();

    let cbar = 1f64.max(c1).max(c2);
    let dw_bound = 5.0 * cbar / v * double_nested + cbar / v.powf(1.5) * single;
    let dk_bound = 5.0 * cbar / v * double_nested
        + cbar * gamma_f.sqrt() / v
        + 2.0 * cbar * gamma_f / v.powf(1.5)
        + (cbar * gamma_f.powf(1.25) + 2.0 * cbar * gamma_f.powf(1.5)) / (v * v)
        + (6f64.sqrt() + 3f64.sqrt()) * cbar / v * pair;

    Ok(StabilizationReport {
        c1,
        c2,
        p1,
        p2,
        m_hat,
        prob_integrals: ProbabilityIntegrals {
            double_nested,
            single,
            pair,
        },
        gamma_f,
        variance_used: v,
        dw_bound,
        dk_bound,
        n_probes: probe_pts.len(),
    })
}
