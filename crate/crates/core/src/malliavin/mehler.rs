use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Quadrature;
use crate::error::{Error, Result};
use crate::exec::try_map_range;
use crate::functionals::FunctionalSpec;
use crate::point_process::{
    retention_uniforms, sample_poisson, thin_with_uniforms, IntensityModel, Point, PointConfiguration,
};
use crate::rng::RngStream;
use crate::stats::mean_estimate;

pub const DEFAULT_N_INNER: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MehlerEstimate {
    pub value: f64,
    pub std_error: f64,
    pub s: f64,
    pub n_inner: usize,
}

/// Diagnostics for one quadrature node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDiagnostic {
    pub node: usize,
    pub s: f64,
    pub weight: f64,
    pub inner_mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseOUEstimate {
    pub value: f64,
    pub std_error: f64,
    /// `(s, weight)` pairs in the thinning parameter.
    pub quadrature_nodes: Vec<(f64, f64)>,
    pub n_inner: usize,
    /// Upper bound on the truncation bias of the time integral.
    pub bias_bound: f64,
    pub diagnostics: Vec<NodeDiagnostic>,
}

impl InverseOUEstimate {
    pub fn write_diagnostics_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for d in &self.diagnostics {
            w.serialize(d)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Coupled estimate of `D_x(P_s F)` and `s · P_s(D_x F)` at a fixed base.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutationEstimate {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    /// Mean of the paired differences `lhs_i − rhs_i` and its standard error.
    pub difference: f64,
    pub difference_se: f64,
    pub n_inner: usize,
}

/// Centring data for [`inverse_ou_value`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centring {
    pub mean: f64,
    pub sd: f64,
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("thinning probability must lie in [0, 1], got {s}")));
    }
    Ok(())
}

fn check_inner(n_inner: usize) -> Result<()> {
    if n_inner == 0 {
        return Err(Error::Domain("n_inner must be at least 1".into()));
    }
    Ok(())
}

/// One draw of `η^{(s)} + ξ` with ξ Poisson of intensity `(1 − s)λ`.
/// Sub-streams: 0 retention uniforms, 1 replenishment.
pub(crate) fn mehler_draw(
    base: &PointConfiguration,
    model: &IntensityModel,
    s: f64,
    stream: &RngStream,
) -> Result<PointConfiguration> {
    let u = retention_uniforms(base.len(), s, &stream.child(0))?;
    let kept = thin_with_uniforms(base, s, &u);
    if s >= 1.0 {
        return Ok(kept);
    }
    let fresh = sample_poisson(&model.scaled(1.0 - s), &stream.child(1))?;
    kept.union(&fresh)
}

/// Monte Carlo estimate of `P_s F(base) = E f(η^{(s)} + ξ)`.
pub fn mehler_ps(
    functional: &FunctionalSpec,
    base: &PointConfiguration,
    model: &IntensityModel,
    s: f64,
    n_inner: usize,
    rng: &RngStream,
) -> Result<MehlerEstimate> {
    check_s(s)?;
    check_inner(n_inner)?;
    if s == 1.0 {
        return Ok(MehlerEstimate {
            value: functional.eval(base),
            std_error: 0.0,
            s,
            n_inner,
        });
    }
    let values = try_map_range(n_inner, |i| {
        let draw = mehler_draw(base, model, s, &rng.child(i as u64))?;
        Ok::<_, Error>(functional.eval(&draw))
    })?;
    let est = mean_estimate(&values);
    Ok(MehlerEstimate {
        value: est.mean,
        std_error: est.std_error,
        s,
        n_inner,
    })
}

/// Coupled estimate for the commutation `D_x P_s F = s P_s D_x F`. Base and
/// base + δ_x share retention uniforms and replenishment; x is retained with
/// its own coin.
pub fn coupled_commutation(
    functional: &FunctionalSpec,
    base: &PointConfiguration,
    model: &IntensityModel,
    x: &Point,
    s: f64,
    n_inner: usize,
    rng: &RngStream,
) -> Result<CommutationEstimate> {
    check_s(s)?;
    check_inner(n_inner)?;
    base.check_point(x)?;
    let rows = try_map_range(n_inner, |i| {
        let stream = rng.child(i as u64);
        let draw = mehler_draw(base, model, s, &stream)?;
        let coin: f64 = stream.child(2).rng().random();
        let plus = draw.add_points(std::slice::from_ref(x))?;
        let delta = functional.eval(&plus) - functional.eval(&draw);
        let lhs = if coin < s { delta } else { 0.0 };
        Ok::<_, Error>((lhs, s * delta))
    })?;
    let lhs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let diff: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
    let (l, r, d) = (mean_estimate(&lhs), mean_estimate(&rhs), mean_estimate(&diff));
    Ok(CommutationEstimate {
        lhs: l.mean,
        lhs_se: l.std_error,
        rhs: r.mean,
        rhs_se: r.std_error,
        difference: d.mean,
        difference_se: d.std_error,
        n_inner,
    })
}

/// Default rule for `∫₀¹ · ds`: 16-point Gauss–Legendre.
pub fn default_s_quadrature() -> Quadrature {
    Quadrature::gauss_legendre(16, 0.0, 1.0)
}

/// Default rule for `∫₀^{12} · du` after `s = e^{-u}`: 32-point Gauss–Legendre.
pub fn default_u_quadrature() -> Quadrature {
    Quadrature::gauss_legendre(32, 0.0, 12.0)
}

/// `−D_x L^{-1} F (base) = ∫₀¹ P_s(D_x F)(base) ds`, with `nodes` a rule on `[0, 1]`.
#[allow(clippy::too_many_arguments)]
pub fn inverse_ou_minus_dx(
    functional: &FunctionalSpec,
    base: &PointConfiguration,
    model: &IntensityModel,
    x: &Point,
    nodes: &Quadrature,
    n_inner: usize,
    rng: &RngStream,
) -> Result<InverseOUEstimate> {
    check_inner(n_inner)?;
    base.check_point(x)?;
    let (a, b) = nodes.interval();
    if a < 0.0 || b > 1.0 {
        return Err(Error::Domain("quadrature for the thinning parameter must lie in [0, 1]".into()));
    }
    let mut diagnostics = Vec::with_capacity(nodes.len());
    for (k, &(s, w)) in nodes.nodes().iter().enumerate() {
        let stream = rng.child(k as u64);
        let values = try_map_range(if s >= 1.0 { 1 } else { n_inner }, |i| {
            let draw = mehler_draw(base, model, s, &stream.child(i as u64))?;
            let plus = draw.add_points(std::slice::from_ref(x))?;
            Ok::<_, Error>(functional.eval(&plus) - functional.eval(&draw))
        })?;
        let est = mean_estimate(&values);
        diagnostics.push(NodeDiagnostic {
            node: k,
            s,
            weight: w,
            inner_mean: est.mean,
            std_error: if values.len() > 1 { est.std_error } else { 0.0 },
        });
    }
    Ok(combine(diagnostics, nodes.nodes().to_vec(), n_inner, 1.0, 0.0))
}

fn combine(
    diagnostics: Vec<NodeDiagnostic>,
    quadrature_nodes: Vec<(f64, f64)>,
    n_inner: usize,
    sign: f64,
    bias_bound: f64,
) -> InverseOUEstimate {
    let value = sign * diagnostics.iter().map(|d| d.weight * d.inner_mean).sum::<f64>();
    let var: f64 = diagnostics.iter().map(|d| (d.weight * d.std_error).powi(2)).sum();
    InverseOUEstimate {
        value,
        std_error: var.sqrt(),
        quadrature_nodes,
        n_inner,
        bias_bound,
        diagnostics,
    }
}

/// `L^{-1} F (base) = −∫₀^∞ (P_{e^{-u}} F(base) − E F) du`, truncated at the
/// upper end `u_max` of `u_nodes`. The reported bias bound is `e^{-u_max}·sd`.
pub fn inverse_ou_value(
    functional: &FunctionalSpec,
    base: &PointConfiguration,
    model: &IntensityModel,
    centring: Option<Centring>,
    u_nodes: &Quadrature,
    n_inner: usize,
    rng: &RngStream,
) -> Result<InverseOUEstimate> {
    let centring = centring.ok_or_else(|| Error::Precondition("inverse OU value needs E F for centring".into()))?;
    check_inner(n_inner)?;
    let (a, u_max) = u_nodes.interval();
    if a < 0.0 {
        return Err(Error::Domain("time quadrature must start at u ≥ 0".into()));
    }
    let mut diagnostics = Vec::with_capacity(u_nodes.len());
    let mut s_nodes = Vec::with_capacity(u_nodes.len());
    for (k, &(u, w)) in u_nodes.nodes().iter().enumerate() {
        let s = (-u).exp();
        let est = mehler_ps(functional, base, model, s, n_inner, &rng.child(k as u64))?;
        diagnostics.push(NodeDiagnostic {
            node: k,
            s,
            weight: w,
            inner_mean: est.value - centring.mean,
            std_error: est.std_error,
        });
        // ds = s du
        s_nodes.push((s, w * s));
    }
    Ok(combine(
        diagnostics,
        s_nodes,
        n_inner,
        -1.0,
        (-u_max).exp() * centring.sd.abs(),
    ))
}
