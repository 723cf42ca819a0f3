use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_range, pairwise_sum};
use crate::normal::{cdf, cdf_integral, quantile, upper_tail_integral};
use crate::rng::RngStream;
use crate::stats::sample_variance;

fn sorted(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sample".into()));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Kolmogorov distance between the empirical law of `sample` and N(0, 1).
pub fn empirical_dk(sample: &[f64]) -> Result<f64> {
    let v = sorted(sample)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let p = cdf(x);
        let hi = (i + 1) as f64 / n;
        let lo = i as f64 / n;
        d = d.max((hi - p).abs()).max((lo - p).abs());
    }
    Ok(d)
}

/// `∫ |p − Φ(x)| dx` over `[a, b]` for a constant level `p ∈ (0, 1)`.
fn level_gap(p: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // ∫_a^b (p − Φ) = p(b − a) − (G(b) − G(a)) with G' = Φ
    let signed = |a: f64, b: f64| p * (b - a) - (cdf_integral(b) - cdf_integral(a));
    let c = quantile(p);
    if c > a && c < b {
        signed(a, c).abs() + signed(c, b).abs()
    } else {
        signed(a, b).abs()
    }
}

/// Wasserstein-1 distance `∫ |F_n − Φ|` between the empirical law of
/// `sample` and N(0, 1), integrated exactly between order statistics.
pub fn empirical_dw(sample: &[f64]) -> Result<f64> {
    let v = sorted(sample)?;
    let n = v.len();
    let mut parts = Vec::with_capacity(n + 1);
    parts.push(cdf_integral(v[0]));
    for i in 1..n {
        parts.push(level_gap(i as f64 / n as f64, v[i - 1], v[i]));
    }
    parts.push(upper_tail_integral(v[n - 1]));
    Ok(pairwise_sum(&parts))
}

/// Half-width `√(ln(2/α) / (2n))` of the DKW confidence band.
pub fn dkw_band(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Bootstrap standard error of a sample statistic.
pub fn bootstrap_se(
    sample: &[f64],
    statistic: impl Fn(&[f64]) -> Result<f64> + Sync + Send,
    n_boot: usize,
    rng: &RngStream,
) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let stats = map_range(n_boot, |b| {
        let mut r = rng.child(b as u64).rng();
        let resample: Vec<f64> = (0..sample.len()).map(|_| sample[r.random_range(0..sample.len())]).collect();
        statistic(&resample)
    });
    let stats: Vec<f64> = stats.into_iter().collect::<Result<_>>()?;
    Ok(sample_variance(&stats).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub t: f64,
    pub n: usize,
    pub d_k: f64,
    pub d_w: f64,
    pub d_k_se: f64,
    pub d_w_se: f64,
    pub dkw_band: f64,
}

pub const DKW_ALPHA: f64 = 0.05;

/// Distances of a standardised sample to N(0, 1) with bootstrap SEs.
pub fn distance_report(t: f64, sample: &[f64], n_boot: usize, rng: &RngStream) -> Result<DistanceReport> {
    Ok(DistanceReport {
        t,
        n: sample.len(),
        d_k: empirical_dk(sample)?,
        d_w: empirical_dw(sample)?,
        d_k_se: if n_boot > 1 { bootstrap_se(sample, empirical_dk, n_boot, &rng.child(0))? } else { 0.0 },
        d_w_se: if n_boot > 1 { bootstrap_se(sample, empirical_dw, n_boot, &rng.child(1))? } else { 0.0 },
        dkw_band: dkw_band(sample.len(), DKW_ALPHA),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Kolmogorov,
    Wasserstein,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(t, log d − fitted)` for each point used.
    pub residuals: Vec<(f64, f64)>,
    pub n_used: usize,
}

pub const MIN_RATE_POINTS: usize = 4;

/// Least squares of `log d` on `log t` over points with `d_K` above the DKW band.
pub fn fit_rate(reports: &[DistanceReport]) -> Result<RateFit> {
    fit_rate_with(reports, Distance::Kolmogorov)
}

pub fn fit_rate_with(reports: &[DistanceReport], distance: Distance) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| {
            let d = match distance {
                Distance::Kolmogorov => r.d_k,
                Distance::Wasserstein => r.d_w,
            };
            (r.t, d, r.dkw_band)
        })
        .filter(|&(t, d, band)| d > band && t > 0.0)
        .map(|(t, d, _)| (t, d))
        .collect();
    if pts.len() < MIN_RATE_POINTS {
        return Err(Error::InsufficientSignal {
            usable: pts.len(),
            needed: MIN_RATE_POINTS,
        });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Domain("rate fit needs at least two distinct t values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<(f64, f64)> = pts
        .iter()
        .zip(xs.iter().zip(&ys))
        .map(|(p, (x, y))| (p.0, y - (intercept + slope * x)))
        .collect();
    let sse: f64 = residuals.iter().map(|r| r.1 * r.1).sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if n > 2.0 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RateFit {
        slope,
        slope_se,
        intercept,
        r_squared,
        residuals,
        n_used: pts.len(),
    })
}
