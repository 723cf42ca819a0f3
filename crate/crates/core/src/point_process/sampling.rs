use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::{IntensityModel, Point, PointConfiguration};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Largest expected point count accepted by [`sample_poisson`].
pub const MAX_EXPECTED_POINTS: f64 = 1e8;

/// Poisson(mean) variate: sequential inversion below 30, Hörmann's
/// transformed rejection (PTRS) above.
pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 30.0 {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
            if p == 0.0 && cdf < u {
                // round-off left the tail unreachable
                break;
            }
        }
        return k;
    }
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Samples η on `model.window`: a Poisson count, then i.i.d. uniform
/// locations and i.i.d. marks from the normalised mark measure.
pub fn sample_poisson(model: &IntensityModel, rng: &RngStream) -> Result<PointConfiguration> {
    let expected = model.expected_count();
    if expected > MAX_EXPECTED_POINTS {
        return Err(Error::ConfigurationTooLarge {
            expected,
            limit: MAX_EXPECTED_POINTS,
        });
    }
    let mut r = rng.rng();
    let n = poisson_count(expected, &mut r) as usize;
    let d = model.window.dim();
    let mut coords = Vec::with_capacity(n * d);
    let mut marks = model.marks.is_marked().then(|| Vec::with_capacity(n));
    for _ in 0..n {
        model.window.sample_uniform_into(&mut r, &mut coords);
        if let Some(m) = marks.as_mut() {
            m.push(model.marks.sample(&mut r).expect("marked measure"));
        }
    }
    Ok(PointConfiguration::from_raw(model.window.clone(), coords, marks))
}

/// Independent s-thinning: each point is kept with probability `s`.
pub fn thin(config: &PointConfiguration, s: f64, rng: &RngStream) -> Result<PointConfiguration> {
    let uniforms = retention_uniforms(config.len(), s, rng)?;
    Ok(thin_with_uniforms(config, s, &uniforms))
}

pub(crate) fn retention_uniforms(n: usize, s: f64, rng: &RngStream) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("thinning probability must lie in [0, 1], got {s}")));
    }
    let mut r = rng.rng();
    Ok((0..n).map(|_| r.random::<f64>()).collect())
}

/// Keeps point `i` iff `uniforms[i] < s`; `s = 1` keeps everything.
pub(crate) fn thin_with_uniforms(config: &PointConfiguration, s: f64, uniforms: &[f64]) -> PointConfiguration {
    if s >= 1.0 {
        return config.clone();
    }
    config.filter_indices(|i| uniforms[i] < s)
}

/// Samples one point from the normalised intensity measure (uniform
/// location, mark from ν/ν(R)).
pub fn sample_point<R: Rng + ?Sized>(model: &IntensityModel, rng: &mut R) -> Point {
    let loc = model.window.sample_uniform(rng);
    let mark = model.marks.sample(rng);
    Point { loc, mark }
}
