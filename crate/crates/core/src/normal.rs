//! Standard normal density, distribution and quantile functions.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Φ(x), evaluated through `erfc` so both tails keep full relative accuracy.
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Φ^{-1}(p) with one Newton polish step.
pub fn quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    let d = pdf(x);
    if d > 0.0 {
        x - (cdf(x) - p) / d
    } else {
        x
    }
}

/// Antiderivative of Φ: ∫_{-∞}^x Φ(s) ds = xΦ(x) + φ(x).
pub fn cdf_integral(x: f64) -> f64 {
    x * cdf(x) + pdf(x)
}

/// ∫_x^∞ (1 - Φ(s)) ds = φ(x) - x(1 - Φ(x)).
pub fn upper_tail_integral(x: f64) -> f64 {
    pdf(x) - x * cdf(-x)
}
