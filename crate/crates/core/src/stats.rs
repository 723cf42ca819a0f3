//! Small sample-statistics helpers shared by the estimators.

use crate::exec::pairwise_sum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance (n - 1 denominator). Zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&dev) / (n - 1) as f64
}

pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    let m = mean(xs);
    let se = if n >= 2 {
        (sample_variance(xs) / n as f64).sqrt()
    } else {
        0.0
    };
    MeanEstimate {
        mean: m,
        std_error: se,
        n,
    }
}

/// Central moment of order `k` with the 1/n normalisation.
pub fn central_moment(xs: &[f64], k: i32) -> f64 {
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| (x - m).powi(k)).collect();
    pairwise_sum(&dev) / xs.len() as f64
}
