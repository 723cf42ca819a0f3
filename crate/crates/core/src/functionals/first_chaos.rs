use std::sync::Arc;

use super::{canonical_sum, AnalyticMoments, FunctionalSpec};
use crate::point_process::PointRef;

pub type KernelFn = Arc<dyn Fn(PointRef<'_>) -> f64 + Send + Sync>;

/// First-chaos functional `I₁(f) = Σ_{x∈η} f(x) − ∫ f dλ`, with the
/// compensator `∫ f dλ` supplied by the caller.
pub fn first_chaos(f: KernelFn, compensator: f64) -> FunctionalSpec {
    FunctionalSpec::new("first_chaos", move |c| {
        let values: Vec<f64> = c.iter().map(|p| f(p)).collect();
        canonical_sum(values) - compensator
    })
    .with_vanishing_second_order()
}

/// The rescaled centred Poisson variable: η of intensity `t` on `[0,1]`
/// (equivalently unit intensity on `[0,t]`) with `f ≡ t^{-1/2}`.
/// Mean 0, variance 1, E F⁴ = 3 + 1/t.
pub fn rescaled_poisson(t: f64) -> FunctionalSpec {
    let c = t.powf(-0.5);
    first_chaos(Arc::new(move |_| c), t * c).with_moments(AnalyticMoments {
        mean: 0.0,
        variance: 1.0,
        standardized_fourth: Some(3.0 + 1.0 / t),
    })
}
