//! Poisson functionals `F = f(η)`: first Wiener chaos, k-nearest-neighbour
//! edge-power sums, planar Voronoi statistics and shot-noise integrals.

mod first_chaos;
mod knn;
pub mod registry;
mod shot_noise;
mod voronoi;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::point_process::{Point, PointConfiguration};

pub use first_chaos::{first_chaos, rescaled_poisson, KernelFn};
pub use knn::{knn_edge_power, knn_graph_edges, knn_lists, knn_stabilization_radius, KnnParams};
pub use shot_noise::{shot_noise_functional, Compensator, Kernel, Phi, ShotNoiseParams};
pub use voronoi::{default_voronoi_padding, voronoi_measure, voronoi_statistic, VoronoiParams, VoronoiStatistic};

pub type EvalFn = dyn Fn(&PointConfiguration) -> f64 + Send + Sync;
pub type LocalityFn = dyn Fn(&PointConfiguration, &Point) -> f64 + Send + Sync;

/// Known moments of a functional, used for analytic standardisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticMoments {
    pub mean: f64,
    pub variance: f64,
    /// E[((F - EF)/√VF)^4], when known.
    pub standardized_fourth: Option<f64>,
}

/// A named, pure map from configurations to reals.
#[derive(Clone)]
pub struct FunctionalSpec {
    name: String,
    eval: Arc<EvalFn>,
    padding_radius: f64,
    locality_radius_hint: Option<Arc<LocalityFn>>,
    moments: Option<AnalyticMoments>,
    second_order_vanishes: bool,
    degenerate: Arc<AtomicU64>,
}

impl fmt::Debug for FunctionalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionalSpec")
            .field("name", &self.name)
            .field("padding_radius", &self.padding_radius)
            .field("moments", &self.moments)
            .field("second_order_vanishes", &self.second_order_vanishes)
            .finish_non_exhaustive()
    }
}

impl FunctionalSpec {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&PointConfiguration) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            padding_radius: 0.0,
            locality_radius_hint: None,
            moments: None,
            second_order_vanishes: false,
            degenerate: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Functional whose evaluation closure can flag degenerate inputs
    /// (e.g. too few points for the graph to exist).
    pub(crate) fn with_flag<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&PointConfiguration, &AtomicU64) -> f64 + Send + Sync + 'static,
    {
        let flag = Arc::new(AtomicU64::new(0));
        let inner = flag.clone();
        let mut spec = Self::new(name, move |c| eval(c, &inner));
        spec.degenerate = flag;
        spec
    }

    pub fn constant(value: f64) -> Self {
        let mut s = Self::new("constant", move |_| value);
        s.moments = Some(AnalyticMoments {
            mean: value,
            variance: 0.0,
            standardized_fourth: None,
        });
        s.second_order_vanishes = true;
        s
    }

    pub fn with_padding(mut self, r: f64) -> Self {
        self.padding_radius = r;
        self
    }

    pub fn with_locality_hint<F>(mut self, hint: F) -> Self
    where
        F: Fn(&PointConfiguration, &Point) -> f64 + Send + Sync + 'static,
    {
        self.locality_radius_hint = Some(Arc::new(hint));
        self
    }

    pub fn with_moments(mut self, moments: AnalyticMoments) -> Self {
        self.moments = Some(moments);
        self
    }

    /// Marks the functional as having identically vanishing second differences
    /// (first chaos plus a constant).
    pub fn with_vanishing_second_order(mut self) -> Self {
        self.second_order_vanishes = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, config: &PointConfiguration) -> f64 {
        (self.eval)(config)
    }

    pub fn padding_radius(&self) -> f64 {
        self.padding_radius
    }

    pub fn locality_radius(&self, config: &PointConfiguration, x: &Point) -> Option<f64> {
        self.locality_radius_hint.as_ref().map(|h| h(config, x))
    }

    pub fn moments(&self) -> Option<AnalyticMoments> {
        self.moments
    }

    pub fn second_order_vanishes(&self) -> bool {
        self.second_order_vanishes
    }

    /// Number of evaluations that hit a degenerate configuration so far.
    pub fn degenerate_evaluations(&self) -> u64 {
        self.degenerate.load(Ordering::Relaxed)
    }

    /// `a · f + b`. Analytic moments and the vanishing-D² flag carry over.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        let inner = self.eval.clone();
        let mut out = self.clone();
        out.name = self.name.clone();
        out.eval = Arc::new(move |c| a * inner(c) + b);
        out.moments = self.moments.map(|m| AnalyticMoments {
            mean: a * m.mean + b,
            variance: a * a * m.variance,
            standardized_fourth: m.standardized_fourth,
        });
        out
    }

    /// `(f - mean) / √variance`.
    pub fn standardized(&self, mean: f64, variance: f64) -> Self {
        let sd = variance.sqrt();
        let inner = self.eval.clone();
        let mut out = self.clone();
        out.eval = Arc::new(move |c| (inner(c) - mean) / sd);
        out.moments = self.moments.map(|m| AnalyticMoments {
            mean: (m.mean - mean) / sd,
            variance: m.variance / variance,
            standardized_fourth: m.standardized_fourth,
        });
        out
    }

    /// `f - mean`.
    pub fn centred(&self, mean: f64) -> Self {
        self.affine(1.0, -mean)
    }
}

/// Accumulates values in a permutation-invariant way: sorted by total order,
/// then summed pairwise.
pub(crate) fn canonical_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    crate::exec::pairwise_sum(&values)
}
