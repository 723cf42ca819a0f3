use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::registry::FunctionalConfig;
use crate::functionals::FunctionalSpec;
use crate::point_process::{IntensityModel, MarkMeasure, Window};
use crate::rng::RngStream;
use crate::variance::{sample_values, Standardization};

/// A functional and its intensity model for each value of `t`.
pub trait FunctionalFamily: Sync {
    fn member(&self, t: f64) -> Result<(FunctionalSpec, IntensityModel)>;
}

impl<F> FunctionalFamily for F
where
    F: Fn(f64) -> Result<(FunctionalSpec, IntensityModel)> + Sync,
{
    fn member(&self, t: f64) -> Result<(FunctionalSpec, IntensityModel)> {
        self(t)
    }
}

/// Registry family on a base window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegistryFamily {
    pub functional: FunctionalConfig,
    pub window: Window,
    #[serde(default)]
    pub marks: MarkMeasure,
}

impl FunctionalFamily for RegistryFamily {
    fn member(&self, t: f64) -> Result<(FunctionalSpec, IntensityModel)> {
        self.functional.build(t, &self.window, &self.marks)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum StandardizationMode {
    /// Moments carried by the functional.
    Analytic,
    /// Pilot batch on streams disjoint from the measurement batch;
    /// `n_pilot` defaults to `max(1000, n_reps / 10)`.
    Pilot { n_pilot: Option<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationPlan {
    pub t_values: Vec<f64>,
    pub n_reps: usize,
    pub seed: u64,
    pub standardization: StandardizationMode,
}

pub const MIN_REPS: usize = 100;
/// Stream id of the replication engine; child `k` belongs to `t_values[k]`.
pub const CLT_STREAM: u64 = 0xC17;

impl ReplicationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.t_values.is_empty() {
            return Err(Error::Domain("t grid is empty".into()));
        }
        if self.t_values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Domain("t values must be positive".into()));
        }
        if self.t_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("t values must be strictly increasing".into()));
        }
        if self.n_reps < MIN_REPS {
            return Err(Error::Domain(format!("n_reps must be at least {MIN_REPS}, got {}", self.n_reps)));
        }
        Ok(())
    }

    pub fn n_pilot(&self) -> usize {
        match self.standardization {
            StandardizationMode::Pilot { n_pilot: Some(n) } => n,
            _ => 1000.max(self.n_reps / 10),
        }
    }

    /// Measurement stream for `t_values[k]`.
    pub fn measurement_stream(&self, k: usize) -> RngStream {
        RngStream::new(self.seed, CLT_STREAM).grandchild(k as u64, 1)
    }

    /// Pilot stream for `t_values[k]`, disjoint from the measurement stream.
    pub fn pilot_stream(&self, k: usize) -> RngStream {
        RngStream::new(self.seed, CLT_STREAM).grandchild(k as u64, 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSample {
    pub t: f64,
    pub functional: String,
    pub standardization: Standardization,
    /// Standardised values `(F − mean)/√variance` in replicate order.
    pub values: Vec<f64>,
    /// Number of evaluations on degenerate configurations.
    pub degenerate: u64,
}

/// Standardisation for one family member under `mode`.
pub fn standardize_member(
    functional: &FunctionalSpec,
    model: &IntensityModel,
    mode: StandardizationMode,
    n_pilot: usize,
    rng: &RngStream,
) -> Result<Standardization> {
    match mode {
        StandardizationMode::Analytic => {
            let m = functional
                .moments()
                .ok_or_else(|| Error::Precondition(format!("{} has no analytic moments", functional.name())))?;
            Standardization::analytic(m.mean, m.variance)
        }
        StandardizationMode::Pilot { .. } => Standardization::pilot(functional, model, n_pilot, rng),
    }
}

/// Standardised samples of `F_t` for every `t` in the plan.
pub fn replicate<F: FunctionalFamily + ?Sized>(family: &F, plan: &ReplicationPlan) -> Result<Vec<ReplicateSample>> {
    plan.validate()?;
    let mut out = Vec::with_capacity(plan.t_values.len());
    for (k, &t) in plan.t_values.iter().enumerate() {
        let (spec, model) = family.member(t)?;
        let std = standardize_member(&spec, &model, plan.standardization, plan.n_pilot(), &plan.pilot_stream(k))?;
        let raw = sample_values(&spec, &model, plan.n_reps, &plan.measurement_stream(k))?;
        out.push(ReplicateSample {
            t,
            functional: spec.name().to_string(),
            standardization: std,
            values: raw.iter().map(|&x| std.apply(x)).collect(),
            degenerate: spec.degenerate_evaluations(),
        });
    }
    Ok(out)
}

/// One CSV row per `(functional, t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub functional: String,
    pub t: f64,
    pub n: usize,
    pub d_k: f64,
    pub d_w: f64,
    pub dkw_band: f64,
    pub dw_bound: Option<f64>,
    pub dk_bound: Option<f64>,
    pub variance: f64,
    pub seed: u64,
}

pub fn write_clt_csv<W: Write>(rows: &[CltRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
