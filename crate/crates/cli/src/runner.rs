//! Executes the configured tasks in dependency order.
//!
//! Every random stream derives from the config seed: the pilot and CLT
//! replicates use the replication engine's streams for grid index `k`, and
//! the other tasks use `RngStream::new(seed, TASK_ID).child(k)` with the ids
//! below.

use poisson_stein::clt::{
    distance_report, fit_rate, standardize_member, DistanceReport, RateFit, ReplicationPlan, StandardizationMode,
};
use poisson_stein::rng::RngStream;
use poisson_stein::stein_bounds::{
    assemble_bounds, estimate_gammas, estimate_stabilization_bound, BoundReport, GammaEstimates, GammaPlan, Measured,
    StabilizationPlan, StabilizationReport,
};
use poisson_stein::variance::{empirical_variance, sample_values, Standardization, VarianceEstimate};
use serde::Serialize;

use crate::config::{ExperimentConfig, Task};
use crate::error::CliError;

pub const VARIANCE_STREAM: u64 = 0x7A1;
pub const GAMMA_STREAM: u64 = 0x6A3;
pub const STABILIZATION_STREAM: u64 = 0x57A;
pub const BOOTSTRAP_STREAM: u64 = 0xB00;

/// Results for one grid point.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PointResults {
    pub t: f64,
    pub standardization: Option<Standardization>,
    pub variance: Option<VarianceEstimate>,
    pub gammas: Option<GammaEstimates>,
    pub bounds: Option<BoundReport>,
    pub stabilization: Option<StabilizationReport>,
    pub distances: Option<DistanceReport>,
    /// Evaluations on degenerate configurations during the CLT task.
    pub degenerate: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResults {
    pub functional: &'static str,
    pub seed: u64,
    pub points: Vec<PointResults>,
    pub rate: Option<RateFit>,
}

fn stream(seed: u64, id: u64, k: usize) -> RngStream {
    RngStream::new(seed, id).child(k as u64)
}

pub fn execute(cfg: &ExperimentConfig) -> Result<RunResults, CliError> {
    let tasks = cfg.expanded_tasks();
    let has = |t: Task| tasks.contains(&t);
    let needs_pilot = has(Task::Gammas) || has(Task::Stabilization) || has(Task::Clt);
    let plan = ReplicationPlan {
        t_values: cfg.model.t_grid.clone(),
        n_reps: cfg.mc.n_reps,
        seed: cfg.seed,
        standardization: StandardizationMode::Pilot { n_pilot: cfg.mc.n_pilot },
    };
    let mc = &cfg.mc;
    let mut points = Vec::with_capacity(plan.t_values.len());
    for (k, &t) in plan.t_values.iter().enumerate() {
        let (spec, model) = cfg
            .functional
            .build(t, &cfg.model.window, &cfg.model.marks)
            .map_err(CliError::numeric("model"))?;
        let mut r = PointResults {
            t,
            ..Default::default()
        };
        if needs_pilot {
            let mode = if spec.moments().is_some() {
                StandardizationMode::Analytic
            } else {
                plan.standardization
            };
            r.standardization = Some(
                standardize_member(&spec, &model, mode, plan.n_pilot(), &plan.pilot_stream(k))
                    .map_err(CliError::numeric("pilot"))?,
            );
        }
        if has(Task::Variance) {
            r.variance = Some(
                empirical_variance(&spec, &model, mc.n_reps, &stream(cfg.seed, VARIANCE_STREAM, k))
                    .map_err(CliError::numeric("variance"))?,
            );
        }
        if has(Task::Gammas) {
            let mut gp = GammaPlan::new(mc.n_outer, mc.n_eta, stream(cfg.seed, GAMMA_STREAM, k));
            gp.n_bootstrap = mc.n_bootstrap;
            let std = r.standardization.expect("pilot precedes gammas");
            r.gammas = Some(estimate_gammas(&spec, &model, &std, &gp).map_err(CliError::numeric("gammas"))?);
        }
        if has(Task::Bounds) {
            r.bounds = r.gammas.as_ref().map(assemble_bounds);
        }
        if has(Task::Stabilization) {
            let mut sp = StabilizationPlan::new(mc.n_outer, mc.n_inner, mc.n_eta, stream(cfg.seed, STABILIZATION_STREAM, k));
            sp.probes_per_axis = mc.nodes;
            let std = r.standardization.expect("pilot precedes stabilization");
            r.stabilization =
                Some(estimate_stabilization_bound(&spec, &model, &std, &sp).map_err(CliError::numeric("stabilization"))?);
        }
        if has(Task::Clt) {
            let std = r.standardization.expect("pilot precedes clt");
            let raw = sample_values(&spec, &model, mc.n_reps, &plan.measurement_stream(k)).map_err(CliError::numeric("clt"))?;
            let values: Vec<f64> = raw.iter().map(|&x| std.apply(x)).collect();
            let d = distance_report(t, &values, mc.n_bootstrap, &stream(cfg.seed, BOOTSTRAP_STREAM, k))
                .map_err(CliError::numeric("clt"))?;
            if let Some(b) = r.bounds.take() {
                r.bounds = Some(b.with_empirical(
                    Measured {
                        value: d.d_w,
                        std_error: d.d_w_se,
                    },
                    Measured {
                        value: d.d_k,
                        std_error: d.d_k_se,
                    },
                ));
            }
            r.distances = Some(d);
            r.degenerate = Some(spec.degenerate_evaluations());
        }
        points.push(r);
    }
    let rate = if has(Task::Rate) {
        let reports: Vec<DistanceReport> = points.iter().filter_map(|p| p.distances).collect();
        Some(fit_rate(&reports).map_err(CliError::numeric("rate"))?)
    } else {
        None
    };
    Ok(RunResults {
        functional: cfg.functional.name(),
        seed: cfg.seed,
        points,
        rate,
    })
}
