//! Experiment configuration: a single JSON document.

use std::path::{Path, PathBuf};

use poisson_stein::clt::MIN_REPS;
use poisson_stein::functionals::registry::FunctionalConfig;
use poisson_stein::point_process::{MarkMeasure, Window};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub functional: FunctionalConfig,
    pub model: ModelConfig,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    /// Expected values evaluated by `run --check`.
    #[serde(default)]
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Base window; each functional family scales it with `t` its own way.
    pub window: Window,
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub marks: MarkMeasure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Variance,
    Gammas,
    Bounds,
    Stabilization,
    Clt,
    Rate,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Variance => "variance",
            Task::Gammas => "gammas",
            Task::Bounds => "bounds",
            Task::Stabilization => "stabilization",
            Task::Clt => "clt",
            Task::Rate => "rate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    /// Outer point samples for the gamma and stabilization estimators.
    pub n_outer: usize,
    /// Configurations per outer sample.
    pub n_eta: usize,
    /// Replicates for the variance and CLT tasks.
    pub n_reps: usize,
    /// Pilot size for standardisation; `max(1000, n_reps/10)` when absent.
    pub n_pilot: Option<usize>,
    /// Probe lattice points per axis for the stabilization suprema.
    pub nodes: usize,
    /// Partner points per outer sample in the stabilization estimator.
    pub n_inner: usize,
    /// Bootstrap resamples for standard errors.
    pub n_bootstrap: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_outer: 200,
            n_eta: 20,
            n_reps: 2000,
            n_pilot: None,
            nodes: 8,
            n_inner: 16,
            n_bootstrap: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("pstein-out"),
            formats: vec![Format::Csv],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DK,
    DW,
    Variance,
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
    Gamma5,
    Gamma6,
    DwBound,
    DkBound,
    StabilizationDwBound,
    StabilizationDkBound,
    Slope,
}

impl Metric {
    /// Task whose output carries the metric.
    pub fn task(self) -> Task {
        match self {
            Metric::DK | Metric::DW => Task::Clt,
            Metric::Variance => Task::Variance,
            Metric::Gamma1 | Metric::Gamma2 | Metric::Gamma3 | Metric::Gamma4 | Metric::Gamma5 | Metric::Gamma6 => {
                Task::Gammas
            }
            Metric::DwBound | Metric::DkBound => Task::Bounds,
            Metric::StabilizationDwBound | Metric::StabilizationDkBound => Task::Stabilization,
            Metric::Slope => Task::Rate,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::DK => "d_k",
            Metric::DW => "d_w",
            Metric::Variance => "variance",
            Metric::Gamma1 => "gamma1",
            Metric::Gamma2 => "gamma2",
            Metric::Gamma3 => "gamma3",
            Metric::Gamma4 => "gamma4",
            Metric::Gamma5 => "gamma5",
            Metric::Gamma6 => "gamma6",
            Metric::DwBound => "dw_bound",
            Metric::DkBound => "dk_bound",
            Metric::StabilizationDwBound => "stabilization_dw_bound",
            Metric::StabilizationDkBound => "stabilization_dk_bound",
            Metric::Slope => "slope",
        }
    }
}

/// `min − k·se ≤ value ≤ max + k·se` for `k = se_slack`. Without `t` the
/// check applies at every grid point (the slope has no `t`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub metric: Metric,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub se_slack: f64,
}

impl ExperimentConfig {
    /// Parses `text`, reporting the path of the offending key on failure.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::schema(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::schema("", format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(s) = seed_override {
            cfg.seed = s;
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let grid = &self.model.t_grid;
        if grid.is_empty() {
            return Err(CliError::schema("model.t_grid", "t grid must not be empty"));
        }
        for (i, t) in grid.iter().enumerate() {
            if !(*t > 0.0 && t.is_finite()) {
                return Err(CliError::schema(format!("model.t_grid[{i}]"), format!("{t} is not a positive number")));
            }
            if i > 0 && grid[i - 1] >= *t {
                return Err(CliError::schema(format!("model.t_grid[{i}]"), "t grid must be strictly increasing"));
            }
        }
        self.model
            .marks
            .validate()
            .map_err(|e| CliError::schema("model.marks", e.to_string()))?;
        self.functional
            .build(grid[0], &self.model.window, &self.model.marks)
            .map_err(|e| CliError::schema("functional", e.to_string()))?;
        if self.tasks.is_empty() {
            return Err(CliError::schema("tasks", "at least one task is required"));
        }
        let mc = &self.mc;
        let needs = |ts: &[Task]| ts.iter().any(|t| self.tasks.contains(t));
        if needs(&[Task::Variance, Task::Clt, Task::Rate]) && mc.n_reps < MIN_REPS {
            return Err(CliError::schema("mc.n_reps", format!("must be at least {MIN_REPS}")));
        }
        if needs(&[Task::Gammas, Task::Bounds]) && (mc.n_outer < 2 || mc.n_eta < 2) {
            return Err(CliError::schema("mc", "gamma estimation needs n_outer ≥ 2 and n_eta ≥ 2"));
        }
        if needs(&[Task::Stabilization]) && (mc.n_outer == 0 || mc.n_eta == 0 || mc.n_inner == 0) {
            return Err(CliError::schema("mc", "stabilization needs positive n_outer, n_eta and n_inner"));
        }
        if mc.n_pilot.is_some_and(|n| n < 2) {
            return Err(CliError::schema("mc.n_pilot", "must be at least 2"));
        }
        if self.output.formats.is_empty() {
            return Err(CliError::schema("output.formats", "at least one format is required"));
        }
        for (i, c) in self.checks.iter().enumerate() {
            let at = |field: &str| format!("checks[{i}]{field}");
            if c.min.is_none() && c.max.is_none() {
                return Err(CliError::schema(at(""), "a check needs min or max"));
            }
            if c.se_slack.is_nan() || c.se_slack < 0.0 {
                return Err(CliError::schema(at(".se_slack"), "must be non-negative"));
            }
            match (c.metric, c.t) {
                (Metric::Slope, Some(_)) => return Err(CliError::schema(at(".t"), "the slope has no t")),
                (_, Some(t)) if !grid.contains(&t) => {
                    return Err(CliError::schema(at(".t"), format!("{t} is not in model.t_grid")))
                }
                _ => {}
            }
            if !self.expanded_tasks().contains(&c.metric.task()) {
                return Err(CliError::schema(
                    at(".metric"),
                    format!("{} needs the {} task", c.metric.name(), c.metric.task().name()),
                ));
            }
        }
        Ok(())
    }

    /// Requested tasks with their prerequisites, in execution order.
    pub fn expanded_tasks(&self) -> Vec<Task> {
        let mut out = self.tasks.clone();
        if out.contains(&Task::Bounds) {
            out.push(Task::Gammas);
        }
        if out.contains(&Task::Rate) {
            out.push(Task::Clt);
        }
        out.sort();
        out.dedup();
        out
    }

    /// SHA-256 of the canonical JSON form of the effective configuration
    /// without its `output` section, so the hash names the experiment rather
    /// than where its artifacts go.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        value.as_object_mut().expect("config is an object").remove("output");
        let canonical = serde_json::to_vec(&value).expect("config serialises");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}
