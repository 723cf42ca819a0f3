//! Artifact files. Each file carries the tool version, config hash and seed:
//! a leading `#` comment line in CSV, a `metadata` object in JSON.

use std::path::{Path, PathBuf};

use poisson_stein::clt::{write_clt_csv, CltRow};
use poisson_stein::stein_bounds::write_bound_csv;
use poisson_stein::variance::{write_variance_csv, VarianceRow};
use serde::Serialize;

use crate::config::{ExperimentConfig, Format, Task};
use crate::error::CliError;
use crate::runner::{PointResults, RunResults};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize)]
pub struct Metadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: &'a str,
    pub seed: u64,
}

impl Metadata<'_> {
    fn comment(&self) -> String {
        format!(
            "# {} {} config_sha256={} seed={}\n",
            self.tool, self.version, self.config_sha256, self.seed
        )
    }
}

#[derive(Serialize)]
struct GammaRow<'a> {
    functional: &'a str,
    t: f64,
    seed: u64,
    gamma1: f64,
    gamma2: f64,
    gamma3: f64,
    gamma4: f64,
    gamma5: f64,
    gamma6: f64,
    se1: f64,
    se2: f64,
    se3: f64,
    se4: f64,
    se5: f64,
    se6: f64,
    variance_used: f64,
    fourth_moment_used: f64,
    fourth_moment_bound: f64,
    n_outer: usize,
    n_eta: usize,
}

#[derive(Serialize)]
struct StabilizationRow<'a> {
    functional: &'a str,
    t: f64,
    seed: u64,
    c1: f64,
    c2: f64,
    p1: f64,
    p2: f64,
    m_hat: f64,
    double_nested: f64,
    single: f64,
    pair: f64,
    gamma_f: f64,
    variance_used: f64,
    dw_bound: f64,
    dk_bound: f64,
    n_probes: usize,
}

#[derive(Serialize)]
struct RateRow<'a> {
    functional: &'a str,
    seed: u64,
    slope: f64,
    slope_se: f64,
    intercept: f64,
    r_squared: f64,
    n_used: usize,
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

fn point_csv(task: Task, p: &PointResults, name: &str, seed: u64) -> Result<Option<Vec<u8>>, CliError> {
    let mut buf = Vec::new();
    match task {
        Task::Variance => {
            let Some(v) = p.variance else { return Ok(None) };
            let row = VarianceRow {
                functional: name.to_string(),
                t: p.t,
                variance: v.variance,
                se: v.std_error_of_variance,
                lower_bound: None,
            };
            write_variance_csv(&[row], &mut buf).map_err(CliError::numeric("variance"))?;
        }
        Task::Gammas => {
            let Some(g) = &p.gammas else { return Ok(None) };
            let row = GammaRow {
                functional: name,
                t: p.t,
                seed,
                gamma1: g.gamma[0],
                gamma2: g.gamma[1],
                gamma3: g.gamma[2],
                gamma4: g.gamma[3],
                gamma5: g.gamma[4],
                gamma6: g.gamma[5],
                se1: g.std_error[0],
                se2: g.std_error[1],
                se3: g.std_error[2],
                se4: g.std_error[3],
                se5: g.std_error[4],
                se6: g.std_error[5],
                variance_used: g.variance_used,
                fourth_moment_used: g.fourth_moment_used,
                fourth_moment_bound: g.fourth_moment_bound,
                n_outer: g.n_outer,
                n_eta: g.n_eta,
            };
            buf = csv_rows(&[row]).map_err(|e| CliError::numeric("gammas")(e.into()))?;
        }
        Task::Bounds => {
            let Some(b) = &p.bounds else { return Ok(None) };
            write_bound_csv(&[b.csv_row(name, p.t, seed)], &mut buf).map_err(CliError::numeric("bounds"))?;
        }
        Task::Stabilization => {
            let Some(s) = &p.stabilization else { return Ok(None) };
            let row = StabilizationRow {
                functional: name,
                t: p.t,
                seed,
                c1: s.c1,
                c2: s.c2,
                p1: s.p1,
                p2: s.p2,
                m_hat: s.m_hat,
                double_nested: s.prob_integrals.double_nested,
                single: s.prob_integrals.single,
                pair: s.prob_integrals.pair,
                gamma_f: s.gamma_f,
                variance_used: s.variance_used,
                dw_bound: s.dw_bound,
                dk_bound: s.dk_bound,
                n_probes: s.n_probes,
            };
            buf = csv_rows(&[row]).map_err(|e| CliError::numeric("stabilization")(e.into()))?;
        }
        Task::Clt => {
            let Some(d) = p.distances else { return Ok(None) };
            let row = CltRow {
                functional: name.to_string(),
                t: p.t,
                n: d.n,
                d_k: d.d_k,
                d_w: d.d_w,
                dkw_band: d.dkw_band,
                dw_bound: p.bounds.as_ref().map(|b| b.dw_bound),
                dk_bound: p.bounds.as_ref().map(|b| b.dk_bound),
                variance: p.standardization.map_or(f64::NAN, |s| s.variance),
                seed,
            };
            write_clt_csv(&[row], &mut buf).map_err(CliError::numeric("clt"))?;
        }
        Task::Rate => return Ok(None),
    }
    Ok(Some(buf))
}

fn write_file(dir: &Path, name: String, header: &str, body: &[u8]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut bytes = Vec::with_capacity(header.len() + body.len());
    bytes.extend_from_slice(header.as_bytes());
    bytes.extend_from_slice(body);
    std::fs::write(&path, bytes).map_err(|source| CliError::Output {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes every artifact and returns the paths in write order:
/// `{functional}_t{t}_seed{seed}_{task}.csv` per grid point and task,
/// `{functional}_seed{seed}_rate.csv` for the rate fit, and
/// `{functional}_t{t}_seed{seed}.json` / `{functional}_seed{seed}_rate.json`.
pub fn write_all(cfg: &ExperimentConfig, hash: &str, results: &RunResults) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.clone(),
        source,
    })?;
    let meta = Metadata {
        tool: "pstein",
        version: VERSION,
        config_sha256: hash,
        seed: results.seed,
    };
    let comment = meta.comment();
    let name = results.functional;
    let seed = results.seed;
    let tasks = cfg.expanded_tasks();
    let mut written = Vec::new();
    for fmt in &cfg.output.formats {
        for p in &results.points {
            let stem = format!("{name}_t{}_seed{seed}", p.t);
            match fmt {
                Format::Csv => {
                    for &task in &tasks {
                        if let Some(body) = point_csv(task, p, name, seed)? {
                            written.push(write_file(dir, format!("{stem}_{}.csv", task.name()), &comment, &body)?);
                        }
                    }
                }
                Format::Json => {
                    let doc = serde_json::json!({ "metadata": meta, "functional": name, "results": p });
                    let body = serde_json::to_vec_pretty(&doc).expect("results serialise");
                    written.push(write_file(dir, format!("{stem}.json"), "", &body)?);
                }
            }
        }
        if let Some(fit) = &results.rate {
            match fmt {
                Format::Csv => {
                    let row = RateRow {
                        functional: name,
                        seed,
                        slope: fit.slope,
                        slope_se: fit.slope_se,
                        intercept: fit.intercept,
                        r_squared: fit.r_squared,
                        n_used: fit.n_used,
                    };
                    let body = csv_rows(&[row]).map_err(|e| CliError::numeric("rate")(e.into()))?;
                    written.push(write_file(dir, format!("{name}_seed{seed}_rate.csv"), &comment, &body)?);
                }
                Format::Json => {
                    let doc = serde_json::json!({ "metadata": meta, "functional": name, "rate": fit });
                    let body = serde_json::to_vec_pretty(&doc).expect("rate serialises");
                    written.push(write_file(dir, format!("{name}_seed{seed}_rate.json"), "", &body)?);
                }
            }
        }
    }
    Ok(written)
}
