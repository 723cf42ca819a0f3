use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{FourthMomentSource, GammaEstimates};
use crate::error::Result;

/// An empirical distance with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// γ₁ + γ₂ + γ₃.
    pub dw_bound: f64,
    pub dw_bound_se: f64,
    /// γ₁ + … + γ₆.
    pub dk_bound: f64,
    pub dk_bound_se: f64,
    pub fourth_moment_bound: f64,
    pub components: GammaEstimates,
    pub empirical_dw: Option<Measured>,
    pub empirical_dk: Option<Measured>,
}

pub fn assemble_bounds(g: &GammaEstimates) -> BoundReport {
    let quad = |ks: &[usize]| ks.iter().map(|&k| g.std_error[k].powi(2)).sum::<f64>().sqrt();
    let dw = g.gamma[0] + g.gamma[1] + g.gamma[2];
    let dk = dw + g.gamma[3] + g.gamma[4] + g.gamma[5];
    BoundReport {
        dw_bound: dw,
        dw_bound_se: quad(&[0, 1, 2]),
        dk_bound: dk,
        dk_bound_se: quad(&[0, 1, 2, 3, 4, 5]),
        fourth_moment_bound: g.fourth_moment_bound,
        components: g.clone(),
        empirical_dw: None,
        empirical_dk: None,
    }
}

/// Outcome of a domination check `empirical ≤ bound + k · SE`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub dw_holds: bool,
    pub dk_holds: bool,
    pub dw_slack: f64,
    pub dk_slack: f64,
}

impl BoundReport {
    pub fn with_empirical(mut self, dw: Measured, dk: Measured) -> Self {
        self.empirical_dw = Some(dw);
        self.empirical_dk = Some(dk);
        self
    }

    /// Checks the empirical distances against the bounds with `k` combined
    /// standard errors of slack. `None` until empirical values are attached.
    pub fn domination(&self, k: f64) -> Option<Domination> {
        let (dw, dk) = (self.empirical_dw?, self.empirical_dk?);
        let dw_slack = k * dw.std_error.hypot(self.dw_bound_se);
        let dk_slack = k * dk.std_error.hypot(self.dk_bound_se);
        Some(Domination {
            dw_holds: dw.value <= self.dw_bound + dw_slack,
            dk_holds: dk.value <= self.dk_bound + dk_slack,
            dw_slack,
            dk_slack,
        })
    }

    pub fn csv_row(&self, functional: &str, t: f64, seed: u64) -> BoundRow {
        let g = &self.components;
        BoundRow {
            functional: functional.to_string(),
            t,
            seed,
            gamma1: g.gamma[0],
            gamma2: g.gamma[1],
            gamma3: g.gamma[2],
            gamma4: g.gamma[3],
            gamma5: g.gamma[4],
            gamma6: g.gamma[5],
            dw_bound: self.dw_bound,
            dw_bound_se: self.dw_bound_se,
            dk_bound: self.dk_bound,
            dk_bound_se: self.dk_bound_se,
            fourth_moment_bound: self.fourth_moment_bound,
            fourth_moment_source: g.fourth_moment_source,
            variance_used: g.variance_used,
            empirical_dw: self.empirical_dw.map(|m| m.value),
            empirical_dk: self.empirical_dk.map(|m| m.value),
            n_outer: g.n_outer,
            n_eta: g.n_eta,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Flat CSV form of a [`BoundReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub functional: String,
    pub t: f64,
    pub seed: u64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub gamma5: f64,
    pub gamma6: f64,
    pub dw_bound: f64,
    pub dw_bound_se: f64,
    pub dk_bound: f64,
    pub dk_bound_se: f64,
    pub fourth_moment_bound: f64,
    pub fourth_moment_source: FourthMomentSource,
    pub variance_used: f64,
    pub empirical_dw: Option<f64>,
    pub empirical_dk: Option<f64>,
    pub n_outer: usize,
    pub n_eta: usize,
}

pub fn write_bound_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
