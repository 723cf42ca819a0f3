use serde::{Deserialize, Serialize};

use super::{MarkMeasure, Window};
use crate::error::{Error, Result};

/// Intensity measure `t · Lebesgue|_window ⊗ ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityModel {
    pub window: Window,
    pub t: f64,
    #[serde(default)]
    pub marks: MarkMeasure,
}

impl IntensityModel {
    pub fn new(window: Window, t: f64, marks: MarkMeasure) -> Result<Self> {
        let m = Self { window, t, marks };
        m.validate()?;
        Ok(m)
    }

    pub fn unmarked(window: Window, t: f64) -> Result<Self> {
        Self::new(window, t, MarkMeasure::None)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidModel(format!("intensity must be finite and non-negative, got {}", self.t)));
        }
        self.marks.validate()?;
        if !self.expected_count().is_finite() {
            return Err(Error::InvalidModel("expected point count is not finite".into()));
        }
        Ok(())
    }

    /// λ(X) = t · volume · ν(R), the expected number of points.
    pub fn expected_count(&self) -> f64 {
        self.t * self.window.volume() * self.marks.total_mass()
    }

    /// Total mass of the intensity measure; the importance weight of a point
    /// drawn from the normalised measure.
    pub fn lambda_mass(&self) -> f64 {
        self.expected_count()
    }

    /// Same model with intensity `factor · t`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            window: self.window.clone(),
            t: self.t * factor,
            marks: self.marks.clone(),
        }
    }
}
