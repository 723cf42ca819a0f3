use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lower, upper]` in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WindowBounds", into = "WindowBounds")]
pub struct Window {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WindowBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<WindowBounds> for Window {
    type Error = Error;
    fn try_from(b: WindowBounds) -> Result<Self> {
        Window::new(b.lower, b.upper)
    }
}

impl From<Window> for WindowBounds {
    fn from(w: Window) -> Self {
        WindowBounds {
            lower: w.lower,
            upper: w.upper,
        }
    }
}

impl Window {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidWindow("dimension must be positive".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidWindow(format!(
                "lower has {} coordinates, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() || l >= u {
                return Err(Error::InvalidWindow(format!(
                    "side {i} is degenerate: [{l}, {u}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim])
    }

    /// `volume^{1/d} [0,1]^d`, the cube anchored at the origin with the given volume.
    pub fn cube_with_volume(volume: f64, dim: usize) -> Result<Self> {
        if !(volume > 0.0) {
            return Err(Error::InvalidWindow(format!("volume must be positive, got {volume}")));
        }
        let side = volume.powf(1.0 / dim as f64);
        Self::new(vec![0.0; dim], vec![side; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn side(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// `self ⊂ other`.
    pub fn is_inside(&self, other: &Window) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|i| other.lower[i] <= self.lower[i] && self.upper[i] <= other.upper[i])
    }

    /// Box enlarged by `r` on every side.
    pub fn dilate(&self, r: f64) -> Result<Self> {
        Self::new(
            self.lower.iter().map(|l| l - r).collect(),
            self.upper.iter().map(|u| u + r).collect(),
        )
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.lower[i] + rng.random::<f64>() * self.side(i))
            .collect()
    }

    pub fn sample_uniform_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        for i in 0..self.dim() {
            out.push(self.lower[i] + rng.random::<f64>() * self.side(i));
        }
    }
}
