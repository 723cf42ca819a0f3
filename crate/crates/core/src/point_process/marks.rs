use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mark measure ν on the real line. `mass` is the total mass ν(R); the
/// sampler draws from the normalised measure ν/ν(R).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarkMeasure {
    /// Unmarked process. Acts as mass 1 and mark 1 wherever a mark is consumed.
    #[default]
    None,
    /// Finite sum of weighted atoms `(u_j, weight_j)`.
    Atoms { atoms: Vec<(f64, f64)> },
    Exponential { rate: f64, mass: f64 },
    Normal { mean: f64, sd: f64, mass: f64 },
    Uniform { low: f64, high: f64, mass: f64 },
}

impl MarkMeasure {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        match self {
            MarkMeasure::None => Ok(()),
            MarkMeasure::Atoms { atoms } => {
                if atoms.is_empty() {
                    return bad("atom list is empty".into());
                }
                for (u, w) in atoms {
                    if !u.is_finite() || !(w.is_finite() && *w > 0.0) {
                        return bad(format!("atom ({u}, {w}) needs a finite location and positive weight"));
                    }
                }
                Ok(())
            }
            MarkMeasure::Exponential { rate, mass } => {
                if !(*rate > 0.0 && rate.is_finite()) || !(*mass > 0.0 && mass.is_finite()) {
                    return bad(format!("exponential marks need rate > 0 and mass > 0, got rate={rate}, mass={mass}"));
                }
                Ok(())
            }
            MarkMeasure::Normal { mean, sd, mass } => {
                if !mean.is_finite() || !(*sd > 0.0 && sd.is_finite()) || !(*mass > 0.0 && mass.is_finite()) {
                    return bad(format!("normal marks need sd > 0 and mass > 0, got sd={sd}, mass={mass}"));
                }
                Ok(())
            }
            MarkMeasure::Uniform { low, high, mass } => {
                if !(low < high) || !low.is_finite() || !high.is_finite() || !(*mass > 0.0 && mass.is_finite()) {
                    return bad(format!("uniform marks need low < high and mass > 0, got [{low}, {high}], mass={mass}"));
                }
                Ok(())
            }
        }
    }

    pub fn is_marked(&self) -> bool {
        !matches!(self, MarkMeasure::None)
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            MarkMeasure::None => 1.0,
            MarkMeasure::Atoms { atoms } => atoms.iter().map(|(_, w)| w).sum(),
            MarkMeasure::Exponential { mass, .. }
            | MarkMeasure::Normal { mass, .. }
            | MarkMeasure::Uniform { mass, .. } => *mass,
        }
    }

    /// ∫ |u|^j ν(du).
    pub fn abs_moment(&self, j: f64) -> f64 {
        match self {
            MarkMeasure::None => 1.0,
            MarkMeasure::Atoms { atoms } => atoms.iter().map(|(u, w)| w * u.abs().powf(j)).sum(),
            MarkMeasure::Exponential { rate, mass } => {
                mass * statrs::function::gamma::gamma(j + 1.0) / rate.powf(j)
            }
            MarkMeasure::Uniform { low, high, mass } => {
                // ∫_a^b |u|^j du / (b - a)
                let anti = |x: f64| x.signum() * x.abs().powf(j + 1.0) / (j + 1.0);
                mass * (anti(*high) - anti(*low)) / (high - low)
            }
            MarkMeasure::Normal { mean, sd, mass } => {
                if *mean == 0.0 {
                    // E|Z|^j = 2^{j/2} Γ((j+1)/2) / √π
                    let g = statrs::function::gamma::gamma((j + 1.0) / 2.0);
                    mass * sd.powf(j) * 2f64.powf(j / 2.0) * g / std::f64::consts::PI.sqrt()
                } else {
                    mass * normal_abs_moment_quadrature(*mean, *sd, j)
                }
            }
        }
    }

    /// Signed first moment ∫ u ν(du); enters the shot-noise compensator.
    pub fn first_moment(&self) -> f64 {
        match self {
            MarkMeasure::None => 1.0,
            MarkMeasure::Atoms { atoms } => atoms.iter().map(|(u, w)| u * w).sum(),
            MarkMeasure::Exponential { rate, mass } => mass / rate,
            MarkMeasure::Normal { mean, mass, .. } => mass * mean,
            MarkMeasure::Uniform { low, high, mass } => mass * 0.5 * (low + high),
        }
    }

    /// Draws one mark from ν/ν(R); `None` for an unmarked process.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        match self {
            MarkMeasure::None => None,
            MarkMeasure::Atoms { atoms } => {
                let total = self.total_mass();
                let mut target = rng.random::<f64>() * total;
                for (u, w) in atoms {
                    if target < *w {
                        return Some(*u);
                    }
                    target -= w;
                }
                atoms.last().map(|(u, _)| *u)
            }
            MarkMeasure::Exponential { rate, .. } => {
                Some(Exp::new(*rate).expect("validated rate").sample(rng))
            }
            MarkMeasure::Normal { mean, sd, .. } => {
                Some(Normal::new(*mean, *sd).expect("validated sd").sample(rng))
            }
            MarkMeasure::Uniform { low, high, .. } => Some(low + rng.random::<f64>() * (high - low)),
        }
    }
}

/// E|X|^j for X ~ N(mean, sd²) by composite Gauss-Legendre quadrature on ±12 sd.
fn normal_abs_moment_quadrature(mean: f64, sd: f64, j: f64) -> f64 {
    let rule = crate::malliavin::Quadrature::gauss_legendre(20, 0.0, 1.0);
    let lo = mean - 12.0 * sd;
    let hi = mean + 12.0 * sd;
    // Split at 0 so the kink of |u|^j sits on a panel boundary.
    let mut breaks = vec![lo];
    if lo < 0.0 && 0.0 < hi {
        breaks.push(0.0);
    }
    breaks.push(hi);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let panels = 64;
        let h = (w[1] - w[0]) / panels as f64;
        for p in 0..panels {
            let a = w[0] + p as f64 * h;
            for (s, wt) in rule.nodes() {
                let u = a + s * h;
                let z = (u - mean) / sd;
                let dens = (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
                total += wt * h * u.abs().powf(j) * dens;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_moments() {
        let m = MarkMeasure::Atoms {
            atoms: vec![(-1.0, 0.5), (2.0, 0.25)],
        };
        m.validate().unwrap();
        assert_eq!(m.total_mass(), 0.75);
        assert_eq!(m.abs_moment(2.0), 0.5 + 1.0);
        assert_eq!(m.first_moment(), -0.5 + 0.5);
    }

    #[test]
    fn exponential_moments() {
        let m = MarkMeasure::Exponential { rate: 2.0, mass: 1.0 };
        assert!((m.abs_moment(1.0) - 0.5).abs() < 1e-12);
        assert!((m.abs_moment(2.0) - 0.5).abs() < 1e-12);
        assert!((m.abs_moment(3.0) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn normal_moments_quadrature_matches_closed_form() {
        let centred = MarkMeasure::Normal { mean: 0.0, sd: 1.5, mass: 2.0 };
        let q = 2.0 * normal_abs_moment_quadrature(0.0, 1.5, 3.0);
        assert!((centred.abs_moment(3.0) - q).abs() < 1e-9 * q);
        // E X^2 = mean^2 + sd^2 for the shifted case.
        let shifted = MarkMeasure::Normal { mean: 0.7, sd: 1.5, mass: 1.0 };
        assert!((shifted.abs_moment(2.0) - (0.49 + 2.25)).abs() < 1e-9);
    }

    #[test]
    fn uniform_abs_moment_straddling_zero() {
        let m = MarkMeasure::Uniform { low: -1.0, high: 3.0, mass: 1.0 };
        // (1/4)(∫_{-1}^0 |u| + ∫_0^3 u) = (0.5 + 4.5) / 4
        assert!((m.abs_moment(1.0) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(MarkMeasure::Atoms { atoms: vec![] }.validate().is_err());
        assert!(MarkMeasure::Atoms { atoms: vec![(1.0, 0.0)] }.validate().is_err());
        assert!(MarkMeasure::Exponential { rate: -1.0, mass: 1.0 }.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let m: MarkMeasure = serde_json::from_str(r#"{"kind":"atoms","atoms":[[1.0,0.5]]}"#).unwrap();
        assert_eq!(m, MarkMeasure::Atoms { atoms: vec![(1.0, 0.5)] });
        let n: MarkMeasure = serde_json::from_str(r#"{"kind":"none"}"#).unwrap();
        assert_eq!(n, MarkMeasure::None);
    }
}
