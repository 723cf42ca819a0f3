use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AnalyticMoments, FunctionalSpec};
use crate::error::{Error, Result};
use crate::exec::pairwise_sum;
use crate::point_process::{MarkMeasure, PointConfiguration, Window};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type KernelEval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Moving-average kernel `f` with compact (truncated) support.
#[derive(Clone)]
pub struct Kernel {
    pub f: KernelEval,
    /// `f` is treated as 0 outside the ball of this radius.
    pub truncation_radius: f64,
    /// `∫ f(x) dx` when known in closed form.
    pub integral: Option<f64>,
    pub dim: usize,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("truncation_radius", &self.truncation_radius)
            .field("integral", &self.integral)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl Kernel {
    /// `f(x) = 1{x ≥ 0} e^{-rate·x}` on the line, truncated at `cutoff / rate`.
    pub fn ou(rate: f64, cutoff: f64) -> Result<Self> {
        if !(rate > 0.0 && cutoff > 0.0) {
            return Err(Error::Domain("OU kernel needs positive rate and cutoff".into()));
        }
        let r = cutoff / rate;
        Ok(Self {
            f: Arc::new(move |x: &[f64]| if x[0] >= 0.0 && x[0] <= r { (-rate * x[0]).exp() } else { 0.0 }),
            truncation_radius: r,
            integral: Some((1.0 - (-cutoff).exp()) / rate),
            dim: 1,
        })
    }

    /// Indicator of the centred ball of the given radius.
    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        if !(radius > 0.0) || dim == 0 {
            return Err(Error::Domain("ball kernel needs positive radius and dimension".into()));
        }
        let r2 = radius * radius;
        Ok(Self {
            f: Arc::new(move |x: &[f64]| if x.iter().map(|v| v * v).sum::<f64>() <= r2 { 1.0 } else { 0.0 }),
            truncation_radius: radius,
            integral: Some(crate::variance::unit_ball_volume(dim) * radius.powi(dim as i32)),
            dim,
        })
    }

    /// `∫ f` by the midpoint rule on `[-R, R]^d` with `per_axis` cells per axis.
    pub fn quadrature_integral(&self, per_axis: usize) -> f64 {
        let r = self.truncation_radius;
        let h = 2.0 * r / per_axis as f64;
        let total = per_axis.pow(self.dim as u32);
        let mut x = vec![0.0; self.dim];
        let mut terms = Vec::with_capacity(total);
        for code in 0..total {
            let mut rem = code;
            for xj in x.iter_mut() {
                *xj = -r + h * ((rem % per_axis) as f64 + 0.5);
                rem /= per_axis;
            }
            terms.push((self.f)(&x));
        }
        pairwise_sum(&terms) * h.powi(self.dim as i32)
    }
}

/// Outer non-linearity `φ` with its first two derivatives.
#[derive(Clone)]
pub struct Phi {
    pub name: String,
    pub value: ScalarFn,
    pub first: ScalarFn,
    pub second: ScalarFn,
}

impl fmt::Debug for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phi({})", self.name)
    }
}

impl Phi {
    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            value: Arc::new(|r| r),
            first: Arc::new(|_| 1.0),
            second: Arc::new(|_| 0.0),
        }
    }

    /// `φ(r) = r + sin r`.
    pub fn r_plus_sin() -> Self {
        Self {
            name: "r_plus_sin".into(),
            value: Arc::new(|r| r + r.sin()),
            first: Arc::new(|r| 1.0 + r.cos()),
            second: Arc::new(|r| -r.sin()),
        }
    }

    pub fn square() -> Self {
        Self {
            name: "square".into(),
            value: Arc::new(|r| r * r),
            first: Arc::new(|r| 2.0 * r),
            second: Arc::new(|_| 2.0),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            name: format!("constant({c})"),
            value: Arc::new(move |_| c),
            first: Arc::new(|_| 0.0),
            second: Arc::new(|_| 0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compensator {
    /// Use the kernel's closed-form integral.
    #[default]
    Analytic,
    /// Integrate the kernel numerically.
    Quadrature,
}

#[derive(Clone, Debug)]
pub struct ShotNoiseParams {
    pub kernel: Kernel,
    pub phi: Phi,
    /// Domain of the outer integral.
    pub rho_window: Window,
    pub grid_step: f64,
    pub marks: MarkMeasure,
    /// Intensity multiplier of the spatial coordinate.
    pub intensity: f64,
    pub compensator: Compensator,
}

struct Grid {
    lower: Vec<f64>,
    step: Vec<f64>,
    counts: Vec<usize>,
    cell_volume: f64,
}

impl Grid {
    fn new(window: &Window, h: f64) -> Result<Self> {
        let d = window.dim();
        let mut step = Vec::with_capacity(d);
        let mut counts = Vec::with_capacity(d);
        for i in 0..d {
            let n = (window.side(i) / h).round();
            if n < 1.0 {
                return Err(Error::Domain(format!(
                    "grid step {h} leaves no quadrature node along axis {i}"
                )));
            }
            counts.push(n as usize);
            step.push(window.side(i) / n);
        }
        let total: f64 = counts.iter().map(|&n| n as f64).product();
        if total > 5e7 {
            return Err(Error::Domain(format!("grid with {total} nodes is too fine")));
        }
        Ok(Self {
            lower: window.lower().to_vec(),
            cell_volume: step.iter().product(),
            step,
            counts,
        })
    }

    fn len(&self) -> usize {
        self.counts.iter().product()
    }

    fn node(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + self.step[axis] * (i as f64 + 0.5)
    }

    /// Node index range along `axis` within distance `r` of `x`.
    fn range(&self, axis: usize, x: f64, r: f64) -> Option<(usize, usize)> {
        let a = ((x - r - self.lower[axis]) / self.step[axis] - 0.5).ceil().max(0.0);
        let b = ((x + r - self.lower[axis]) / self.step[axis] - 0.5).floor();
        let b = b.min(self.counts[axis] as f64 - 1.0);
        if a > b {
            None
        } else {
            Some((a as usize, b as usize))
        }
    }
}

/// `F = Σ_i φ(X_{t_i}) · h^d` over midpoint-grid nodes `t_i` of the window,
/// with `X_t = Σ_{(u,x)∈η} u f(t − x) − intensity · ∫u ν(du) · ∫ f`.
/// Unmarked points carry `u = 1`.
pub fn shot_noise_functional(params: ShotNoiseParams) -> Result<FunctionalSpec> {
    let ShotNoiseParams {
        kernel,
        phi,
        rho_window,
        grid_step,
        marks,
        intensity,
        compensator,
    } = params;
    if !(grid_step > 0.0) {
        return Err(Error::Domain("grid step must be positive".into()));
    }
    if kernel.dim != rho_window.dim() {
        return Err(Error::Domain("kernel and window dimensions differ".into()));
    }
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::Domain("intensity must be positive".into()));
    }
    if !(kernel.truncation_radius > 0.0) {
        return Err(Error::Domain("truncation radius must be positive".into()));
    }
    marks.validate()?;
    let grid = Grid::new(&rho_window, grid_step)?;
    let kernel_integral = match (compensator, kernel.integral) {
        (Compensator::Analytic, Some(v)) => v,
        (Compensator::Analytic, None) => {
            return Err(Error::Precondition("kernel has no analytic integral".into()));
        }
        (Compensator::Quadrature, _) => {
            let per_axis = match kernel.dim {
                1 => 200_000,
                2 => 2_000,
                _ => 100,
            };
            kernel.quadrature_integral(per_axis)
        }
    };
    let mark_mean = if marks.is_marked() { marks.first_moment() } else { 1.0 };
    let compensation = intensity * mark_mean * kernel_integral;
    let name = format!("shot_noise({})", phi.name);
    let radius = kernel.truncation_radius;
    let constant_value = match phi.name.starts_with("constant") {
        true => Some((phi.value)(0.0) * rho_window.volume()),
        false => None,
    };
    let dim = kernel.dim;
    let f = kernel.f.clone();
    let value = phi.value.clone();
    let mut spec = FunctionalSpec::new(name, move |config: &PointConfiguration| {
        let n = grid.len();
        let mut field = vec![-compensation; n];
        let sorted = config.canonicalized();
        let mut offset = vec![0.0; dim];
        let mut ranges = Vec::with_capacity(dim);
        let mut idx = vec![0usize; dim];
        'points: for p in 0..sorted.len() {
            let x = sorted.loc(p);
            let u = sorted.mark(p).unwrap_or(1.0);
            ranges.clear();
            for (j, &xj) in x.iter().enumerate() {
                match grid.range(j, xj, radius) {
                    Some(r) => ranges.push(r),
                    None => continue 'points,
                }
            }
            for (j, r) in ranges.iter().enumerate() {
                idx[j] = r.0;
            }
            loop {
                let mut lin = 0;
                for j in (0..dim).rev() {
                    offset[j] = grid.node(j, idx[j]) - x[j];
                    lin = lin * grid.counts[j] + idx[j];
                }
                let k = f(&offset);
                if k != 0.0 {
                    field[lin] += u * k;
                }
                // odometer increment over the index box
                let mut j = 0;
                loop {
                    if j == dim {
                        continue 'points;
                    }
                    if idx[j] < ranges[j].1 {
                        idx[j] += 1;
                        break;
                    }
                    idx[j] = ranges[j].0;
                    j += 1;
                }
            }
        }
        let terms: Vec<f64> = field.iter().map(|&r| value(r)).collect();
        pairwise_sum(&terms) * grid.cell_volume
    })
    .with_padding(radius)
    .with_locality_hint(move |_, _| 2.0 * radius);
    if let Some(c) = constant_value {
        spec = spec.with_moments(AnalyticMoments {
            mean: c,
            variance: 0.0,
            standardized_fourth: None,
        });
    }
    Ok(spec)
}
