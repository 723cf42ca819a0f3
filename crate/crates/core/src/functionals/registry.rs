//! Name-addressable functional families for experiment configs, e.g.
//! `{"name":"knn","k":1,"alpha":1.0}`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    default_voronoi_padding, first_chaos, knn_edge_power, shot_noise_functional, voronoi_statistic, AnalyticMoments,
    Compensator, FunctionalSpec, Kernel, KnnParams, Phi, ShotNoiseParams, VoronoiParams, VoronoiStatistic,
};
use crate::error::{Error, Result};
use crate::point_process::{IntensityModel, MarkMeasure, Window};

fn one() -> f64 {
    1.0
}
fn neg_half() -> f64 {
    -0.5
}
fn one_usize() -> usize {
    1
}
fn five() -> f64 {
    5.0
}
fn tenth() -> f64 {
    0.1
}
fn thirty() -> f64 {
    30.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelConfig {
    /// `1{x ≥ 0} e^{-rate·x}` on the line.
    Ou {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "thirty")]
        cutoff: f64,
    },
    /// Indicator of a centred ball.
    Ball {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "one_usize")]
        dim: usize,
    },
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig::Ou { rate: 1.0, cutoff: 30.0 }
    }
}

impl KernelConfig {
    pub fn build(&self) -> Result<Kernel> {
        match *self {
            KernelConfig::Ou { rate, cutoff } => Kernel::ou(rate, cutoff),
            KernelConfig::Ball { radius, dim } => Kernel::ball(radius, dim),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiConfig {
    Identity,
    #[default]
    RPlusSin,
    Square,
    Constant {
        value: f64,
    },
}

impl PhiConfig {
    pub fn build(&self) -> Phi {
        match *self {
            PhiConfig::Identity => Phi::identity(),
            PhiConfig::RPlusSin => Phi::r_plus_sin(),
            PhiConfig::Square => Phi::square(),
            PhiConfig::Constant { value } => Phi::constant(value),
        }
    }
}

/// A functional family indexed by the intensity parameter `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FunctionalConfig {
    /// `f ≡ amplitude · t^{exponent}` on the window, intensity `t`.
    FirstChaos {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "neg_half")]
        exponent: f64,
    },
    /// k-NN edge-power sum on the window, multiplied by `t^{scale_exponent}`
    /// (default `alpha/d`).
    Knn {
        #[serde(default = "one_usize")]
        k: usize,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default)]
        scale_exponent: Option<f64>,
    },
    /// Planar Voronoi statistic observed in the window, generators sampled on a
    /// padded box. Edge length is multiplied by `t^{scale_exponent}` (default 1/2).
    #[serde(rename = "voronoi2d")]
    Voronoi2d {
        #[serde(default = "edge_length")]
        statistic: VoronoiStatistic,
        #[serde(default = "five")]
        padding_multiple: f64,
        #[serde(default)]
        scale_exponent: Option<f64>,
    },
    /// Moving-average shot noise integrated over `W_t = t^{1/d} · window`,
    /// with fixed spatial intensity.
    ShotNoise {
        #[serde(default)]
        kernel: KernelConfig,
        #[serde(default)]
        phi: PhiConfig,
        #[serde(default = "tenth")]
        grid_step: f64,
        #[serde(default = "one")]
        intensity: f64,
        #[serde(default)]
        compensator: Compensator,
    },
}

fn edge_length() -> VoronoiStatistic {
    VoronoiStatistic::EdgeLength
}

impl FunctionalConfig {
    pub fn name(&self) -> &'static str {
        match self {
            FunctionalConfig::FirstChaos { .. } => "first_chaos",
            FunctionalConfig::Knn { .. } => "knn",
            FunctionalConfig::Voronoi2d { .. } => "voronoi2d",
            FunctionalConfig::ShotNoise { .. } => "shot_noise",
        }
    }

    /// Instantiates the family member at `t` on the base `window`.
    pub fn build(&self, t: f64, window: &Window, marks: &MarkMeasure) -> Result<(FunctionalSpec, IntensityModel)> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidModel(format!("t must be positive, got {t}")));
        }
        match self {
            FunctionalConfig::FirstChaos { amplitude, exponent } => {
                let c = amplitude * t.powf(*exponent);
                let mass = t * window.volume();
                let spec = first_chaos(Arc::new(move |_| c), c * mass).with_moments(AnalyticMoments {
                    mean: 0.0,
                    variance: c * c * mass,
                    standardized_fourth: Some(3.0 + 1.0 / mass),
                });
                Ok((spec, IntensityModel::unmarked(window.clone(), t)?))
            }
            FunctionalConfig::Knn { k, alpha, scale_exponent } => {
                let base = knn_edge_power(KnnParams {
                    k: *k,
                    alpha: *alpha,
                    observation_window: window.clone(),
                })?;
                let e = scale_exponent.unwrap_or(alpha / window.dim() as f64);
                let spec = if e == 0.0 { base } else { base.affine(t.powf(e), 0.0) };
                Ok((spec, IntensityModel::unmarked(window.clone(), t)?))
            }
            FunctionalConfig::Voronoi2d {
                statistic,
                padding_multiple,
                scale_exponent,
            } => {
                if !(*padding_multiple >= 0.0) {
                    return Err(Error::Domain("padding_multiple must be non-negative".into()));
                }
                let base = voronoi_statistic(VoronoiParams {
                    observation_window: window.clone(),
                    statistic: *statistic,
                })?;
                let default_e = match statistic {
                    VoronoiStatistic::EdgeLength => 0.5,
                    VoronoiStatistic::VertexCount => 0.0,
                };
                let e = scale_exponent.unwrap_or(default_e);
                let pad = default_voronoi_padding(t, *padding_multiple);
                let spec = if e == 0.0 { base } else { base.affine(t.powf(e), 0.0) };
                let spec = spec.with_padding(pad);
                let sampling = if pad > 0.0 { window.dilate(pad)? } else { window.clone() };
                Ok((spec, IntensityModel::unmarked(sampling, t)?))
            }
            FunctionalConfig::ShotNoise {
                kernel,
                phi,
                grid_step,
                intensity,
                compensator,
            } => {
                let kernel = kernel.build()?;
                let scale = t.powf(1.0 / window.dim() as f64);
                let rho = Window::new(
                    window.lower().iter().map(|v| v * scale).collect(),
                    window.upper().iter().map(|v| v * scale).collect(),
                )?;
                let pad = kernel.truncation_radius;
                let spec = shot_noise_functional(ShotNoiseParams {
                    kernel,
                    phi: phi.build(),
                    rho_window: rho.clone(),
                    grid_step: *grid_step,
                    marks: marks.clone(),
                    intensity: *intensity,
                    compensator: *compensator,
                })?;
                let model = IntensityModel::new(rho.dilate(pad)?, *intensity, marks.clone())?;
                Ok((spec, model))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSchema {
    pub name: &'static str,
    pub kind: &'static str,
    pub default: serde_json::Value,
    pub description: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalSchema {
    pub name: &'static str,
    pub description: &'static str,
    pub params: Vec<ParamSchema>,
}

/// A named functional configuration loaded from a plugin directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub preset: String,
    pub functional: FunctionalConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Listing {
    pub functionals: Vec<FunctionalSchema>,
    pub extensions: Vec<Preset>,
}

fn param(name: &'static str, kind: &'static str, default: serde_json::Value, description: &'static str) -> ParamSchema {
    ParamSchema {
        name,
        kind,
        default,
        description,
    }
}

/// Built-in functional families and their parameters.
pub fn schemas() -> Vec<FunctionalSchema> {
    use serde_json::json;
    vec![
        FunctionalSchema {
            name: "first_chaos",
            description: "compensated linear statistic with constant kernel amplitude*t^exponent",
            params: vec![
                param("amplitude", "real", json!(1.0), "kernel amplitude"),
                param("exponent", "real", json!(-0.5), "power of t in the kernel"),
            ],
        },
        FunctionalSchema {
            name: "knn",
            description: "sum of alpha-th powers of k-nearest-neighbour graph edge lengths",
            params: vec![
                param("k", "integer >= 1", json!(1), "number of neighbours"),
                param("alpha", "real >= 0", json!(1.0), "edge length exponent"),
                param("scale_exponent", "real | null", json!(null), "multiply by t^e (default alpha/d)"),
            ],
        },
        FunctionalSchema {
            name: "voronoi2d",
            description: "planar Voronoi edge length or vertex count inside the window",
            params: vec![
                param("statistic", "edge_length | vertex_count", json!("edge_length"), "measured statistic"),
                param("padding_multiple", "real >= 0", json!(5.0), "padding = multiple * t^-1/2 * max(ln t, 1)"),
                param("scale_exponent", "real | null", json!(null), "multiply by t^e (default 1/2 for edge length)"),
            ],
        },
        FunctionalSchema {
            name: "shot_noise",
            description: "integral of phi(X) over t^(1/d) * window for a moving-average shot-noise field",
            params: vec![
                param("kernel", "{kind: ou, rate, cutoff} | {kind: ball, radius, dim}", json!({"kind": "ou", "rate": 1.0, "cutoff": 30.0}), "moving-average kernel"),
                param("phi", "{kind: identity | r_plus_sin | square | constant, value}", json!({"kind": "r_plus_sin"}), "outer non-linearity"),
                param("grid_step", "real > 0", json!(0.1), "midpoint grid spacing"),
                param("intensity", "real > 0", json!(1.0), "spatial intensity of the Poisson process"),
                param("compensator", "analytic | quadrature", json!("analytic"), "how the kernel integral is obtained"),
            ],
        },
    ]
}

/// Reads every `*.json` preset in `dir`. A missing directory yields no presets.
pub fn load_presets(dir: &Path) -> Result<Vec<Preset>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let text = std::fs::read_to_string(&p)?;
        out.push(serde_json::from_str(&text)?);
    }
    Ok(out)
}

pub fn listing(plugin_dir: Option<&Path>) -> Result<Listing> {
    let extensions = match plugin_dir {
        Some(d) => load_presets(d)?,
        None => Vec::new(),
    };
    Ok(Listing {
        functionals: schemas(),
        extensions,
    })
}

pub fn listing_text(listing: &Listing) -> String {
    let mut s = String::new();
    for f in &listing.functionals {
        s.push_str(&format!("{}: {}\n", f.name, f.description));
        for p in &f.params {
            s.push_str(&format!("  {} ({}) default {}: {}\n", p.name, p.kind, p.default, p.description));
        }
    }
    s.push_str("extensions:\n");
    for e in &listing.extensions {
        s.push_str(&format!("  {} -> {}\n", e.preset, e.functional.name()));
    }
    s
}
