use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, Point2, Triangulation};

use super::{canonical_sum, FunctionalSpec};
use crate::error::{Error, Result};
use crate::point_process::{PointConfiguration, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoronoiStatistic {
    /// Total length of Voronoi edges clipped to the observation window.
    EdgeLength,
    /// Number of Voronoi vertices inside the observation window.
    VertexCount,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoronoiParams {
    pub observation_window: Window,
    pub statistic: VoronoiStatistic,
}

/// Padding `multiple · t^{-1/2} · max(ln t, 1)` for planar Voronoi sampling.
pub fn default_voronoi_padding(t: f64, multiple: f64) -> f64 {
    multiple * t.powf(-0.5) * t.ln().max(1.0)
}

/// Clips `origin + s·dir`, `s ∈ [s0, s1]`, to the box and returns the clipped length.
fn clipped_length(origin: [f64; 2], dir: [f64; 2], mut s0: f64, mut s1: f64, window: &Window) -> f64 {
    let lo = window.lower();
    let hi = window.upper();
    for j in 0..2 {
        if dir[j] == 0.0 {
            if origin[j] < lo[j] || origin[j] > hi[j] {
                return 0.0;
            }
            continue;
        }
        let a = (lo[j] - origin[j]) / dir[j];
        let b = (hi[j] - origin[j]) / dir[j];
        let (enter, leave) = if a < b { (a, b) } else { (b, a) };
        s0 = s0.max(enter);
        s1 = s1.min(leave);
        if s0 >= s1 {
            return 0.0;
        }
    }
    (s1 - s0) * dir[0].hypot(dir[1])
}

fn triangulate(config: &PointConfiguration) -> Option<DelaunayTriangulation<Point2<f64>>> {
    let sorted = config.canonicalized();
    let pts: Vec<Point2<f64>> = (0..sorted.len())
        .map(|i| {
            let p = sorted.loc(i);
            Point2::new(p[0], p[1])
        })
        .collect();
    DelaunayTriangulation::bulk_load(pts).ok()
}

/// Evaluates the statistic for the tessellation generated by every point of
/// `config`, measured inside `window`. Returns `None` when there are fewer
/// than two generators.
pub fn voronoi_measure(config: &PointConfiguration, window: &Window, statistic: VoronoiStatistic) -> Result<Option<f64>> {
    if config.dim() != 2 || window.dim() != 2 {
        return Err(Error::Domain("Voronoi statistics are planar only".into()));
    }
    if config.len() < 2 {
        return Ok(None);
    }
    let tri = triangulate(config).ok_or_else(|| Error::Domain("triangulation failed".into()))?;
    let value = match statistic {
        VoronoiStatistic::VertexCount => tri
            .inner_faces()
            .filter(|f| {
                let c = f.circumcenter();
                window.contains(&[c.x, c.y])
            })
            .count() as f64,
        VoronoiStatistic::EdgeLength => {
            let mut lengths = Vec::with_capacity(tri.num_undirected_edges());
            for edge in tri.undirected_edges() {
                let e = edge.as_directed();
                let [p, q] = e.positions();
                let d = [q.x - p.x, q.y - p.y];
                // bisector direction: right-hand normal of p→q
                let normal = [d[1], -d[0]];
                let left = e.face().as_inner().map(|f| f.circumcenter());
                let right = e.rev().face().as_inner().map(|f| f.circumcenter());
                let len = match (left, right) {
                    (Some(a), Some(b)) => {
                        clipped_length([a.x, a.y], [b.x - a.x, b.y - a.y], 0.0, 1.0, window)
                    }
                    // ray from the inner circumcentre towards the outer side
                    (Some(a), None) => clipped_length([a.x, a.y], normal, 0.0, f64::INFINITY, window),
                    (None, Some(b)) => {
                        clipped_length([b.x, b.y], [-normal[0], -normal[1]], 0.0, f64::INFINITY, window)
                    }
                    (None, None) => {
                        let m = [(p.x + q.x) / 2.0, (p.y + q.y) / 2.0];
                        clipped_length(m, normal, f64::NEG_INFINITY, f64::INFINITY, window)
                    }
                };
                lengths.push(len);
            }
            canonical_sum(lengths)
        }
    };
    Ok(Some(value))
}

/// Planar Voronoi edge length or vertex count within the observation
/// window, computed from the Delaunay dual of all sampled generators.
pub fn voronoi_statistic(params: VoronoiParams) -> Result<FunctionalSpec> {
    if params.observation_window.dim() != 2 {
        return Err(Error::Domain("Voronoi statistics require d = 2".into()));
    }
    let name = match params.statistic {
        VoronoiStatistic::EdgeLength => "voronoi2d(edge_length)",
        VoronoiStatistic::VertexCount => "voronoi2d(vertex_count)",
    };
    let VoronoiParams {
        observation_window,
        statistic,
    } = params;
    Ok(FunctionalSpec::with_flag(name, move |config, flag: &AtomicU64| {
        match voronoi_measure(config, &observation_window, statistic) {
            Ok(Some(v)) => v,
            _ => {
                flag.fetch_add(1, Ordering::Relaxed);
                0.0
            }
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::Point;

    fn config(pts: &[[f64; 2]]) -> PointConfiguration {
        let w = Window::new(vec![-5.0, -5.0], vec![5.0, 5.0]).unwrap();
        let pts: Vec<Point> = pts.iter().map(|p| Point::new(p.to_vec())).collect();
        PointConfiguration::from_points(w, &pts).unwrap()
    }

    fn unit() -> Window {
        Window::unit(2).unwrap()
    }

    #[test]
    fn two_generators_give_one_bisector() {
        let c = config(&[[0.25, 0.5], [0.75, 0.5]]);
        let v = voronoi_measure(&c, &unit(), VoronoiStatistic::EdgeLength).unwrap().unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_generators_one_vertex() {
        let c = config(&[[0.2, 0.2], [0.8, 0.3], [0.5, 0.9]]);
        let v = voronoi_measure(&c, &unit(), VoronoiStatistic::VertexCount).unwrap().unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn symmetric_triangle_edge_length() {
        // circumcentre (0.5, 0.625): one ray up to y = 1, two rays along (∓1, -0.5) to the sides
        let c = config(&[[0.5, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let v = voronoi_measure(&c, &unit(), VoronoiStatistic::EdgeLength).unwrap().unwrap();
        let expected = 0.375 + 2.0 * 0.5 * 1.25f64.sqrt();
        assert!((v - expected).abs() < 1e-12, "{v}");
    }

    #[test]
    fn collinear_generators() {
        let c = config(&[[0.1, 0.5], [0.3, 0.5], [0.9, 0.5]]);
        let v = voronoi_measure(&c, &unit(), VoronoiStatistic::EdgeLength).unwrap().unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let n = voronoi_measure(&c, &unit(), VoronoiStatistic::VertexCount).unwrap().unwrap();
        assert_eq!(n, 0.0);
    }

    #[test]
    fn single_generator_flags() {
        let f = voronoi_statistic(VoronoiParams {
            observation_window: unit(),
            statistic: VoronoiStatistic::EdgeLength,
        })
        .unwrap();
        assert_eq!(f.eval(&config(&[[0.5, 0.5]])), 0.0);
        assert_eq!(f.degenerate_evaluations(), 1);
    }

    #[test]
    fn rejects_non_planar() {
        let w = Window::unit(3).unwrap();
        assert!(voronoi_statistic(VoronoiParams {
            observation_window: w,
            statistic: VoronoiStatistic::EdgeLength
        })
        .is_err());
    }

    #[test]
    fn padding_formula() {
        assert!((default_voronoi_padding(1.0, 5.0) - 5.0).abs() < 1e-12);
        let t: f64 = 100.0;
        assert!((default_voronoi_padding(t, 2.0) - 2.0 * t.ln() / 10.0).abs() < 1e-12);
    }
}
