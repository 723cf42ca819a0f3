//! Independent brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use poisson_stein::exec::pairwise_sum;
use poisson_stein::functionals::{
    knn_edge_power, knn_graph_edges, knn_lists, voronoi_measure, FunctionalSpec, KnnParams, VoronoiStatistic,
};
use poisson_stein::malliavin::{diff1, diff2};
use poisson_stein::point_process::{Point, PointConfiguration, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// k nearest neighbours of every point by full sorting on `(d², index)`.
pub fn brute_knn_lists(coords: &[f64], dim: usize, k: usize) -> Vec<Vec<usize>> {
    let n = coords.len() / dim;
    (0..n)
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d2: f64 = (0..dim).map(|a| (coords[i * dim + a] - coords[j * dim + a]).powi(2)).sum();
                    (d2, j)
                })
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(k).map(|p| p.1).collect()
        })
        .collect()
}

/// Undirected k-NN edges `(i, j)` with `i < j`, sorted.
pub fn brute_knn_edges(coords: &[f64], dim: usize, k: usize) -> Vec<(usize, usize)> {
    let n = coords.len() / dim;
    let lists = brute_knn_lists(coords, dim, k);
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if lists[i].contains(&j) || lists[j].contains(&i) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Clips a convex polygon to the half-plane `{p : a·p ≤ b}`.
fn clip(poly: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    let side = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - b;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (sp, sq) = (side(&p), side(&q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let u = sp / (sp - sq);
            out.push([p[0] + u * (q[0] - p[0]), p[1] + u * (q[1] - p[1])]);
        }
    }
    out
}

fn perimeter(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 2 {
        return 0.0;
    }
    (0..poly.len())
        .map(|i| {
            let p = poly[i];
            let q = poly[(i + 1) % poly.len()];
            (q[0] - p[0]).hypot(q[1] - p[1])
        })
        .sum()
}

/// Total Voronoi edge length inside a rectangle: every cell is the window
/// cut by all bisector half-planes; interior edges are shared by two cells
/// and the window boundary is covered once.
pub fn half_plane_voronoi_length(generators: &[[f64; 2]], lower: [f64; 2], upper: [f64; 2]) -> f64 {
    let rect = vec![
        [lower[0], lower[1]],
        [upper[0], lower[1]],
        [upper[0], upper[1]],
        [lower[0], upper[1]],
    ];
    let mut total = 0.0;
    for (i, g) in generators.iter().enumerate() {
        let mut cell = rect.clone();
        for (j, h) in generators.iter().enumerate() {
            if i == j || cell.is_empty() {
                continue;
            }
            let a = [h[0] - g[0], h[1] - g[1]];
            let b = (a[0] * (h[0] + g[0]) + a[1] * (h[1] + g[1])) / 2.0;
            cell = clip(&cell, a, b);
        }
        total += perimeter(&cell);
    }
    let boundary = 2.0 * ((upper[0] - lower[0]) + (upper[1] - lower[1]));
    (total - boundary) / 2.0
}

pub fn random_config<R: Rng>(rng: &mut R, window: &Window, n: usize) -> PointConfiguration {
    let pts: Vec<Point> = (0..n).map(|_| Point::new(window.sample_uniform(rng))).collect();
    PointConfiguration::from_points(window.clone(), &pts).unwrap()
}

/// Number of random configurations on which the k-NN lists, edge set or
/// edge-power sums disagree with brute force.
pub fn knn_oracle_mismatches(n_configs: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..n_configs {
        let dim = rng.random_range(1..=3);
        let k = rng.random_range(1..=4);
        let n = rng.random_range(k + 1..=120);
        let window = Window::unit(dim).unwrap();
        let config = random_config(&mut rng, &window, n).canonicalized();
        let coords = config.coords();
        let brute_edges = brute_knn_edges(coords, dim, k);
        let mut ok = knn_lists(coords, dim, k) == brute_knn_lists(coords, dim, k)
            && knn_graph_edges(coords, dim, k) == brute_edges;
        for alpha in [0.0, 1.0, 2.5] {
            let f = knn_edge_power(KnnParams {
                k,
                alpha,
                observation_window: window.clone(),
            })
            .unwrap();
            let terms: Vec<f64> = brute_edges
                .iter()
                .map(|&(i, j)| {
                    let d2: f64 = (0..dim).map(|a| (coords[i * dim + a] - coords[j * dim + a]).powi(2)).sum();
                    match alpha {
                        0.0 => 1.0,
                        1.0 => d2.sqrt(),
                        a => d2.sqrt().powf(a),
                    }
                })
                .collect();
            ok &= f.eval(&config) == pairwise_sum(&terms);
        }
        if !ok {
            bad += 1;
        }
    }
    bad
}

/// Largest relative deviation of the Voronoi edge length from the
/// half-plane oracle over random planar configurations with at most 50
/// generators, some of them outside the observation window.
pub fn voronoi_oracle_max_rel_err(n_configs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampling = Window::new(vec![-0.5, -0.5], vec![1.5, 1.5]).unwrap();
    let observe = Window::unit(2).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..n_configs {
        let n = rng.random_range(2..=50);
        let config = random_config(&mut rng, &sampling, n);
        let got = voronoi_measure(&config, &observe, VoronoiStatistic::EdgeLength).unwrap().unwrap();
        let gens: Vec<[f64; 2]> = (0..config.len()).map(|i| [config.loc(i)[0], config.loc(i)[1]]).collect();
        let want = half_plane_voronoi_length(&gens, [0.0, 0.0], [1.0, 1.0]);
        let err = (got - want).abs() / want.abs().max(1e-300);
        worst = worst.max(if want == 0.0 && got == 0.0 { 0.0 } else { err });
    }
    worst
}

/// Number of random queries where `diff2(μ, x1, x2)` differs in any bit from
/// `diff1(μ + δ_{x2}, x1) − diff1(μ, x1)`.
pub fn diff2_identity_mismatches(functionals: &[FunctionalSpec], n_queries: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = Window::unit(2).unwrap();
    let mut bad = 0;
    for q in 0..n_queries {
        let f = &functionals[q % functionals.len()];
        let n = rng.random_range(2..=60);
        let base = random_config(&mut rng, &window, n);
        let x1 = Point::new(window.sample_uniform(&mut rng));
        let x2 = Point::new(window.sample_uniform(&mut rng));
        let lhs = diff2(f, &base, &x1, &x2).unwrap();
        let rhs = diff1(f, &base.add_points(std::slice::from_ref(&x2)).unwrap(), &x1).unwrap() - diff1(f, &base, &x1).unwrap();
        if lhs.to_bits() != rhs.to_bits() {
            bad += 1;
        }
    }
    bad
}
