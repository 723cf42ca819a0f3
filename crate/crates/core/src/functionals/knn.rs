use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::FunctionalSpec;
use crate::error::{Error, Result};
use crate::exec::pairwise_sum;
use crate::point_process::{sq_dist, Point, PointConfiguration, Window};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    pub alpha: f64,
    pub observation_window: Window,
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be finite and non-negative, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Neighbour ordering key: squared distance, then index. Indices refer to the
/// caller's point order, which is canonical (lexicographic) everywhere in
/// this crate, so ties resolve by lexicographic point order.
#[derive(Clone, Copy, PartialEq)]
struct Key {
    d2: f64,
    idx: usize,
}

impl Key {
    fn less(&self, other: &Key) -> bool {
        match self.d2.total_cmp(&other.d2) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => self.idx < other.idx,
        }
    }
}

struct Best {
    k: usize,
    items: Vec<Key>,
}

impl Best {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, key: Key) {
        if self.items.len() == self.k {
            if !key.less(&self.items[self.k - 1]) {
                return;
            }
            self.items.pop();
        }
        let pos = self.items.iter().position(|e| key.less(e)).unwrap_or(self.items.len());
        self.items.insert(pos, key);
    }

    fn full(&self) -> bool {
        self.items.len() == self.k
    }

    fn worst(&self) -> f64 {
        self.items.last().map_or(f64::INFINITY, |e| e.d2)
    }
}

/// Uniform bucket grid over the bounding box of the points.
struct Grid<'a> {
    coords: &'a [f64],
    dim: usize,
    lo: Vec<f64>,
    cell: Vec<f64>,
    dims: Vec<usize>,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl<'a> Grid<'a> {
    fn new(coords: &'a [f64], dim: usize, k: usize) -> Self {
        let n = coords.len() / dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for i in 0..n {
            for j in 0..dim {
                let v = coords[i * dim + j];
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let spans: Vec<f64> = (0..dim).map(|j| (hi[j] - lo[j]).max(0.0)).collect();
        let positive: Vec<f64> = spans.iter().copied().filter(|s| *s > 0.0).collect();
        let eff_dim = positive.len().max(1);
        let vol: f64 = positive.iter().product::<f64>().max(f64::MIN_POSITIVE);
        let target = (vol * (k.max(1) as f64) / n.max(1) as f64).powf(1.0 / eff_dim as f64);
        let mut dims = Vec::with_capacity(dim);
        let mut cell = Vec::with_capacity(dim);
        for &s in &spans {
            let m = if s > 0.0 && target > 0.0 {
                ((s / target).floor() as usize).clamp(1, 4 * n.max(1))
            } else {
                1
            };
            dims.push(m);
            cell.push(if s > 0.0 { s / m as f64 } else { 1.0 });
        }
        let total: usize = dims.iter().product();
        let mut counts = vec![0usize; total + 1];
        let mut cell_of = Vec::with_capacity(n);
        for i in 0..n {
            let c = Self::cell_index(&coords[i * dim..(i + 1) * dim], &lo, &cell, &dims);
            cell_of.push(c);
            counts[c + 1] += 1;
        }
        for c in 0..total {
            counts[c + 1] += counts[c];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut items = vec![0usize; n];
        for (i, &c) in cell_of.iter().enumerate() {
            items[fill[c]] = i;
            fill[c] += 1;
        }
        Self {
            coords,
            dim,
            lo,
            cell,
            dims,
            start,
            items,
        }
    }

    fn axis_cell(v: f64, lo: f64, cell: f64, m: usize) -> usize {
        let c = ((v - lo) / cell).floor();
        if c <= 0.0 {
            0
        } else {
            (c as usize).min(m - 1)
        }
    }

    fn cell_index(x: &[f64], lo: &[f64], cell: &[f64], dims: &[usize]) -> usize {
        let mut idx = 0;
        for j in (0..x.len()).rev() {
            idx = idx * dims[j] + Self::axis_cell(x[j], lo[j], cell[j], dims[j]);
        }
        idx
    }

    /// k nearest points to `q`, skipping index `skip`.
    fn query(&self, q: &[f64], k: usize, skip: Option<usize>) -> Vec<Key> {
        let dim = self.dim;
        let home: Vec<isize> = (0..dim)
            .map(|j| Self::axis_cell(q[j], self.lo[j], self.cell[j], self.dims[j]) as isize)
            .collect();
        let min_cell = self.cell.iter().copied().fold(f64::INFINITY, f64::min);
        let max_ring = self.dims.iter().copied().max().unwrap_or(1) as isize;
        let mut best = Best::new(k);
        let mut offset = vec![0isize; dim];
        for r in 0..=max_ring {
            // enumerate the block [home - r, home + r], visiting only its shell
            let side = 2 * r + 1;
            let total = (side as usize).pow(dim as u32);
            for code in 0..total {
                let mut rem = code;
                let mut on_shell = false;
                let mut inside = true;
                for j in 0..dim {
                    let o = (rem % side as usize) as isize - r;
                    rem /= side as usize;
                    offset[j] = o;
                    if o.abs() == r {
                        on_shell = true;
                    }
                    let c = home[j] + o;
                    if c < 0 || c >= self.dims[j] as isize {
                        inside = false;
                    }
                }
                if !on_shell || !inside {
                    continue;
                }
                let mut idx = 0usize;
                for j in (0..dim).rev() {
                    idx = idx * self.dims[j] + (home[j] + offset[j]) as usize;
                }
                for &p in &self.items[self.start[idx]..self.start[idx + 1]] {
                    if Some(p) == skip {
                        continue;
                    }
                    let d2 = sq_dist(q, &self.coords[p * dim..(p + 1) * dim]);
                    best.offer(Key { d2, idx: p });
                }
            }
            // every unvisited point is at distance ≥ r · min_cell
            let bound = r as f64 * min_cell;
            if best.full() && best.worst() < bound * bound {
                break;
            }
        }
        best.items
    }
}

/// k nearest neighbours of every point (excluding itself), each list ordered
/// by distance then index. `coords` is flat with `dim` coordinates per point.
pub fn knn_lists(coords: &[f64], dim: usize, k: usize) -> Vec<Vec<usize>> {
    let n = coords.len() / dim;
    if n == 0 || k == 0 {
        return vec![Vec::new(); n];
    }
    let grid = Grid::new(coords, dim, k);
    (0..n)
        .map(|i| {
            grid.query(&coords[i * dim..(i + 1) * dim], k, Some(i))
                .into_iter()
                .map(|e| e.idx)
                .collect()
        })
        .collect()
}

/// Undirected edge set of the k-NN graph as sorted `(i, j)` pairs with `i < j`.
pub fn knn_graph_edges(coords: &[f64], dim: usize, k: usize) -> Vec<(usize, usize)> {
    let lists = knn_lists(coords, dim, k);
    let mut edges: Vec<(usize, usize)> = lists
        .iter()
        .enumerate()
        .flat_map(|(i, nn)| nn.iter().map(move |&j| (i.min(j), i.max(j))))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

fn edge_power_sum(coords: &[f64], dim: usize, edges: &[(usize, usize)], alpha: f64) -> f64 {
    let terms: Vec<f64> = edges
        .iter()
        .map(|&(i, j)| {
            if alpha == 0.0 {
                1.0
            } else {
                let d = sq_dist(&coords[i * dim..(i + 1) * dim], &coords[j * dim..(j + 1) * dim]).sqrt();
                if alpha == 1.0 {
                    d
                } else {
                    d.powf(alpha)
                }
            }
        })
        .collect();
    pairwise_sum(&terms)
}

/// `L^{(α)} = ½ Σ_{x≠y} 1{x ∈ N_k(y) or y ∈ N_k(x)} ‖x − y‖^α` over the points
/// in the observation window. Configurations with at most `k` points
/// evaluate to 0 and are counted by [`FunctionalSpec::degenerate_evaluations`].
pub fn knn_edge_power(params: KnnParams) -> Result<FunctionalSpec> {
    params.validate()?;
    let name = format!("knn(k={},alpha={})", params.k, params.alpha);
    let KnnParams {
        k,
        alpha,
        observation_window,
    } = params;
    let hint_k = k;
    let spec = FunctionalSpec::with_flag(name, move |config: &PointConfiguration, flag: &AtomicU64| {
        let inside = if config.window().is_inside(&observation_window) {
            config.canonicalized()
        } else {
            config
                .filter_indices(|i| observation_window.contains(config.loc(i)))
                .canonicalized()
        };
        if inside.len() < k + 1 {
            flag.fetch_add(1, Ordering::Relaxed);
            return 0.0;
        }
        let edges = knn_graph_edges(inside.coords(), inside.dim(), k);
        edge_power_sum(inside.coords(), inside.dim(), &edges, alpha)
    })
    .with_locality_hint(move |config, x| {
        knn_stabilization_radius(config, x, hint_k).map_or(f64::INFINITY, |r| 3.0 * r)
    });
    Ok(spec)
}

/// Add-one stabilisation radius `R(x, μ)`: the larger of the longest edge
/// `z₁z₂` that can be removed by inserting `x` (z₁ acquires x as a k-NN, z₂ is
/// a current k-NN of z₁) and the distance from `x` to its own k-th neighbour.
pub fn knn_stabilization_radius(config: &PointConfiguration, x: &Point, k: usize) -> Result<f64> {
    if config.len() < k {
        return Err(Error::TooFewPoints {
            needed: k,
            have: config.len(),
        });
    }
    if x.loc.len() != config.dim() {
        return Err(Error::Domain("probe point has the wrong dimension".into()));
    }
    let dim = config.dim();
    let base = config.canonicalized();
    let with_x = base.with_points_unchecked(std::slice::from_ref(&Point::new(x.loc.clone())));
    let order = with_x.canonical_order();
    let n = base.len();
    // canonical position of x in μ + δ_x, and the map from μ+δ_x indices to μ indices
    let pos_x = order.iter().position(|&i| i == n).expect("x is present");
    let mut merged = Vec::with_capacity((n + 1) * dim);
    for &i in &order {
        merged.extend_from_slice(with_x.loc(i));
    }
    let to_base = |m: usize| if m < pos_x { m } else { m - 1 };

    let before = knn_lists(base.coords(), dim, k);
    let after = knn_lists(&merged, dim, k);

    let mut radius: f64 = 0.0;
    for &z in &after[pos_x] {
        radius = radius.max(sq_dist(&merged[z * dim..(z + 1) * dim], &x.loc).sqrt());
    }
    for (m, nn) in after.iter().enumerate() {
        if m == pos_x || !nn.contains(&pos_x) {
            continue;
        }
        let z1 = to_base(m);
        for &z2 in &before[z1] {
            radius = radius.max(sq_dist(base.loc(z1), base.loc(z2)).sqrt());
        }
    }
    Ok(radius)
}
