use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::Window;
use crate::error::{Error, Result};

/// A single (location, mark) pair, used for insertions and probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub loc: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mark: Option<f64>,
}

impl Point {
    pub fn new(loc: Vec<f64>) -> Self {
        Self { loc, mark: None }
    }

    pub fn marked(loc: Vec<f64>, mark: f64) -> Self {
        Self {
            loc,
            mark: Some(mark),
        }
    }
}

/// Borrowed view of one point of a configuration.
#[derive(Clone, Copy, Debug)]
pub struct PointRef<'a> {
    pub loc: &'a [f64],
    pub mark: Option<f64>,
}

impl PointRef<'_> {
    pub fn to_point(&self) -> Point {
        Point {
            loc: self.loc.to_vec(),
            mark: self.mark,
        }
    }
}

/// Finite point configuration in a window. Coordinates are stored flat,
/// `coords[i * dim .. (i + 1) * dim]` being point `i`.
///
/// The list order follows the sampling stream and carries no meaning; every
/// functional in this crate is evaluated in [`PointConfiguration::canonical_order`].
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration {
    window: Window,
    coords: Vec<f64>,
    marks: Option<Vec<f64>>,
}

impl PointConfiguration {
    pub fn empty(window: Window, marked: bool) -> Self {
        Self {
            window,
            coords: Vec::new(),
            marks: marked.then(Vec::new),
        }
    }

    /// Builds a configuration from explicit points, checking window membership
    /// and mark consistency.
    pub fn from_points(window: Window, points: &[Point]) -> Result<Self> {
        let marked = points.first().is_some_and(|p| p.mark.is_some());
        Self::empty(window, marked).add_points(points)
    }

    pub(crate) fn from_raw(window: Window, coords: Vec<f64>, marks: Option<Vec<f64>>) -> Self {
        debug_assert_eq!(coords.len() % window.dim(), 0);
        Self {
            window,
            coords,
            marks,
        }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_marked(&self) -> bool {
        self.marks.is_some()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn marks(&self) -> Option<&[f64]> {
        self.marks.as_deref()
    }

    pub fn loc(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn mark(&self, i: usize) -> Option<f64> {
        self.marks.as_ref().map(|m| m[i])
    }

    pub fn point(&self, i: usize) -> PointRef<'_> {
        PointRef {
            loc: self.loc(i),
            mark: self.mark(i),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = PointRef<'_>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.loc.len() != self.dim() || !self.window.contains(&p.loc) {
            return Err(Error::Domain(format!(
                "point {:?} lies outside the window {:?}..{:?}",
                p.loc,
                self.window.lower(),
                self.window.upper()
            )));
        }
        match (self.is_marked(), p.mark) {
            (true, None) => Err(Error::Domain("marked configuration needs marked insertions".into())),
            (false, Some(_)) => Err(Error::Domain("unmarked configuration cannot take marked insertions".into())),
            _ => Ok(()),
        }
    }

    /// `η + Σ δ_{x_i}`; `self` is left untouched.
    pub fn add_points(&self, xs: &[Point]) -> Result<Self> {
        for p in xs {
            self.check_point(p)?;
        }
        Ok(self.with_points_unchecked(xs))
    }

    /// Same as [`add_points`](Self::add_points) for points already validated
    /// against this window.
    pub(crate) fn with_points_unchecked(&self, xs: &[Point]) -> Self {
        let mut out = self.clone();
        out.coords.reserve(xs.len() * self.dim());
        for p in xs {
            out.coords.extend_from_slice(&p.loc);
            if let Some(m) = out.marks.as_mut() {
                m.push(p.mark.unwrap_or(1.0));
            }
        }
        out
    }

    /// Union of two configurations on the same window (list concatenation).
    pub fn union(&self, other: &PointConfiguration) -> Result<Self> {
        if self.window != other.window {
            return Err(Error::Domain("cannot merge configurations on different windows".into()));
        }
        if self.is_marked() != other.is_marked() {
            return Err(Error::Domain("cannot merge marked and unmarked configurations".into()));
        }
        let mut out = self.clone();
        out.coords.extend_from_slice(&other.coords);
        if let (Some(a), Some(b)) = (out.marks.as_mut(), other.marks.as_ref()) {
            a.extend_from_slice(b);
        }
        Ok(out)
    }

    /// Keeps the points whose index satisfies `keep`.
    pub fn filter_indices(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let d = self.dim();
        let mut coords = Vec::with_capacity(self.coords.len());
        let mut marks = self.marks.as_ref().map(|_| Vec::new());
        for i in 0..self.len() {
            if keep(i) {
                coords.extend_from_slice(&self.coords[i * d..(i + 1) * d]);
                if let (Some(out), Some(m)) = (marks.as_mut(), self.marks.as_ref()) {
                    out.push(m[i]);
                }
            }
        }
        Self {
            window: self.window.clone(),
            coords,
            marks,
        }
    }

    /// `η ∩ B(center, r)` (closed ball).
    pub fn restrict_to_ball(&self, center: &[f64], r: f64) -> Self {
        let r2 = r * r;
        self.filter_indices(|i| sq_dist(self.loc(i), center) <= r2)
    }

    /// Point indices sorted lexicographically by coordinates, then mark, then
    /// list index. Evaluating in this order makes functionals exactly
    /// invariant under permutations of the point list.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.canonical_cmp(a, b));
        idx
    }

    fn canonical_cmp(&self, a: usize, b: usize) -> Ordering {
        for (x, y) in self.loc(a).iter().zip(self.loc(b)) {
            match x.total_cmp(y) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        let ma = self.mark(a).unwrap_or(0.0);
        let mb = self.mark(b).unwrap_or(0.0);
        ma.total_cmp(&mb).then(a.cmp(&b))
    }

    /// Copy of this configuration with points in canonical order.
    pub fn canonicalized(&self) -> Self {
        let order = self.canonical_order();
        let d = self.dim();
        let mut coords = Vec::with_capacity(self.coords.len());
        for &i in &order {
            coords.extend_from_slice(&self.coords[i * d..(i + 1) * d]);
        }
        let marks = self
            .marks
            .as_ref()
            .map(|m| order.iter().map(|&i| m[i]).collect());
        Self {
            window: self.window.clone(),
            coords,
            marks,
        }
    }

    /// Multiset equality: same points up to list order.
    pub fn same_multiset(&self, other: &PointConfiguration) -> bool {
        self.window == other.window
            && self.is_marked() == other.is_marked()
            && self.canonicalized().coords == other.canonicalized().coords
            && self.canonicalized().marks == other.canonicalized().marks
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
