//! Discretized functional samples: grids with quadrature weights, the
//! `n x m x p` value tensor and ground-truth labels.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Ordered design points of a `q`-dimensional domain with quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Builds a grid from flat point coordinates (`points.len() == m * dim`).
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("domain dimension must be at least 1".into()));
        }
        if coords.len() != weights.len() * dim {
            return Err(Error::InvalidGrid(format!(
                "{} coordinates do not match {} weights in dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        let m = weights.len();
        if m < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {m}")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGrid("non-finite grid coordinate".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidGrid("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidGrid(format!("weights sum to {total}, not 1")));
        }
        if dim == 1 {
            if coords.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidGrid("points must be strictly increasing".into()));
            }
        } else {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                let (pa, pb) = (&coords[a * dim..(a + 1) * dim], &coords[b * dim..(b + 1) * dim]);
                pa.iter()
                    .zip(pb)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(core::cmp::Ordering::Equal)
            });
            for w in order.windows(2) {
                if coords[w[0] * dim..(w[0] + 1) * dim] == coords[w[1] * dim..(w[1] + 1) * dim] {
                    return Err(Error::InvalidGrid("duplicate grid point".into()));
                }
            }
        }
        Ok(Grid { dim, coords, weights })
    }

    /// Number of design points `m`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Domain dimension `q`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    /// First coordinate of every point; the design points themselves when `q = 1`.
    pub fn first_coords(&self) -> impl Iterator<Item = f64> + '_ {
        self.coords.iter().step_by(self.dim).copied()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `m` equally spaced points on `[a, b]`, each with weight `1/m`.
pub fn uniform_grid(m: usize, a: f64, b: f64) -> Result<Grid> {
    if m < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {m}")));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidGrid(format!("interval [{a}, {b}] is empty or unbounded")));
    }
    let step = (b - a) / (m - 1) as f64;
    let mut coords: Vec<f64> = (0..m).map(|j| a + step * j as f64).collect();
    coords[m - 1] = b;
    Grid::new(1, coords, equal_weights(m))
}

/// One-dimensional grid with cell-width (trapezoidal) weights, normalized to sum to 1.
pub fn trapezoid_grid(points: Vec<f64>) -> Result<Grid> {
    let m = points.len();
    if m < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {m}")));
    }
    let span = points[m - 1] - points[0];
    if !(span > 0.0) {
        return Err(Error::InvalidGrid("points must be strictly increasing".into()));
    }
    let mut weights: Vec<f64> = (0..m)
        .map(|j| {
            let left = if j == 0 { points[0] } else { points[j - 1] };
            let right = if j + 1 == m { points[m - 1] } else { points[j + 1] };
            0.5 * (right - left) / span
        })
        .collect();
    renormalize(&mut weights);
    Grid::new(1, points, weights)
}

/// Equal weights `1/m` whose float sum is 1 to within one rounding step.
pub fn equal_weights(m: usize) -> Vec<f64> {
    let mut w = alloc::vec![1.0 / m as f64; m];
    renormalize(&mut w);
    w
}

fn renormalize(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    // push any residual into the last weight
    let head: f64 = weights[..weights.len() - 1].iter().sum();
    let last = weights.len() - 1;
    let fixed = 1.0 - head;
    if fixed >= 0.0 {
        weights[last] = fixed;
    }
}

/// `n` curves observed on a common grid, each with `p` response dimensions.
///
/// Values are stored curve-major: entry `(i, j, k)` lives at `(i * m + j) * p + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    values: Vec<f64>,
    n: usize,
    p: usize,
    grid: Grid,
    ids: Vec<String>,
}

impl FunctionalSample {
    /// Validates and wraps a value tensor. Idempotent on valid input.
    pub fn new(values: Vec<f64>, p: usize, grid: Grid, ids: Vec<String>) -> Result<Self> {
        let m = grid.len();
        let n = ids.len();
        if n == 0 {
            return Err(Error::ShapeMismatch("sample has no curves".into()));
        }
        if p == 0 {
            return Err(Error::ShapeMismatch("response dimension p must be at least 1".into()));
        }
        if m < 2 {
            return Err(Error::ShapeMismatch(format!("need at least 2 grid points, got {m}")));
        }
        if values.len() != n * m * p {
            return Err(Error::ShapeMismatch(format!(
                "{} values for n={n}, m={m}, p={p} (expected {})",
                values.len(),
                n * m * p
            )));
        }
        let mut seen = BTreeSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let i = pos / (m * p);
            return Err(Error::NonFiniteValue { curve: ids[i].clone(), index: (pos / p) % m });
        }
        Ok(FunctionalSample { values, n, p, grid, ids })
    }

    /// Builds a sample from nested `curves[i][j][k]` values.
    pub fn from_curves(curves: &[Vec<Vec<f64>>], grid: Grid, ids: Vec<String>) -> Result<Self> {
        let m = grid.len();
        let p = curves.first().and_then(|c| c.first()).map_or(0, Vec::len);
        let mut values = Vec::with_capacity(curves.len() * m * p);
        for (i, curve) in curves.iter().enumerate() {
            if curve.len() != m {
                return Err(Error::ShapeMismatch(format!(
                    "curve {i} has {} points, grid has {m}",
                    curve.len()
                )));
            }
            for point in curve {
                if point.len() != p {
                    return Err(Error::ShapeMismatch(format!(
                        "curve {i} mixes response dimensions {} and {p}",
                        point.len()
                    )));
                }
                values.extend_from_slice(point);
            }
        }
        if curves.len() != ids.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} curves but {} ids",
                curves.len(),
                ids.len()
            )));
        }
        Self::new(values, p, grid, ids)
    }

    /// Univariate sample from rows of length `m`, with ids `"0", "1", ...`.
    pub fn from_rows(rows: &[Vec<f64>], grid: Grid) -> Result<Self> {
        let m = grid.len();
        let mut values = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} values, grid has {m}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(values, 1, grid, ids)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.grid.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.m() + j) * self.p + k]
    }

    /// The `p` response values of curve `i` at grid index `j`.
    pub fn point(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.m() + j) * self.p;
        &self.values[start..start + self.p]
    }

    /// Copies the `n x p` cross-section at grid index `j` into `out` (row-major).
    pub fn cross_section_into(&self, j: usize, out: &mut Vec<f64>) {
        out.clear();
        for i in 0..self.n {
            out.extend_from_slice(self.point(i, j));
        }
    }

    /// Sample restricted to the listed response dimensions, in the given order.
    pub fn select_dims(&self, dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&k| k >= self.p) {
            return Err(Error::ShapeMismatch(format!(
                "dimension selection {dims:?} invalid for p={}",
                self.p
            )));
        }
        let mut values = Vec::with_capacity(self.n * self.m() * dims.len());
        for i in 0..self.n {
            for j in 0..self.m() {
                let point = self.point(i, j);
                values.extend(dims.iter().map(|&k| point[k]));
            }
        }
        Ok(FunctionalSample {
            values,
            n: self.n,
            p: dims.len(),
            grid: self.grid.clone(),
            ids: self.ids.clone(),
        })
    }

    /// Applies `f(value, k)` to every entry, where `k` is the response dimension.
    pub fn map_values(&self, mut f: impl FnMut(f64, usize) -> f64) -> Result<Self> {
        let p = self.p;
        let values = self.values.iter().enumerate().map(|(idx, &v)| f(v, idx % p)).collect();
        Self::new(values, p, self.grid.clone(), self.ids.clone())
    }

    /// Reorders curves so that new curve `r` is old curve `order[r]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::ShapeMismatch("permutation length differs from n".into()));
        }
        let stride = self.m() * self.p;
        let mut values = Vec::with_capacity(self.values.len());
        for &i in order {
            values.extend_from_slice(&self.values[i * stride..(i + 1) * stride]);
        }
        let ids = order.iter().map(|&i| self.ids[i].clone()).collect();
        Self::new(values, self.p, self.grid.clone(), ids)
    }
}

/// A sample together with its outlier ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub sample: FunctionalSample,
    pub truth: Vec<bool>,
}

impl LabeledSample {
    pub fn new(sample: FunctionalSample, truth: Vec<bool>) -> Result<Self> {
        if truth.len() != sample.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} truth labels for {} curves",
                truth.len(),
                sample.n()
            )));
        }
        Ok(LabeledSample { sample, truth })
    }

    pub fn outlier_count(&self) -> usize {
        self.truth.iter().filter(|&&t| t).count()
    }
}
