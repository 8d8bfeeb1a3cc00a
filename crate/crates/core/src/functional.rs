//! Functional aggregates of the point-wise field: mean directional
//! outlyingness (MO), its weighted variation (VO) and the total (FO), with
//! `FO = |MO|^2 + VO` whenever the grid weights sum to one.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fdmodel::{FunctionalSample, Grid};
use crate::linalg::Matrix;
use crate::pointwise::{pointwise_field, DirectionSet, PointwiseField};
use crate::stats::CompensatedSum;

const WEIGHT_TOL: f64 = 1e-9;
/// Grids longer than this are summed with compensation.
const COMPENSATE_ABOVE: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OutlyingnessSummary {
    /// `n x p` mean directional outlyingness.
    pub mo: Matrix,
    pub vo: Vec<f64>,
    pub fo: Vec<f64>,
}

impl OutlyingnessSummary {
    pub fn n(&self) -> usize {
        self.vo.len()
    }

    pub fn p(&self) -> usize {
        self.mo.cols()
    }

    pub fn mo_norm(&self, i: usize) -> f64 {
        libm::sqrt(self.mo.row(i).iter().map(|x| x * x).sum())
    }

    /// Largest violation of `FO = |MO|^2 + VO` over all curves.
    pub fn max_decomposition_error(&self) -> f64 {
        (0..self.n())
            .map(|i| {
                let mo2: f64 = self.mo.row(i).iter().map(|x| x * x).sum();
                (self.fo[i] - mo2 - self.vo[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Weighted sum accumulator that switches to compensated summation on long grids.
enum Acc {
    Plain(f64),
    Compensated(CompensatedSum),
}

impl Acc {
    fn new(m: usize) -> Self {
        if m > COMPENSATE_ABOVE {
            Acc::Compensated(CompensatedSum::default())
        } else {
            Acc::Plain(0.0)
        }
    }

    fn add(&mut self, x: f64) {
        match self {
            Acc::Plain(s) => *s += x,
            Acc::Compensated(c) => c.add(x),
        }
    }

    fn value(&self) -> f64 {
        match self {
            Acc::Plain(s) => *s,
            Acc::Compensated(c) => c.value(),
        }
    }
}

/// Integrates the field against the grid weights.
pub fn summarize(field: &PointwiseField, grid: &Grid) -> Result<OutlyingnessSummary> {
    let (n, m, p) = (field.n(), field.m(), field.p());
    if grid.len() != m {
        return Err(Error::ShapeMismatch(alloc::format!(
            "field has {m} grid points, grid has {}",
            grid.len()
        )));
    }
    let weights = grid.weights();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidGrid(alloc::format!("weights sum to {total}, not 1")));
    }

    let mut mo = Matrix::zeros(n, p);
    let mut vo = vec![0.0; n];
    let mut fo = vec![0.0; n];
    let mut mo_acc: Vec<Acc> = Vec::with_capacity(p);
    for i in 0..n {
        mo_acc.clear();
        mo_acc.extend((0..p).map(|_| Acc::new(m)));
        let mut fo_acc = Acc::new(m);
        for (j, w) in weights.iter().enumerate() {
            let o = field.get(i, j);
            let mut sq = 0.0;
            for (acc, x) in mo_acc.iter_mut().zip(o) {
                acc.add(w * x);
                sq += x * x;
            }
            fo_acc.add(w * sq);
        }
        let row = mo.row_mut(i);
        for (r, acc) in row.iter_mut().zip(&mo_acc) {
            *r = acc.value();
        }
        let mut vo_acc = Acc::new(m);
        for (j, w) in weights.iter().enumerate() {
            let dev: f64 = field.get(i, j).iter().zip(mo.row(i)).map(|(x, c)| (x - c) * (x - c)).sum();
            vo_acc.add(w * dev);
        }
        vo[i] = vo_acc.value().max(0.0);
        fo[i] = fo_acc.value();
    }
    Ok(OutlyingnessSummary { mo, vo, fo })
}

/// Point-wise field followed by [`summarize`].
pub fn outlyingness(sample: &FunctionalSample, dirs: Option<&DirectionSet>) -> Result<OutlyingnessSummary> {
    let field = pointwise_field(sample, dirs)?;
    summarize(&field, sample.grid())
}

/// Coordinates of the MS-plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsMode {
    /// Rows `(MO_1, ..., MO_p, VO)`.
    Full,
    /// Rows `(|MO|, VO)`.
    Norm,
}

pub fn ms_coordinates(summary: &OutlyingnessSummary, mode: MsMode) -> Matrix {
    let n = summary.n();
    let p = summary.p();
    match mode {
        MsMode::Full => {
            let mut out = Matrix::zeros(n, p + 1);
            for i in 0..n {
                let row = out.row_mut(i);
                row[..p].copy_from_slice(summary.mo.row(i));
                row[p] = summary.vo[i];
            }
            out
        }
        MsMode::Norm => {
            let mut out = Matrix::zeros(n, 2);
            for i in 0..n {
                out[(i, 0)] = summary.mo_norm(i);
                out[(i, 1)] = summary.vo[i];
            }
            out
        }
    }
}
