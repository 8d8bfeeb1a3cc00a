//! Point-wise directional outlyingness `O(X(t), F_X(t))` at every grid point.
//!
//! For `p = 1` the Stahel-Donoho outlyingness reduces to `(x - median) / MAD`
//! and is computed exactly. For `p >= 2` the supremum over unit directions is
//! approximated by a maximum over a fixed [`DirectionSet`], and the direction
//! of outlyingness points from the deepest sample point of the cross-section.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fdmodel::FunctionalSample;
use crate::linalg::Matrix;
use crate::rng::rng_from_seed;
use crate::stats::{median_in_place, median_mad};

/// Number of random projections used when none are supplied.
pub const DEFAULT_DIRECTIONS: usize = 200;

/// Unit vectors in `R^p`, reproducible from `(K, p, seed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    p: usize,
    seed: u64,
    data: Vec<f64>,
}

impl DirectionSet {
    /// Normalizes arbitrary nonzero vectors into a direction set.
    pub fn from_vectors(p: usize, vectors: &[Vec<f64>]) -> Result<Self> {
        if p < 2 {
            return Err(Error::UseClosedForm);
        }
        let mut data = Vec::with_capacity(vectors.len() * p);
        for v in vectors {
            if v.len() != p {
                return Err(Error::ShapeMismatch("direction has wrong length".into()));
            }
            let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::DomainError("direction must be a finite nonzero vector".into()));
            }
            data.extend(v.iter().map(|x| x / norm));
        }
        if data.is_empty() {
            return Err(Error::DomainError("need at least one direction".into()));
        }
        Ok(DirectionSet { p, seed: 0, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.p
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn direction(&self, k: usize) -> &[f64] {
        &self.data[k * self.p..(k + 1) * self.p]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    /// Union of two sets in the same dimension (this set's directions first).
    pub fn union(&self, other: &DirectionSet) -> Result<Self> {
        if other.p != self.p {
            return Err(Error::ShapeMismatch("direction sets differ in dimension".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(DirectionSet { p: self.p, seed: self.seed, data })
    }
}

/// `count` directions uniform on the unit sphere of `R^p` (normalized Gaussians).
pub fn sample_directions(count: usize, p: usize, seed: u64) -> Result<DirectionSet> {
    if p < 2 {
        return Err(Error::UseClosedForm);
    }
    if count == 0 {
        return Err(Error::DomainError("need at least one direction".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut data = Vec::with_capacity(count * p);
    let mut v = vec![0.0; p];
    while data.len() < count * p {
        for x in v.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        if norm < 1e-8 {
            continue;
        }
        data.extend(v.iter().map(|x| x / norm));
    }
    Ok(DirectionSet { p, seed, data })
}

/// Signed univariate outlyingness `(x - median) / MAD`.
pub fn directional_outlyingness_1d(x: f64, cross_section: &[f64]) -> Result<f64> {
    let mut scratch = Vec::new();
    let (med, mad) = median_mad(cross_section, &mut scratch);
    if !(mad > 0.0) {
        return Err(Error::DegenerateCrossSection { index: 0 });
    }
    Ok((x - med) / mad)
}

/// Median and MAD of a cross-section projected on every direction.
struct ProjectedSpread {
    /// Coordinate-wise median; projections are taken of `x - center`.
    center: Vec<f64>,
    /// `(median, MAD)` per usable direction, paired with the direction index.
    usable: Vec<(usize, f64, f64)>,
}

impl ProjectedSpread {
    fn new(cross_section: &Matrix, dirs: &DirectionSet) -> Result<Self> {
        let (n, p) = (cross_section.rows(), cross_section.cols());
        let mut scratch = Vec::with_capacity(n);
        let center: Vec<f64> = (0..p)
            .map(|k| {
                scratch.clear();
                scratch.extend(cross_section.iter_rows().map(|r| r[k]));
                median_in_place(&mut scratch)
            })
            .collect();
        let centered: Vec<f64> =
            cross_section.iter_rows().flat_map(|r| r.iter().zip(&center).map(|(a, c)| a - c)).collect();
        let mut proj = vec![0.0; n];
        let mut usable = Vec::with_capacity(dirs.len());
        for (k, u) in dirs.iter().enumerate() {
            for (pr, row) in proj.iter_mut().zip(centered.chunks_exact(p)) {
                *pr = dot(u, row);
            }
            let (med, mad) = median_mad(&proj, &mut scratch);
            if mad > 0.0 {
                usable.push((k, med, mad));
            }
        }
        if usable.is_empty() {
            return Err(Error::DegenerateSample);
        }
        Ok(ProjectedSpread { center, usable })
    }

    fn sdo(&self, x: &[f64], dirs: &DirectionSet) -> f64 {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        self.usable
            .iter()
            .map(|&(k, med, mad)| (dot(dirs.direction(k), &y) - med).abs() / mad)
            .fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(x_len: usize, cross_section: &Matrix, dirs: &DirectionSet) -> Result<()> {
    if cross_section.cols() != dirs.dim() || x_len != dirs.dim() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "point/cross-section/directions dimensions {x_len}/{}/{} disagree",
            cross_section.cols(),
            dirs.dim()
        )));
    }
    if cross_section.rows() == 0 {
        return Err(Error::InsufficientData("empty cross-section".into()));
    }
    Ok(())
}

/// Stahel-Donoho outlyingness of `x` w.r.t. the rows of `cross_section`,
/// maximized over `dirs`. Directions with zero projected MAD are skipped.
pub fn sdo_md(x: &[f64], cross_section: &Matrix, dirs: &DirectionSet) -> Result<f64> {
    check_dims(x.len(), cross_section, dirs)?;
    Ok(ProjectedSpread::new(cross_section, dirs)?.sdo(x, dirs))
}

/// Outlyingness of every row of a multivariate cross-section.
fn cross_section_sdo(cross_section: &Matrix, dirs: Option<&DirectionSet>) -> Result<Vec<f64>> {
    let owned;
    let dirs = match dirs {
        Some(d) => d,
        None => {
            owned = sample_directions(DEFAULT_DIRECTIONS, cross_section.cols(), 0)?;
            &owned
        }
    };
    check_dims(cross_section.cols(), cross_section, dirs)?;
    let spread = ProjectedSpread::new(cross_section, dirs)?;
    Ok(cross_section.iter_rows().map(|row| spread.sdo(row, dirs)).collect())
}

fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Index of the sample point with minimal outlyingness (lowest index on ties).
/// For `p >= 2` without directions, the default set of
/// [`DEFAULT_DIRECTIONS`] directions with seed 0 is used.
///
/// For `p = 1` the ranking by `|x - median| / MAD` equals the ranking by
/// `|x - median|`, so a zero MAD still yields a well-defined deepest point.
pub fn deepest_point(cross_section: &Matrix, dirs: Option<&DirectionSet>) -> Result<usize> {
    if cross_section.rows() == 0 {
        return Err(Error::InsufficientData("empty cross-section".into()));
    }
    if cross_section.cols() == 1 {
        let col = cross_section.as_slice();
        let med = crate::stats::median(col);
        let dev: Vec<f64> = col.iter().map(|x| (x - med).abs()).collect();
        return Ok(argmin_first(&dev));
    }
    let sdo = cross_section_sdo(cross_section, dirs)?;
    Ok(argmin_first(&sdo))
}

/// Directional outlyingness vectors for every curve and grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseField {
    n: usize,
    m: usize,
    p: usize,
    values: Vec<f64>,
}

impl PointwiseField {
    pub fn from_values(n: usize, m: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * m * p {
            return Err(Error::ShapeMismatch("field size does not match n*m*p".into()));
        }
        Ok(PointwiseField { n, m, p, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// The outlyingness vector of curve `i` at grid index `j`.
    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.m + j) * self.p;
        &self.values[start..start + self.p]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Computes `O(X_i(t_j))` for every curve and grid point.
///
/// `dirs` is ignored for `p = 1`. For `p >= 2` with `dirs = None` the default
/// set of [`DEFAULT_DIRECTIONS`] directions with seed 0 is shared by all grid
/// points.
pub fn pointwise_field(
    sample: &FunctionalSample,
    dirs: Option<&DirectionSet>,
) -> Result<PointwiseField> {
    let (n, m, p) = (sample.n(), sample.m(), sample.p());
    let mut values = vec![0.0; n * m * p];
    let mut section = Vec::with_capacity(n * p);

    if p == 1 {
        let mut scratch = Vec::with_capacity(n);
        for j in 0..m {
            sample.cross_section_into(j, &mut section);
            let (med, mad) = median_mad(&section, &mut scratch);
            if !(mad > 0.0) {
                return Err(Error::DegenerateCrossSection { index: j });
            }
            for (i, x) in section.iter().enumerate() {
                values[i * m + j] = (x - med) / mad;
            }
        }
        return PointwiseField::from_values(n, m, p, values);
    }

    let owned;
    let dirs = match dirs {
        Some(d) => d,
        None => {
            owned = sample_directions(DEFAULT_DIRECTIONS, p, 0)?;
            &owned
        }
    };
    if dirs.dim() != p {
        return Err(Error::ShapeMismatch(alloc::format!(
            "directions live in R^{} but the sample has p={p}",
            dirs.dim()
        )));
    }
    let mut sdo = vec![0.0; n];
    for j in 0..m {
        sample.cross_section_into(j, &mut section);
        let cs = Matrix::from_vec(n, p, core::mem::take(&mut section))?;
        let spread = match ProjectedSpread::new(&cs, dirs) {
            Ok(s) => s,
            Err(Error::DegenerateSample) => return Err(Error::DegenerateCrossSection { index: j }),
            Err(e) => return Err(e),
        };
        for (s, row) in sdo.iter_mut().zip(cs.iter_rows()) {
            *s = spread.sdo(row, dirs);
        }
        let z = cs.row(argmin_first(&sdo)).to_vec();
        for (i, row) in cs.iter_rows().enumerate() {
            let dist = libm::sqrt(row.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum());
            if dist > 0.0 {
                let scale = sdo[i] / dist;
                let out = &mut values[(i * m + j) * p..(i * m + j + 1) * p];
                for ((o, a), b) in out.iter_mut().zip(row).zip(&z) {
                    *o = scale * (a - b);
                }
            }
        }
        section = cs.as_slice().to_vec();
    }
    PointwiseField::from_values(n, m, p, values)
}
