//! Gaussian-process draws on a finite grid via a jittered Cholesky factor.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::{rng_from_seed, Rng};

/// Multiples of the mean diagonal tried, in order, when factoring.
const JITTER_LADDER: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];
const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric matrix `K[a][b] = kernel(a, b)` from the lower triangle.
pub fn covariance_matrix(size: usize, mut kernel: impl FnMut(usize, usize) -> Result<f64>) -> Result<Matrix> {
    let mut k = Matrix::zeros(size, size);
    for a in 0..size {
        for b in 0..=a {
            let v = kernel(a, b)?;
            k[(a, b)] = v;
            k[(b, a)] = v;
        }
    }
    Ok(k)
}

/// A factored Gaussian distribution on `R^size`.
#[derive(Debug, Clone)]
pub struct GaussianProcess {
    mean: Vec<f64>,
    chol: Cholesky,
    jitter: f64,
}

impl GaussianProcess {
    pub fn new(cov: &Matrix, mean: Vec<f64>) -> Result<Self> {
        let size = cov.rows();
        if cov.cols() != size || mean.len() != size {
            return Err(Error::ShapeMismatch("covariance and mean sizes differ".into()));
        }
        if cov.max_asymmetry() > SYMMETRY_TOL {
            return Err(Error::DomainError("covariance matrix is not symmetric".into()));
        }
        let mean_diag = (0..size).map(|i| cov[(i, i)]).sum::<f64>() / size as f64;
        for rung in JITTER_LADDER {
            let jitter = rung * mean_diag;
            if let Ok(chol) = Cholesky::with_shift(cov, jitter) {
                return Ok(GaussianProcess { mean, chol, jitter });
            }
        }
        Err(Error::NotPositiveDefinite)
    }

    pub fn zero_mean(cov: &Matrix) -> Result<Self> {
        Self::new(cov, vec![0.0; cov.rows()])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Diagonal shift that made the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Fills `z` with standard normals.
    pub fn standard_normals(rng: &mut Rng, z: &mut [f64]) {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
    }

    /// `mean + L z` for given standard normals `z`.
    pub fn transform(&self, z: &[f64], out: &mut [f64]) {
        self.chol.lower_mul(z, out);
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o += m;
        }
    }

    pub fn draw(&self, rng: &mut Rng, out: &mut [f64]) {
        let mut z = vec![0.0; self.dim()];
        Self::standard_normals(rng, &mut z);
        self.transform(&z, out);
    }
}

/// `count` draws from `N(mean, cov)` as rows of a `count x size` matrix.
pub fn gp_sample(cov: &Matrix, mean: &[f64], count: usize, seed: u64) -> Result<Matrix> {
    let gp = GaussianProcess::new(cov, mean.to_vec())?;
    let mut rng = rng_from_seed(seed);
    let mut out = Matrix::zeros(count, gp.dim());
    for i in 0..count {
        gp.draw(&mut rng, out.row_mut(i));
    }
    Ok(out)
}
