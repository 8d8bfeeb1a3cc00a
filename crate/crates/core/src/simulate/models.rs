use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::fdmodel::{uniform_grid, FunctionalSample, Grid, LabeledSample};
use crate::rng::{rng_from_seed, substream};
use crate::simulate::bessel::MaternParams;
use crate::simulate::gp::{covariance_matrix, GaussianProcess};

pub const DEFAULT_GRID_SIZE: usize = 50;

/// Which model to draw, how many curves, the contamination level and the grid size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub model: u32,
    pub n: usize,
    /// Contamination level in `[0, 1)`; exactly `round(c * n)` curves are contaminated.
    pub c: f64,
    pub m: usize,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(model: u32, n: usize, c: f64, seed: u64) -> Self {
        ModelSpec { model, n, c, m: DEFAULT_GRID_SIZE, seed }
    }

    pub fn contaminated_count(&self) -> usize {
        libm::round(self.c * self.n as f64) as usize
    }

    fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.model) {
            return Err(Error::UnknownModel(self.model));
        }
        if self.n == 0 {
            return Err(Error::DomainError("sample size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.c) {
            return Err(Error::DomainError(alloc::format!("contamination {} outside [0, 1)", self.c)));
        }
        Ok(())
    }
}

/// Model definitions with their noise covariances factored once, so that
/// repeated draws (benchmark replications) reuse the factorization.
#[derive(Debug, Clone)]
pub struct ModelGenerator {
    model: u32,
    grid: Grid,
    t: Vec<f64>,
    main: GaussianProcess,
    /// Model 4's contamination noise.
    alt: Option<GaussianProcess>,
}

fn exp_kernel(t: &[f64], scale: f64, rate: f64, power: f64) -> Result<crate::linalg::Matrix> {
    covariance_matrix(t.len(), |a, b| Ok(scale * libm::exp(-rate * libm::pow((t[a] - t[b]).abs(), power))))
}

/// `2m x 2m` block covariance of the bivariate Matérn noise, dimension-major.
fn model5_covariance(t: &[f64]) -> Result<crate::linalg::Matrix> {
    let m = t.len();
    let c11 = MaternParams::new(1.2, 0.2, 0.1, 0.1, 1.0)?;
    let c22 = MaternParams::new(0.6, 0.1, 0.1, 0.1, 1.0)?;
    let c12 = MaternParams::new(1.0, 0.16, 0.1, 0.1, 0.1)?;
    covariance_matrix(2 * m, |a, b| {
        let (da, ja) = (a / m, a % m);
        let (db, jb) = (b / m, b % m);
        let params = match (da, db) {
            (0, 0) => &c11,
            (1, 1) => &c22,
            _ => &c12,
        };
        params.covariance(t[ja] - t[jb])
    })
}

impl ModelGenerator {
    pub fn new(model: u32, m: usize) -> Result<Self> {
        let grid = uniform_grid(m, 0.0, 1.0)?;
        let t: Vec<f64> = grid.first_coords().collect();
        let (main_cov, alt_cov) = match model {
            1 | 2 => (exp_kernel(&t, 1.0, 1.0, 1.0)?, None),
            3 => (exp_kernel(&t, 0.3, 1.0 / 0.3, 1.0)?, None),
            4 => (exp_kernel(&t, 1.0, 1.0, 1.0)?, Some(exp_kernel(&t, 5.0, 2.0, 0.5)?)),
            5 => (model5_covariance(&t)?, None),
            other => return Err(Error::UnknownModel(other)),
        };
        let main = GaussianProcess::zero_mean(&main_cov)?;
        let alt = alt_cov.map(|c| GaussianProcess::zero_mean(&c)).transpose()?;
        Ok(ModelGenerator { model, grid, t, main, alt })
    }

    pub fn model(&self) -> u32 {
        self.model
    }

    pub fn p(&self) -> usize {
        if self.model == 5 { 2 } else { 1 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Draws `n` curves with `round(c * n)` contaminated ones.
    ///
    /// Contaminated indices come from the base stream of `seed`; curve `i`
    /// draws its noise first and then any model-specific variables from
    /// substream `(seed, i + 1)`, so a curve's noise does not depend on
    /// whether it was contaminated.
    pub fn generate(&self, n: usize, c: f64, seed: u64) -> Result<LabeledSample> {
        let spec = ModelSpec { model: self.model, n, c, m: self.t.len(), seed };
        spec.validate()?;
        let k = spec.contaminated_count();
        if k > n {
            return Err(Error::DomainError("more contaminated curves than curves".into()));
        }
        let mut truth = vec![false; n];
        let mut master = rng_from_seed(seed);
        for i in sample_indices(&mut master, n, k) {
            truth[i] = true;
        }

        let m = self.t.len();
        let p = self.p();
        let mut values = Vec::with_capacity(n * m * p);
        let mut z = vec![0.0; m * p];
        let mut noise = vec![0.0; m * p];
        for (i, &outlier) in truth.iter().enumerate() {
            let mut rng = rng_from_seed(substream(seed, i as u64 + 1));
            GaussianProcess::standard_normals(&mut rng, &mut z);
            let gp = match (&self.alt, outlier) {
                (Some(alt), true) => alt,
                _ => &self.main,
            };
            gp.transform(&z, &mut noise);
            match self.model {
                1 => {
                    let shift = if outlier { 8.0 * sign(&mut rng) } else { 0.0 };
                    values.extend(self.t.iter().zip(&noise).map(|(t, e)| 4.0 * t + shift + e));
                }
                2 => {
                    let (u, start) = if outlier {
                        (sign(&mut rng), rng.random_range(0.1..=0.9))
                    } else {
                        (0.0, f64::INFINITY)
                    };
                    values.extend(self.t.iter().zip(&noise).map(|(&t, e)| {
                        let spike = if start <= t && t <= start + 0.05 { 8.0 * u } else { 0.0 };
                        4.0 * t + spike + e
                    }));
                }
                3 => {
                    values.extend(self.t.iter().zip(&noise).map(|(&t, e)| {
                        let trend = if outlier {
                            30.0 * (1.0 - t) * libm::pow(t, 1.5)
                        } else {
                            30.0 * t * libm::pow(1.0 - t, 1.5)
                        };
                        trend + e
                    }));
                }
                4 => values.extend(self.t.iter().zip(&noise).map(|(t, e)| 4.0 * t + e)),
                5 => {
                    let offset = if outlier {
                        None
                    } else {
                        Some((rng.random_range(-1.1..=1.1), rng.random_range(-1.1..=1.1)))
                    };
                    for (j, &t) in self.t.iter().enumerate() {
                        let (a, b) = offset
                            .unwrap_or_else(|| (libm::sin(4.0 * PI * t), libm::cos(8.0 * PI * t)));
                        values.push(noise[j] + a);
                        values.push(noise[m + j] + b);
                    }
                }
                _ => unreachable!("model id validated in new"),
            }
        }
        let ids = (1..=n).map(|i| i.to_string()).collect();
        let sample = FunctionalSample::new(values, p, self.grid.clone(), ids)?;
        LabeledSample::new(sample, truth)
    }
}

fn sign(rng: &mut crate::rng::Rng) -> f64 {
    if rng.random_bool(0.5) { 1.0 } else { -1.0 }
}

/// One labeled sample for `spec`.
pub fn model_sample(spec: &ModelSpec) -> Result<LabeledSample> {
    spec.validate()?;
    ModelGenerator::new(spec.model, spec.m)?.generate(spec.n, spec.c, spec.seed)
}
