//! Labeled samples from the five benchmark models: exponential-covariance
//! Gaussian noise around linear or polynomial trends (Models 1-4) and a
//! bivariate Matérn cross-covariance process (Model 5), each with its own
//! contamination mechanism.

mod bessel;
mod gp;
mod models;

pub use bessel::{bessel_k, matern, MaternParams};
pub use gp::{covariance_matrix, gp_sample, GaussianProcess};
pub use models::{model_sample, ModelGenerator, ModelSpec, DEFAULT_GRID_SIZE};
