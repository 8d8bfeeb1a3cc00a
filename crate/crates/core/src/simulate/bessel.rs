//! Modified Bessel function of the second kind and the Matérn correlation.

use crate::error::{Error, Result};

/// Trapezoid step for the integral representation; the integrand is entire
/// and decays double-exponentially, so the discretization error is far below
/// double precision for arguments up to several hundred.
const STEP: f64 = 0.05;

/// `K_nu(x)` from `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`,
/// evaluated with the trapezoidal rule on a step fine enough for `x <= 400`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DomainError(alloc::format!("bessel_k needs x > 0, got {x}")));
    }
    if !nu.is_finite() {
        return Err(Error::DomainError("bessel_k needs a finite order".into()));
    }
    let nu = nu.abs();
    let h = STEP.min(0.5 / libm::sqrt(x));
    // past the integrand's peak once x sinh t exceeds nu
    let t_peak = libm::asinh(nu / x);
    let mut sum = 0.5; // g(0) = 1
    let mut k = 1usize;
    loop {
        let t = k as f64 * h;
        let g = libm::exp(-x * (libm::cosh(t) - 1.0)) * libm::cosh(nu * t);
        sum += g;
        if t > t_peak && g < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    Ok(libm::exp(-x) * h * sum)
}

/// Matérn correlation `2^{1-nu} / Gamma(nu) * (alpha h)^nu * K_nu(alpha h)`,
/// equal to 1 at `h = 0`.
pub fn matern(h: f64, nu: f64, alpha: f64) -> Result<f64> {
    if !(nu > 0.0) || !(alpha > 0.0) {
        return Err(Error::DomainError(alloc::format!(
            "Matérn needs nu > 0 and alpha > 0 (nu={nu}, alpha={alpha})"
        )));
    }
    let z = alpha * h.abs();
    if z == 0.0 {
        return Ok(1.0);
    }
    let log_front = (1.0 - nu) * core::f64::consts::LN_2 - libm::lgamma(nu) + nu * libm::log(z);
    Ok((libm::exp(log_front) * bessel_k(nu, z)?).min(1.0))
}

/// Parameters of one entry `C_ij(h) = rho_ij sigma_i sigma_j M(h; nu_ij, alpha_ij)`
/// of a multivariate Matérn cross-covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaternParams {
    pub nu: f64,
    pub alpha: f64,
    pub sigma_i: f64,
    pub sigma_j: f64,
    pub rho: f64,
}

impl MaternParams {
    pub fn new(nu: f64, alpha: f64, sigma_i: f64, sigma_j: f64, rho: f64) -> Result<Self> {
        if !(nu > 0.0) || !(alpha > 0.0) || !(sigma_i > 0.0) || !(sigma_j > 0.0) || !(-1.0..=1.0).contains(&rho) {
            return Err(Error::DomainError("invalid Matérn parameters".into()));
        }
        Ok(MaternParams { nu, alpha, sigma_i, sigma_j, rho })
    }

    pub fn covariance(&self, h: f64) -> Result<f64> {
        Ok(self.rho * self.sigma_i * self.sigma_j * matern(h, self.nu, self.alpha)?)
    }
}
