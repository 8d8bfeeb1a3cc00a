//! Cutoffs for squared robust Mahalanobis distances.
//!
//! The default follows Hardin and Rocke (2005): with a consistency-corrected
//! MCD scatter, `SRMD * (nu - d + 1) / (d * nu)` is approximately
//! `F(d, nu - d + 1)`, where `nu` is the Croux-Haesbroeck asymptotic degrees of
//! freedom multiplied by Hardin and Rocke's small-sample prediction factor.

use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{rng_from_seed, substream};
use crate::robustdet::mcd::{default_h, fast_mcd, McdOptions};
use crate::robustdet::srmd;
use crate::special::{chi2_cdf, chi2_quantile, f_quantile};

/// How the SRMD threshold is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffMode {
    /// Scaled F quantile with the predicted Hardin-Rocke degrees of freedom.
    HardinRocke,
    /// Scaled F quantile with caller-supplied degrees of freedom `nu`
    /// (for instance from [`calibrate_df`]).
    FixedDf(f64),
    /// `chi2_d` quantile.
    ChiSquare,
}

/// Asymptotic degrees of freedom `m_asy` of the MCD scatter (Croux-Haesbroeck).
pub fn asymptotic_df(n: usize, d: usize, h: usize) -> f64 {
    let p = d as f64;
    let a = h as f64 / n as f64;
    let q = chi2_quantile(a, p);
    let c = a / chi2_cdf(q, p + 2.0);
    let c2 = -0.5 * chi2_cdf(q, p + 2.0);
    let c3 = -0.5 * chi2_cdf(q, p + 4.0);
    let c4 = 3.0 * c3;
    let b1 = c * (c3 - c4) / a;
    let b2 = 0.5 + c / a * (c3 - q / p * (c2 + a / 2.0));
    let v1 = (1.0 - a) * b1 * b1 * (a * (c * q / p - 1.0) * (c * q / p - 1.0) - 1.0)
        - 2.0 * c3 * c * c * (3.0 * (b1 - p * b2) * (b1 - p * b2) + (p + 2.0) * b2 * (2.0 * b1 - p * b2));
    let v2 = n as f64 * (b1 * (b1 - p * b2) * a) * (b1 * (b1 - p * b2) * a) * c * c;
    let v = v1 / v2;
    2.0 / (c * c * v)
}

/// Small-sample predicted degrees of freedom
/// `m_asy * exp(0.725 - 0.00663 d - 0.078 ln n)`.
pub fn predicted_df(n: usize, d: usize, h: usize) -> f64 {
    asymptotic_df(n, d, h) * libm::exp(0.725 - 0.00663 * d as f64 - 0.078 * libm::log(n as f64))
}

/// `d * nu / (nu - d + 1) * F^{-1}_{d, nu - d + 1}(q)`.
pub fn scaled_f_quantile(d: usize, nu: f64, q: f64) -> f64 {
    let p = d as f64;
    // keep the denominator degrees of freedom at least 1
    let nu = nu.max(p);
    let df2 = nu - p + 1.0;
    p * nu / df2 * f_quantile(q, p, df2)
}

/// SRMD threshold at quantile `q` for `n` points in `d` dimensions with MCD
/// subset size `h`. Strictly increasing in `q`.
pub fn cutoff(d: usize, n: usize, h: usize, q: f64, mode: CutoffMode) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DomainError(alloc::format!("quantile {q} outside (0, 1)")));
    }
    if d == 0 || n <= d + 1 || h == 0 || h > n {
        return Err(Error::InsufficientData(alloc::format!("cutoff for d={d}, n={n}, h={h}")));
    }
    Ok(match mode {
        CutoffMode::ChiSquare => chi2_quantile(q, d as f64),
        CutoffMode::HardinRocke => scaled_f_quantile(d, predicted_df(n, d, h), q),
        CutoffMode::FixedDf(nu) => {
            if !(nu > 0.0) {
                return Err(Error::DomainError("degrees of freedom must be positive".into()));
            }
            scaled_f_quantile(d, nu, q)
        }
    })
}

/// Estimates `nu` by Monte Carlo: fits FastMCD to `reps` seeded standard
/// Gaussian datasets of size `n x d`, pools the SRMD of points outside the
/// MCD subset and matches the scaled F quantile at `q_match` to the empirical
/// quantile. Returns a very large `nu` (the chi-square limit) when the
/// empirical tail is lighter than chi-square.
pub fn calibrate_df(d: usize, n: usize, h: Option<usize>, q_match: f64, reps: usize, seed: u64) -> Result<f64> {
    const NU_MAX: f64 = 1e6;
    if reps == 0 {
        return Err(Error::DomainError("calibration needs at least one replication".into()));
    }
    let h = h.unwrap_or_else(|| default_h(n, d));
    let mut pooled = Vec::with_capacity(reps * (n - h.min(n)));
    for r in 0..reps {
        let mut rng = rng_from_seed(substream(seed, r as u64));
        let data: Vec<f64> = (0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let pts = Matrix::from_vec(n, d, data)?;
        let opts = McdOptions { h: Some(h), n_starts: 100, seed: substream(seed ^ 0xCA11, r as u64), ..Default::default() };
        let fit = fast_mcd(&pts, &opts)?;
        let dist = srmd(&pts, &fit)?;
        let mut in_subset = alloc::vec![false; n];
        for &i in &fit.subset {
            in_subset[i] = true;
        }
        pooled.extend(dist.iter().zip(&in_subset).filter(|(_, &inside)| !inside).map(|(d, _)| *d));
    }
    if pooled.is_empty() {
        return Err(Error::InsufficientData("no points outside the MCD subset".into()));
    }
    pooled.sort_by(f64::total_cmp);
    let target = crate::stats::quantile_sorted(&pooled, q_match);
    if target <= chi2_quantile(q_match, d as f64) {
        return Ok(NU_MAX);
    }
    // scaled F quantile decreases towards the chi-square quantile as nu grows
    let (mut lo, mut hi) = (d as f64, NU_MAX);
    if scaled_f_quantile(d, lo, q_match) <= target {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = libm::sqrt(lo * hi);
        if scaled_f_quantile(d, mid, q_match) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-10 {
            break;
        }
    }
    Ok(libm::sqrt(lo * hi))
}
