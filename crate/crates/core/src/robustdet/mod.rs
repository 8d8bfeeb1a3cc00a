//! Outlier detection on MS-plot coordinates `(MO, VO)`.
//!
//! Two rules are available: FastMCD + squared robust Mahalanobis distance
//! (SRMD) against a scaled-F cutoff, and a component-wise boxplot rule.

mod cutoff;
mod ellipsoid;
mod mcd;

use alloc::vec::Vec;

pub use cutoff::{asymptotic_df, calibrate_df, cutoff, predicted_df, scaled_f_quantile, CutoffMode};
pub use ellipsoid::{ellipsoid_boundary, Boundary};
pub use mcd::{
    c_step, consistency_factor, default_h, exhaustive_mcd, fast_mcd, fast_mcd_observed, McdEvent,
    McdOptions, RobustFit,
};

use crate::error::{Error, Result};
use crate::fdmodel::FunctionalSample;
use crate::functional::{ms_coordinates, outlyingness, MsMode, OutlyingnessSummary};
use crate::linalg::{Cholesky, Matrix};
use crate::pointwise::{sample_directions, DEFAULT_DIRECTIONS};
use crate::rng::substream;
use crate::stats::quantile_sorted;

/// Squared Mahalanobis distance of every row to the fit.
pub fn srmd(points: &Matrix, fit: &RobustFit) -> Result<Vec<f64>> {
    if points.cols() != fit.location.len() {
        return Err(Error::ShapeMismatch("points and fit differ in dimension".into()));
    }
    let chol = Cholesky::new(&fit.scatter).map_err(|_| Error::SingularScatter)?;
    let mut dev = Vec::with_capacity(points.cols());
    let mut scratch = Vec::with_capacity(points.cols());
    Ok(points
        .iter_rows()
        .map(|row| {
            dev.clear();
            dev.extend(row.iter().zip(&fit.location).map(|(x, m)| x - m));
            chol.quad_form(&dev, &mut scratch)
        })
        .collect())
}

/// Boxplot scores: for each point, the largest number of IQRs by which any
/// coordinate lies beyond `[Q1, Q3]` of that coordinate. A point is outside
/// `[Q1 - k IQR, Q3 + k IQR]` in some coordinate iff its score exceeds `k`.
pub fn boxplot_scores(points: &Matrix) -> Vec<f64> {
    let (n, d) = (points.rows(), points.cols());
    let mut scores = alloc::vec![f64::NEG_INFINITY; n];
    let mut col = Vec::with_capacity(n);
    for k in 0..d {
        col.clear();
        col.extend(points.iter_rows().map(|r| r[k]));
        col.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&col, 0.25);
        let q3 = quantile_sorted(&col, 0.75);
        let iqr = q3 - q1;
        for (s, row) in scores.iter_mut().zip(points.iter_rows()) {
            let x = row[k];
            let excess = if x < q1 {
                q1 - x
            } else if x > q3 {
                x - q3
            } else {
                continue;
            };
            let score = if iqr > 0.0 { excess / iqr } else { f64::INFINITY };
            *s = s.max(score);
        }
    }
    scores
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// FastMCD + SRMD + F cutoff.
    SrmdF,
    /// Component-wise boxplot on every MS coordinate.
    Boxplot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    pub method: Method,
    /// Detection quantile `q` of the SRMD cutoff.
    pub quantile: f64,
    /// Boxplot inflation factor `k`.
    pub inflation: f64,
    /// Random projections for `p >= 2`.
    pub directions: usize,
    pub seed: u64,
    pub cutoff_mode: CutoffMode,
    pub mcd: McdOptions,
    /// Vertices of the 2-D boundary polyline (longitudes of the 3-D mesh);
    /// `None` skips boundary geometry.
    pub boundary_resolution: Option<usize>,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            method: Method::SrmdF,
            quantile: 0.993,
            inflation: 1.5,
            directions: DEFAULT_DIRECTIONS,
            seed: 0,
            cutoff_mode: CutoffMode::HardinRocke,
            mcd: McdOptions::default(),
            boundary_resolution: Some(128),
        }
    }
}

impl DetectConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return Err(Error::DomainError(alloc::format!("quantile {} outside (0, 1)", self.quantile)));
        }
        if !(self.inflation >= 0.0) {
            return Err(Error::DomainError("inflation factor must be nonnegative".into()));
        }
        if self.directions == 0 {
            return Err(Error::DomainError("need at least one projection direction".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub method: Method,
    /// SRMD per curve for [`Method::SrmdF`]; boxplot score for [`Method::Boxplot`].
    pub scores: Vec<f64>,
    pub cutoff: f64,
    /// `flags[i] == (scores[i] > cutoff)`.
    pub flags: Vec<bool>,
    pub fit: Option<RobustFit>,
    pub boundary: Option<Boundary>,
}

impl DetectionResult {
    pub fn flagged(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i)
    }
}

/// Flags outliers among arbitrary points with the configured rule.
pub fn detect_points(points: &Matrix, config: &DetectConfig) -> Result<DetectionResult> {
    config.validate()?;
    match config.method {
        Method::SrmdF => {
            let (n, d) = (points.rows(), points.cols());
            let mut opts = config.mcd.clone();
            opts.seed = substream(config.seed, 0x4D43_44);
            let fit = fast_mcd(points, &opts)?;
            let scores = srmd(points, &fit)?;
            let threshold = cutoff(d, n, fit.h, config.quantile, config.cutoff_mode)?;
            let flags = scores.iter().map(|s| *s > threshold).collect();
            let boundary = match config.boundary_resolution {
                Some(res) if (2..=3).contains(&d) => Some(ellipsoid_boundary(&fit, threshold, res)?),
                _ => None,
            };
            Ok(DetectionResult { method: Method::SrmdF, scores, cutoff: threshold, flags, fit: Some(fit), boundary })
        }
        Method::Boxplot => {
            let scores = boxplot_scores(points);
            let k = config.inflation;
            let flags = scores.iter().map(|s| *s > k).collect();
            Ok(DetectionResult { method: Method::Boxplot, scores, cutoff: k, flags, fit: None, boundary: None })
        }
    }
}

/// Full pipeline: point-wise field, summary, full-mode MS coordinates and
/// the configured detection rule.
pub fn detect_outliers(
    sample: &FunctionalSample,
    config: &DetectConfig,
) -> Result<(OutlyingnessSummary, DetectionResult)> {
    config.validate()?;
    let (n, p) = (sample.n(), sample.p());
    if n <= p + 2 {
        return Err(Error::InsufficientData(alloc::format!(
            "detection needs n > p + 2 (n={n}, p={p})"
        )));
    }
    let dirs = if p >= 2 { Some(sample_directions(config.directions, p, config.seed)?) } else { None };
    let summary = outlyingness(sample, dirs.as_ref())?;
    let coords = ms_coordinates(&summary, MsMode::Full);
    let result = detect_points(&coords, config)?;
    Ok((summary, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn srmd_examples() {
        let fit = RobustFit {
            location: vec![0.0, 0.0],
            scatter: Matrix::identity(2),
            subset: vec![0, 1, 2],
            det: 1.0,
            consistency: 1.0,
            h: 3,
            n: 4,
            d: 2,
        };
        let pts = Matrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let d = srmd(&pts, &fit).unwrap();
        assert_eq!(d[0], 0.0);
        assert!((d[1] - 25.0).abs() < 1e-12);
    }

    #[test]
    fn boxplot_limits() {
        let pts = Matrix::from_rows(&[
            vec![0.0, 1.0],
            vec![1.0, 2.0],
            vec![2.0, 3.0],
            vec![3.0, 4.0],
            vec![4.0, 50.0],
        ])
        .unwrap();
        let scores = boxplot_scores(&pts);
        // column 0: Q1 = 1, Q3 = 3; column 1: Q1 = 2, Q3 = 4, IQR = 2
        assert_eq!(scores[4], 23.0);
        assert_eq!(scores[2], f64::NEG_INFINITY);
        let cfg = |k| DetectConfig { method: Method::Boxplot, inflation: k, ..Default::default() };
        let never = detect_points(&pts, &cfg(f64::INFINITY)).unwrap();
        assert!(never.flags.iter().all(|f| !f));
        let all_outside = detect_points(&pts, &cfg(0.0)).unwrap();
        assert_eq!(all_outside.flags, vec![true, false, false, false, true]);
        let usual = detect_points(&pts, &cfg(1.5)).unwrap();
        assert_eq!(usual.flags, vec![false, false, false, false, true]);
    }

    #[test]
    fn insufficient_curves() {
        let g = crate::fdmodel::uniform_grid(4, 0.0, 1.0).unwrap();
        let s = FunctionalSample::new(
            (0..24).map(|x| x as f64 * 0.37 % 1.0).collect(),
            2,
            g,
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        assert!(matches!(
            detect_outliers(&s, &DetectConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }
}
