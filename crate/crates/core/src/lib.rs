//! Functional directional outlyingness for univariate and multivariate
//! functional data.
//!
//! The crate turns a discretized sample of curves into per-curve mean
//! directional outlyingness (MO), variation of directional outlyingness (VO)
//! and total functional outlyingness (FO), linked by `FO = |MO|^2 + VO`.
//! Outliers are flagged on the `(MO, VO)` points with a FastMCD-based squared
//! robust Mahalanobis distance and an F-distribution cutoff, or with a
//! component-wise boxplot rule.
//!
//! Everything here is `no_std` + `alloc`; file formats, plotting and the
//! command-line tool live in the `msplot` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod evalbench;
pub mod fdmodel;
pub mod functional;
pub mod linalg;
pub mod pointwise;
pub mod rng;
pub mod robustdet;
pub mod simulate;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use evalbench::{detection_rates, run_benchmark, BenchTarget, RateSummary};
pub use fdmodel::{equal_weights, trapezoid_grid, uniform_grid, FunctionalSample, Grid, LabeledSample};
pub use functional::{ms_coordinates, outlyingness, summarize, MsMode, OutlyingnessSummary};
pub use linalg::Matrix;
pub use pointwise::{
    deepest_point, directional_outlyingness_1d, pointwise_field, sample_directions, sdo_md,
    DirectionSet, PointwiseField, DEFAULT_DIRECTIONS,
};
pub use robustdet::{
    c_step, cutoff, detect_outliers, detect_points, ellipsoid_boundary, fast_mcd, srmd, Boundary, CutoffMode,
    DetectConfig, DetectionResult, Method, McdOptions, RobustFit,
};
pub use simulate::{bessel_k, gp_sample, matern, model_sample, MaternParams, ModelGenerator, ModelSpec};
