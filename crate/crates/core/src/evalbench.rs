//! Correct/false detection rates and seeded replication benchmarks.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fdmodel::LabeledSample;
use crate::rng::substream;
use crate::robustdet::{detect_outliers, DetectConfig};
use crate::simulate::{ModelGenerator, ModelSpec};
use crate::stats::FiveNum;

/// `(p_c, p_f)`: share of true outliers flagged and share of non-outliers flagged.
/// With no true outliers `p_c = 1`; with no non-outliers `p_f = 0`.
pub fn detection_rates(flags: &[bool], truth: &[bool]) -> Result<(f64, f64)> {
    if flags.len() != truth.len() {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} flags for {} truth labels",
            flags.len(),
            truth.len()
        )));
    }
    let (mut outliers, mut found, mut inliers, mut false_hits) = (0usize, 0usize, 0usize, 0usize);
    for (&f, &t) in flags.iter().zip(truth) {
        if t {
            outliers += 1;
            found += usize::from(f);
        } else {
            inliers += 1;
            false_hits += usize::from(f);
        }
    }
    let pc = if outliers == 0 { 1.0 } else { found as f64 / outliers as f64 };
    let pf = if inliers == 0 { 0.0 } else { false_hits as f64 / inliers as f64 };
    Ok((pc, pf))
}

/// Which response dimensions the detector sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchTarget {
    /// All dimensions jointly.
    Joint,
    /// Only response dimension `k` (0-based).
    Marginal(usize),
}

/// Per-replication rates and their summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSummary {
    pub spec: ModelSpec,
    pub config: DetectConfig,
    pub target: BenchTarget,
    pub pc: Vec<f64>,
    pub pf: Vec<f64>,
    pub pc_stats: FiveNum,
    pub pf_stats: FiveNum,
}

impl RateSummary {
    pub fn from_rates(spec: ModelSpec, config: DetectConfig, target: BenchTarget, rates: &[(f64, f64)]) -> Self {
        let pc: Vec<f64> = rates.iter().map(|r| r.0).collect();
        let pf: Vec<f64> = rates.iter().map(|r| r.1).collect();
        let pc_stats = FiveNum::of(&pc);
        let pf_stats = FiveNum::of(&pf);
        RateSummary { spec, config, target, pc, pf, pc_stats, pf_stats }
    }

    pub fn reps(&self) -> usize {
        self.pc.len()
    }
}

/// Seed of replication `rep` under benchmark seed `seed`.
pub fn replication_seed(seed: u64, rep: usize) -> u64 {
    substream(seed, rep as u64)
}

/// Scores the detector on one labeled sample.
pub fn score_sample(labeled: &LabeledSample, config: &DetectConfig, target: BenchTarget) -> Result<(f64, f64)> {
    let (_, result) = match target {
        BenchTarget::Joint => detect_outliers(&labeled.sample, config)?,
        BenchTarget::Marginal(k) => detect_outliers(&labeled.sample.select_dims(&[k])?, config)?,
    };
    detection_rates(&result.flags, &labeled.truth)
}

/// Replication `rep`: draws the sample from its substream and scores it.
/// Errors are tagged with the replication index.
pub fn run_replication(
    generator: &ModelGenerator,
    spec: &ModelSpec,
    config: &DetectConfig,
    target: BenchTarget,
    rep: usize,
) -> Result<(f64, f64)> {
    let seed = replication_seed(spec.seed, rep);
    let mut cfg = config.clone();
    cfg.seed = substream(seed, u64::MAX);
    generator
        .generate(spec.n, spec.c, seed)
        .and_then(|labeled| score_sample(&labeled, &cfg, target))
        .map_err(|e| Error::Replication { index: rep, source: Box::new(e) })
}

/// Runs `reps` replications sequentially. `spec.seed` is the base seed.
pub fn run_benchmark(spec: &ModelSpec, config: &DetectConfig, target: BenchTarget, reps: usize) -> Result<RateSummary> {
    if reps == 0 {
        return Err(Error::DomainError("benchmark needs at least one replication".into()));
    }
    let generator = ModelGenerator::new(spec.model, spec.m)?;
    let mut cfg = config.clone();
    cfg.boundary_resolution = None;
    let rates = (0..reps)
        .map(|r| run_replication(&generator, spec, &cfg, target, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateSummary::from_rates(*spec, config.clone(), target, &rates))
}
