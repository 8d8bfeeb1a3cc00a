//! Replications spread over a thread pool.

use msplot_core::evalbench::run_replication;
use msplot_core::{BenchTarget, DetectConfig, ModelGenerator, ModelSpec, RateSummary};
use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] msplot_core::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Same result as [`msplot_core::run_benchmark`] for any `workers`; `None`
/// uses one worker per core.
pub fn run_benchmark_parallel(
    spec: &ModelSpec,
    config: &DetectConfig,
    target: BenchTarget,
    reps: usize,
    workers: Option<usize>,
) -> Result<RateSummary, BenchError> {
    if reps == 0 {
        return Err(msplot_core::Error::DomainError("benchmark needs at least one replication".into()).into());
    }
    let generator = ModelGenerator::new(spec.model, spec.m)?;
    let mut cfg = config.clone();
    cfg.boundary_resolution = None;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build()?;
    let results: Vec<_> = pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map(|r| run_replication(&generator, spec, &cfg, target, r))
            .collect()
    });
    let rates = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(RateSummary::from_rates(*spec, config.clone(), target, &rates))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_serial_run() {
        let spec = ModelSpec::new(2, 50, 0.1, 77);
        let cfg = DetectConfig::default();
        let serial = msplot_core::run_benchmark(&spec, &cfg, BenchTarget::Joint, 5).unwrap();
        for workers in [Some(1), Some(3), None] {
            let par = run_benchmark_parallel(&spec, &cfg, BenchTarget::Joint, 5, workers).unwrap();
            assert_eq!(par, serial);
        }
    }
}
