//! FastMCD: elemental starts, C-step refinement and the final consistency
//! rescaling of the minimum-determinant subset covariance.

use alloc::vec::Vec;

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{subset_mean_cov, Cholesky, Matrix};
use crate::rng::{rng_from_seed, substream};
use crate::special::{chi2_cdf, chi2_quantile};

/// Upper bound on C-steps while refining a candidate to convergence.
const MAX_REFINE_STEPS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct McdOptions {
    /// Subset size; `None` selects `floor((n + d + 1) / 2)`.
    pub h: Option<usize>,
    pub n_starts: usize,
    pub keep_best: usize,
    /// C-steps applied to every start before ranking.
    pub initial_steps: usize,
    pub seed: u64,
}

impl Default for McdOptions {
    fn default() -> Self {
        McdOptions { h: None, n_starts: 500, keep_best: 10, initial_steps: 2, seed: 0 }
    }
}

/// Default subset size `floor((n + d + 1) / 2)`.
pub fn default_h(n: usize, d: usize) -> usize {
    (n + d + 1) / 2
}

/// Minimum covariance determinant fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustFit {
    pub location: Vec<f64>,
    /// Subset covariance times [`consistency_factor`].
    pub scatter: Matrix,
    /// Selected subset, ascending.
    pub subset: Vec<usize>,
    /// Determinant of the raw (unscaled) subset covariance.
    pub det: f64,
    pub consistency: f64,
    pub h: usize,
    pub n: usize,
    pub d: usize,
}

/// Progress notifications emitted by [`fast_mcd_observed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McdEvent {
    /// Start `start` was inflated to an `h`-subset with this covariance determinant.
    Inflated { start: usize, det: f64 },
    /// One C-step on a candidate of start `start`.
    CStep { start: usize, old: f64, new: f64 },
}

/// Gaussian consistency factor `(h/n) / P(chi2_{d+2} <= chi2_{d}^{-1}(h/n))`.
pub fn consistency_factor(n: usize, d: usize, h: usize) -> f64 {
    if h >= n {
        return 1.0;
    }
    let frac = h as f64 / n as f64;
    let q = chi2_quantile(frac, d as f64);
    frac / chi2_cdf(q, (d + 2) as f64)
}

/// Mean, covariance factorization and covariance determinant of a subset.
struct SubsetFit {
    mean: Vec<f64>,
    chol: Cholesky,
    det: f64,
}

fn fit_subset(points: &Matrix, subset: &[usize]) -> Result<SubsetFit> {
    let (mean, cov) = subset_mean_cov(points, subset);
    let chol = Cholesky::new(&cov).map_err(|_| Error::SingularScatter)?;
    let det = chol.det();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::SingularScatter);
    }
    Ok(SubsetFit { mean, chol, det })
}

/// Indices of the `h` points closest to `fit` in Mahalanobis distance,
/// ascending; ties go to the lower index.
fn closest(points: &Matrix, fit: &SubsetFit, h: usize) -> Vec<usize> {
    let mut dev = Vec::with_capacity(points.cols());
    let mut scratch = Vec::with_capacity(points.cols());
    let mut dist: Vec<(f64, usize)> = points
        .iter_rows()
        .enumerate()
        .map(|(i, row)| {
            dev.clear();
            dev.extend(row.iter().zip(&fit.mean).map(|(x, m)| x - m));
            (fit.chol.quad_form(&dev, &mut scratch), i)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<usize> = dist[..h].iter().map(|&(_, i)| i).collect();
    out.sort_unstable();
    out
}

/// One concentration step: the `h` points with the smallest Mahalanobis
/// distances w.r.t. the mean and covariance of `subset`, where `h = subset.len()`.
pub fn c_step(points: &Matrix, subset: &[usize]) -> Result<Vec<usize>> {
    check_subset(points, subset)?;
    let fit = fit_subset(points, subset)?;
    Ok(closest(points, &fit, subset.len()))
}

fn check_subset(points: &Matrix, subset: &[usize]) -> Result<()> {
    let n = points.rows();
    if subset.is_empty() || subset.len() > n || subset.iter().any(|&i| i >= n) {
        return Err(Error::ShapeMismatch("subset indices out of range".into()));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::ShapeMismatch("subset indices must be distinct".into()));
    }
    Ok(())
}

struct Candidate {
    start: usize,
    subset: Vec<usize>,
    det: f64,
}

/// C-steps from `subset` until the subset repeats, the determinant stops
/// decreasing, or `max_steps` is reached.
fn concentrate(
    points: &Matrix,
    start: usize,
    mut subset: Vec<usize>,
    max_steps: usize,
    observer: &mut dyn FnMut(McdEvent),
) -> Result<Candidate> {
    let h = subset.len();
    let mut fit = fit_subset(points, &subset)?;
    for _ in 0..max_steps {
        let next = closest(points, &fit, h);
        if next == subset {
            observer(McdEvent::CStep { start, old: fit.det, new: fit.det });
            break;
        }
        let next_fit = fit_subset(points, &next)?;
        observer(McdEvent::CStep { start, old: fit.det, new: next_fit.det });
        if !(next_fit.det < fit.det) {
            break;
        }
        subset = next;
        fit = next_fit;
    }
    Ok(Candidate { start, subset, det: fit.det })
}

/// Draws a `(d+1)`-point elemental set (grown while singular) and inflates it
/// to the `h` closest points.
fn elemental_start(points: &Matrix, h: usize, seed: u64) -> Option<Vec<usize>> {
    let n = points.rows();
    let d = points.cols();
    let mut rng = rng_from_seed(seed);
    let mut chosen: Vec<usize> = sample_indices(&mut rng, n, d + 1).into_vec();
    loop {
        if let Ok(fit) = fit_subset(points, &chosen) {
            return Some(closest(points, &fit, h));
        }
        if chosen.len() >= n {
            return None;
        }
        let remaining: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
        chosen.push(remaining[rng.random_range(0..remaining.len())]);
    }
}

/// FastMCD with default observer (none).
pub fn fast_mcd(points: &Matrix, opts: &McdOptions) -> Result<RobustFit> {
    fast_mcd_observed(points, opts, &mut |_| {})
}

/// FastMCD reporting every inflation and C-step to `observer`.
///
/// Each start `s` draws from substream `(opts.seed, s)`, so the result does
/// not depend on the order in which starts are evaluated.
pub fn fast_mcd_observed(
    points: &Matrix,
    opts: &McdOptions,
    observer: &mut dyn FnMut(McdEvent),
) -> Result<RobustFit> {
    let n = points.rows();
    let d = points.cols();
    if d == 0 || n <= d + 1 {
        return Err(Error::InsufficientData(alloc::format!(
            "FastMCD needs n > d + 1 (n={n}, d={d})"
        )));
    }
    let h = opts.h.unwrap_or_else(|| default_h(n, d));
    if h < d + 1 || h > n {
        return Err(Error::InsufficientData(alloc::format!(
            "subset size h={h} outside [{}, {n}]",
            d + 1
        )));
    }
    if opts.n_starts == 0 {
        return Err(Error::DomainError("n_starts must be positive".into()));
    }

    let mut candidates: Vec<Candidate> = Vec::with_capacity(opts.n_starts);
    for start in 0..opts.n_starts {
        let Some(subset) = elemental_start(points, h, substream(opts.seed, start as u64)) else {
            continue;
        };
        let Ok(fit) = fit_subset(points, &subset) else {
            continue;
        };
        observer(McdEvent::Inflated { start, det: fit.det });
        if let Ok(c) = concentrate(points, start, subset, opts.initial_steps, observer) {
            candidates.push(c);
        }
    }
    if candidates.is_empty() {
        return Err(Error::SingularScatter);
    }
    candidates.sort_by(|a, b| a.det.total_cmp(&b.det).then(a.start.cmp(&b.start)));
    candidates.truncate(opts.keep_best.max(1));

    let mut best: Option<Candidate> = None;
    for cand in candidates {
        let Ok(refined) = concentrate(points, cand.start, cand.subset, MAX_REFINE_STEPS, observer) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some(b) => refined.det < b.det || (refined.det == b.det && refined.start < b.start),
        };
        if better {
            best = Some(refined);
        }
    }
    let best = best.ok_or(Error::SingularScatter)?;
    finish(points, best.subset, h)
}

fn finish(points: &Matrix, subset: Vec<usize>, h: usize) -> Result<RobustFit> {
    let n = points.rows();
    let d = points.cols();
    let (location, mut scatter) = subset_mean_cov(points, &subset);
    let det = Cholesky::new(&scatter).map_err(|_| Error::SingularScatter)?.det();
    let consistency = consistency_factor(n, d, h);
    scatter.scale(consistency);
    Ok(RobustFit { location, scatter, subset, det, consistency, h, n, d })
}

/// Exhaustive MCD over all `C(n, h)` subsets. Only sensible for tiny `n`.
pub fn exhaustive_mcd(points: &Matrix, h: usize) -> Result<RobustFit> {
    let n = points.rows();
    if h == 0 || h > n {
        return Err(Error::InsufficientData("h outside [1, n]".into()));
    }
    let mut idx: Vec<usize> = (0..h).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        if let Ok(fit) = fit_subset(points, &idx) {
            if best.as_ref().map_or(true, |(det, _)| fit.det < *det) {
                best = Some((fit.det, idx.clone()));
            }
        }
        // next combination in lexicographic order
        let mut k = h;
        while k > 0 && idx[k - 1] == n - h + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        for r in k..h {
            idx[r] = idx[r - 1] + 1;
        }
    }
    let (_, subset) = best.ok_or(Error::SingularScatter)?;
    finish(points, subset, h)
}
