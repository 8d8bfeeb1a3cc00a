//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for input and usage errors, 3 for numerical
//! degeneracy (zero-spread cross-sections, singular scatter, covariance
//! factorization failure).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use msplot_core::robustdet::calibrate_df;
use msplot_core::{
    detect_outliers, model_sample, outlyingness, sample_directions, BenchTarget, CutoffMode, DetectConfig, Method,
    ModelSpec, MsMode,
};

use crate::bench::{run_benchmark_parallel, BenchError};
use crate::csvio::{self, CsvError};
use crate::plot::{emit_msplot, emit_msplot_array, emit_outliergram, ArraySummaries, Format, PlotError};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Calibration replications for `--cutoff calibrated`.
const CALIBRATION_REPS: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "msplot", version, about = "Directional outlyingness and MS-plots for functional data")]
pub struct Cli {
    /// Maximum number of worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Compute MO/VO/FO for curves in a long CSV and flag outliers.
    Detect(DetectArgs),
    /// Draw a labeled sample from one of the simulation models.
    Simulate(SimulateArgs),
    /// Estimate correct/false detection rates over seeded replications.
    Bench(BenchArgs),
    /// MS-plot array (marginal and pairwise MS-plots) of multivariate curves.
    Array(ArrayArgs),
    /// Outliergram (|MO|, FO) with the reference parabola.
    Outliergram(OutliergramArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    /// FastMCD + squared robust Mahalanobis distance + F cutoff.
    SrmdF,
    /// Boxplot rule on every MS coordinate.
    Boxplot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffArg {
    /// Scaled F quantile with predicted degrees of freedom.
    HardinRocke,
    /// Scaled F quantile with degrees of freedom fitted on seeded Gaussian runs.
    Calibrated,
    /// Chi-square quantile.
    ChiSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotModeArg {
    /// Full mode when it can be drawn (p = 1), norm mode otherwise.
    Auto,
    Full,
    Norm,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectorArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::SrmdF)]
    pub method: MethodArg,
    /// Detection quantile of the SRMD cutoff.
    #[arg(long, default_value_t = 0.993)]
    pub quantile: f64,
    /// Boxplot inflation factor.
    #[arg(long, default_value_t = 1.5)]
    pub inflation: f64,
    /// Random projection directions for p >= 2.
    #[arg(long, default_value_t = 200)]
    pub directions: usize,
    #[arg(long, value_enum, default_value_t = CutoffArg::HardinRocke)]
    pub cutoff: CutoffArg,
    /// Fixed F degrees of freedom; overrides --cutoff.
    #[arg(long)]
    pub df: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub detector: DetectorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "result.csv")]
    pub out: PathBuf,
    /// Also write the MS-plot as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PlotModeArg::Auto)]
    pub plot_mode: PlotModeArg,
    /// `curve_id,outlier` table used to style marks.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=5))]
    pub model: u32,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Contamination level in [0, 1).
    #[arg(long, default_value_t = 0.1)]
    pub c: f64,
    /// Grid points on [0, 1].
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "sim.csv")]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=5))]
    pub model: u32,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub c: f64,
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "rates.csv")]
    pub out: PathBuf,
    #[arg(long, default_value = "summary.csv")]
    pub summary: PathBuf,
    /// `joint`, or a 1-based dimension for the marginal detector.
    #[arg(long, default_value = "joint")]
    pub target: String,
    #[command(flatten)]
    pub detector: DetectorArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ArrayArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "array.svg")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub directions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct OutliergramArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "og.svg")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub directions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the `id,mo_norm,fo,vo_gap` table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: CsvError },
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Core(#[from] msplot_core::Error),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("cannot write manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let numerical = match self {
            CliError::Core(e) => e.is_numerical(),
            CliError::Plot(PlotError::Core(e)) => e.is_numerical(),
            CliError::Csv { source: CsvError::Sample(e), .. } => e.is_numerical(),
            CliError::Bench(BenchError::Core(e)) => e.is_numerical(),
            _ => false,
        };
        if numerical {
            EXIT_NUMERICAL
        } else {
            EXIT_INPUT
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_sample(path: &Path) -> Result<msplot_core::FunctionalSample, CliError> {
    csvio::parse_long_csv(&read(path)?).map_err(|source| CliError::Csv { path: path.to_path_buf(), source })
}

fn load_truth(path: &Option<PathBuf>, ids: &[String]) -> Result<Option<Vec<bool>>, CliError> {
    path.as_ref()
        .map(|p| csvio::parse_truth_csv(&read(p)?, ids).map_err(|source| CliError::Csv { path: p.clone(), source }))
        .transpose()
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    workers: Option<usize>,
    #[serde(flatten)]
    command: &'a Command,
    derived: serde_json::Value,
    outputs: Vec<String>,
}

/// Path of the run manifest written next to `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest(cli: &Cli, out: &Path, derived: serde_json::Value, outputs: &[&Path]) -> Result<(), CliError> {
    let manifest = Manifest {
        tool: "msplot",
        version: env!("CARGO_PKG_VERSION"),
        workers: cli.workers,
        command: &cli.command,
        derived,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write(&manifest_path(out), text)
}

fn validate_detector(d: &DetectorArgs) -> Result<(), CliError> {
    if !(d.quantile > 0.0 && d.quantile < 1.0) {
        return Err(CliError::Usage(format!("--quantile must lie in (0, 1), got {}", d.quantile)));
    }
    if !(d.inflation > 0.0 && d.inflation.is_finite()) {
        return Err(CliError::Usage(format!("--inflation must be positive, got {}", d.inflation)));
    }
    if d.directions == 0 {
        return Err(CliError::Usage("--directions must be at least 1".into()));
    }
    if let Some(df) = d.df {
        if !(df > 0.0) {
            return Err(CliError::Usage(format!("--df must be positive, got {df}")));
        }
    }
    Ok(())
}

/// Detector configuration for `d`-dimensional MS coordinates of `n` curves.
fn detect_config(args: &DetectorArgs, seed: u64, n: usize, d: usize) -> Result<DetectConfig, CliError> {
    validate_detector(args)?;
    let cutoff_mode = match (args.df, args.cutoff) {
        (Some(nu), _) => CutoffMode::FixedDf(nu),
        (None, CutoffArg::HardinRocke) => CutoffMode::HardinRocke,
        (None, CutoffArg::ChiSquare) => CutoffMode::ChiSquare,
        (None, CutoffArg::Calibrated) => {
            CutoffMode::FixedDf(calibrate_df(d, n, None, args.quantile, CALIBRATION_REPS, seed)?)
        }
    };
    Ok(DetectConfig {
        method: match args.method {
            MethodArg::SrmdF => Method::SrmdF,
            MethodArg::Boxplot => Method::Boxplot,
        },
        quantile: args.quantile,
        inflation: args.inflation,
        directions: args.directions,
        seed,
        cutoff_mode,
        ..DetectConfig::default()
    })
}

fn cutoff_json(mode: CutoffMode) -> serde_json::Value {
    match mode {
        CutoffMode::HardinRocke => serde_json::json!({ "mode": "hardin-rocke" }),
        CutoffMode::ChiSquare => serde_json::json!({ "mode": "chi-square" }),
        CutoffMode::FixedDf(nu) => serde_json::json!({ "mode": "fixed-df", "df": nu }),
    }
}

fn detect(cli: &Cli, args: &DetectArgs) -> Result<(), CliError> {
    let sample = load_sample(&args.input)?;
    let truth = load_truth(&args.truth, sample.ids())?;
    let config = detect_config(&args.detector, args.seed, sample.n(), sample.p() + 1)?;
    let (summary, result) = detect_outliers(&sample, &config)?;
    write(&args.out, csvio::write_result_csv(sample.ids(), &summary, &result))?;
    let mut outputs = vec![args.out.as_path()];
    if let Some(svg) = &args.svg {
        let mode = match args.plot_mode {
            PlotModeArg::Full => MsMode::Full,
            PlotModeArg::Norm => MsMode::Norm,
            PlotModeArg::Auto if sample.p() == 1 => MsMode::Full,
            PlotModeArg::Auto => MsMode::Norm,
        };
        let doc = emit_msplot(sample.ids(), &summary, Some(&result), truth.as_deref(), mode, Format::Svg)?;
        write(svg, &doc.payload)?;
        outputs.push(svg);
    }
    let derived = serde_json::json!({
        "n": sample.n(),
        "m": sample.m(),
        "p": sample.p(),
        "cutoff": cutoff_json(config.cutoff_mode),
        "threshold": result.cutoff,
        "flagged": result.flagged().count(),
    });
    write_manifest(cli, &args.out, derived, &outputs)
}

fn check_model(n: usize, c: f64, m: usize) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&c) {
        return Err(CliError::Usage(format!("--c must lie in [0, 1), got {c}")));
    }
    if n < 1 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if m < 2 {
        return Err(CliError::Usage("--m must be at least 2".into()));
    }
    Ok(())
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> Result<(), CliError> {
    check_model(args.n, args.c, args.m)?;
    let spec = ModelSpec { m: args.m, ..ModelSpec::new(args.model, args.n, args.c, args.seed) };
    let labeled = model_sample(&spec)?;
    write(&args.out, csvio::write_long_csv(&labeled.sample))?;
    let mut outputs = vec![args.out.as_path()];
    if let Some(path) = &args.truth {
        write(path, csvio::write_truth_csv(labeled.sample.ids(), &labeled.truth))?;
        outputs.push(path);
    }
    let derived = serde_json::json!({
        "p": labeled.sample.p(),
        "contaminated": labeled.outlier_count(),
    });
    write_manifest(cli, &args.out, derived, &outputs)
}

fn parse_target(s: &str) -> Result<BenchTarget, CliError> {
    if s == "joint" {
        return Ok(BenchTarget::Joint);
    }
    match s.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(BenchTarget::Marginal(k - 1)),
        _ => Err(CliError::Usage(format!("--target must be `joint` or a dimension 1..=p, got {s:?}"))),
    }
}

fn bench(cli: &Cli, args: &BenchArgs) -> Result<(), CliError> {
    check_model(args.n, args.c, args.m)?;
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let target = parse_target(&args.target)?;
    let p = if args.model == 5 { 2 } else { 1 };
    if let BenchTarget::Marginal(k) = target {
        if k >= p {
            return Err(CliError::Usage(format!("model {} has {p} dimension(s); --target {} is out of range", args.model, k + 1)));
        }
    }
    let d = match target {
        BenchTarget::Joint => p + 1,
        BenchTarget::Marginal(_) => 2,
    };
    let config = detect_config(&args.detector, args.seed, args.n, d)?;
    let spec = ModelSpec { m: args.m, ..ModelSpec::new(args.model, args.n, args.c, args.seed) };
    let summary = run_benchmark_parallel(&spec, &config, target, args.reps, cli.workers)?;
    write(&args.out, csvio::write_rates_csv(&summary))?;
    write(&args.summary, csvio::write_summary_csv(&summary))?;
    let derived = serde_json::json!({
        "cutoff": cutoff_json(config.cutoff_mode),
        "mean_p_c": summary.pc_stats.mean,
        "mean_p_f": summary.pf_stats.mean,
    });
    write_manifest(cli, &args.out, derived, &[&args.out, &args.summary])
}

fn array(cli: &Cli, args: &ArrayArgs) -> Result<(), CliError> {
    if args.directions == 0 {
        return Err(CliError::Usage("--directions must be at least 1".into()));
    }
    let sample = load_sample(&args.input)?;
    let truth = load_truth(&args.truth, sample.ids())?;
    let summaries = ArraySummaries::compute(&sample, args.directions, args.seed)?;
    let config = DetectConfig { directions: args.directions, seed: args.seed, boundary_resolution: None, ..DetectConfig::default() };
    let (_, result) = detect_outliers(&sample, &config)?;
    let doc = emit_msplot_array(sample.ids(), &summaries, Some(&result.flags), truth.as_deref())?;
    write(&args.out, &doc.payload)?;
    let derived = serde_json::json!({ "p": sample.p(), "panels": sample.p() * sample.p(), "flagged": result.flagged().count() });
    write_manifest(cli, &args.out, derived, &[&args.out])
}

fn outliergram(cli: &Cli, args: &OutliergramArgs) -> Result<(), CliError> {
    if args.directions == 0 {
        return Err(CliError::Usage("--directions must be at least 1".into()));
    }
    let sample = load_sample(&args.input)?;
    let dirs = if sample.p() >= 2 { Some(sample_directions(args.directions, sample.p(), args.seed)?) } else { None };
    let summary = outlyingness(&sample, dirs.as_ref())?;
    let doc = emit_outliergram(sample.ids(), &summary, None, Format::Svg)?;
    write(&args.out, &doc.payload)?;
    let mut outputs = vec![args.out.as_path()];
    if let Some(path) = &args.csv {
        write(path, &emit_outliergram(sample.ids(), &summary, None, Format::Csv)?.payload)?;
        outputs.push(path);
    }
    write_manifest(cli, &args.out, serde_json::json!({ "n": sample.n() }), &outputs)
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if cli.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    match &cli.command {
        Command::Detect(a) => detect(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::Bench(a) => bench(cli, a),
        Command::Array(a) => array(cli, a),
        Command::Outliergram(a) => outliergram(cli, a),
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults_match_documentation() {
        let cli = Cli::try_parse_from(["msplot", "detect", "--input", "x.csv"]).unwrap();
        let Command::Detect(a) = cli.command else { panic!() };
        assert_eq!(a.detector.quantile, 0.993);
        assert_eq!(a.detector.inflation, 1.5);
        assert_eq!(a.detector.directions, 200);
        assert_eq!(a.detector.method, MethodArg::SrmdF);
        assert_eq!(a.out, PathBuf::from("result.csv"));
    }

    #[test]
    fn targets() {
        assert_eq!(parse_target("joint").unwrap(), BenchTarget::Joint);
        assert_eq!(parse_target("2").unwrap(), BenchTarget::Marginal(1));
        assert!(parse_target("0").is_err());
        assert!(parse_target("x").is_err());
    }

    #[test]
    fn exit_code_partition() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_INPUT);
        assert_eq!(CliError::Core(msplot_core::Error::SingularScatter).exit_code(), EXIT_NUMERICAL);
        assert_eq!(CliError::Core(msplot_core::Error::UnknownModel(7)).exit_code(), EXIT_INPUT);
        let e = CliError::Csv {
            path: "a".into(),
            source: CsvError::Sample(msplot_core::Error::DegenerateCrossSection { index: 0 }),
        };
        assert_eq!(e.exit_code(), EXIT_NUMERICAL);
    }

    #[test]
    fn manifest_name() {
        assert_eq!(manifest_path(Path::new("out/r.csv")), PathBuf::from("out/r.csv.manifest.json"));
    }
}
