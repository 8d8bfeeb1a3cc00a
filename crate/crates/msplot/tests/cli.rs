use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use msplot::csvio::{parse_long_csv, parse_numeric_table};
use msplot_core::{model_sample, ModelSpec};

fn msplot(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_msplot")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn p(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn simulate(dir: &Path, model: &str, n: &str, seed: &str) -> (PathBuf, PathBuf) {
    let (data, truth) = (p(dir, &format!("sim{model}.csv")), p(dir, &format!("truth{model}.csv")));
    let (code, err) = msplot(&[
        "simulate", "--model", model, "--n", n, "--c", "0.1", "--m", "30", "--seed", seed, "--out", s(&data), "--truth", s(&truth),
    ]);
    assert_eq!(code, 0, "{err}");
    (data, truth)
}

#[test]
fn simulated_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (data, truth) = simulate(dir.path(), "5", "20", "9");
    let parsed = parse_long_csv(&fs::read_to_string(&data).unwrap()).unwrap();
    let spec = ModelSpec { m: 30, ..ModelSpec::new(5, 20, 0.1, 9) };
    let original = model_sample(&spec).unwrap();
    assert_eq!(parsed.values(), original.sample.values());
    assert_eq!(parsed.ids(), original.sample.ids());
    let t: Vec<f64> = parsed.grid().first_coords().collect();
    let t0: Vec<f64> = original.sample.grid().first_coords().collect();
    assert_eq!(t, t0);
    let truth_text = fs::read_to_string(truth).unwrap();
    assert_eq!(truth_text.lines().filter(|l| l.ends_with(",1")).count(), 2);
}

#[test]
fn detect_writes_results_plot_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (data, truth) = simulate(dir.path(), "1", "60", "3");
    let (out, svg) = (p(dir.path(), "result.csv"), p(dir.path(), "plot.svg"));
    let args = ["detect", "--input", s(&data), "--seed", "4", "--out", s(&out), "--svg", s(&svg), "--truth", s(&truth)];
    let (code, err) = msplot(&args);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("curve_id,mo_1,vo,fo,srmd,flagged\n"));
    let (_, rows) = parse_numeric_table(&text, 1).unwrap();
    assert_eq!(rows.len(), 60);
    let svg_text = fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&svg_text).unwrap();
    let marks = doc.descendants().filter(|n| n.attribute("class").is_some_and(|c| c.starts_with("mark "))).count();
    assert_eq!(marks, 60);
    assert!(doc.descendants().any(|n| n.has_tag_name("polygon") && n.attribute("class") == Some("boundary")));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(p(dir.path(), "result.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["detect"]["detector"]["quantile"], 0.993);
    assert_eq!(manifest["detect"]["detector"]["directions"], 200);
    assert_eq!(manifest["detect"]["detector"]["method"], "srmd-f");
    assert_eq!(manifest["derived"]["n"], 60);

    // identical flags give byte-identical outputs
    let first = (fs::read(&out).unwrap(), fs::read(&svg).unwrap());
    assert_eq!(msplot(&args).0, 0);
    assert_eq!(first, (fs::read(&out).unwrap(), fs::read(&svg).unwrap()));
}

#[test]
fn detect_boxplot_and_multivariate() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = simulate(dir.path(), "5", "40", "8");
    let out = p(dir.path(), "r.csv");
    let svg = p(dir.path(), "r.svg");
    let (code, err) = msplot(&["detect", "--input", s(&data), "--method", "boxplot", "--out", s(&out), "--svg", s(&svg)]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("curve_id,mo_1,mo_2,vo,fo,srmd,flagged\n"));
    let (code, err) = msplot(&["detect", "--input", s(&data), "--out", s(&out), "--svg", s(&svg), "--plot-mode", "full"]);
    assert_eq!(code, 0, "{err}");
    let (code, err) = msplot(&["detect", "--input", s(&data), "--out", s(&out), "--cutoff", "chi-square"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = p(dir.path(), "ragged.csv");
    fs::write(&ragged, "curve_id,t,dim_1\na,0,1\na,1,2\na,2,2\nb,0,3\nb,1,4\n").unwrap();
    let (code, err) = msplot(&["detect", "--input", s(&ragged), "--out", s(&p(dir.path(), "o.csv"))]);
    assert_eq!(code, 2);
    assert!(err.contains("ragged"), "{err}");

    let bad = p(dir.path(), "bad.csv");
    fs::write(&bad, "curve_id,t,dim_1\na,0,1\na,1,oops\n").unwrap();
    let (code, err) = msplot(&["detect", "--input", s(&bad)]);
    assert_eq!(code, 2);
    assert!(err.contains("line 3"), "{err}");

    assert_eq!(msplot(&["detect", "--input", s(&p(dir.path(), "missing.csv"))]).0, 2);
    assert_eq!(msplot(&["simulate", "--model", "6"]).0, 2);
    assert_eq!(msplot(&["simulate", "--model", "1", "--c", "1.5", "--out", s(&p(dir.path(), "x.csv"))]).0, 2);
    let (data, _) = simulate(dir.path(), "1", "30", "1");
    assert_eq!(msplot(&["detect", "--input", s(&data), "--quantile", "1.2"]).0, 2);
    assert_eq!(msplot(&["detect", "--input", s(&data), "--inflation", "0"]).0, 2);
    assert_eq!(msplot(&["detect", "--input", s(&data), "--directions", "0"]).0, 2);
    assert_eq!(msplot(&["array", "--input", s(&data), "--out", s(&p(dir.path(), "a.svg"))]).0, 2);
    assert_eq!(msplot(&["--help"]).0, 0);
}

#[test]
fn degenerate_data_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let flat = p(dir.path(), "flat.csv");
    let mut text = String::from("curve_id,t,dim_1\n");
    for i in 0..10 {
        text.push_str(&format!("c{i},0,1\nc{i},1,{i}\n"));
    }
    fs::write(&flat, text).unwrap();
    let (code, err) = msplot(&["detect", "--input", s(&flat), "--out", s(&p(dir.path(), "o.csv"))]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn bench_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, tag: &str| {
        let (rates, summary) = (p(dir.path(), &format!("rates{tag}.csv")), p(dir.path(), &format!("summary{tag}.csv")));
        let (code, err) = msplot(&[
            "bench", "--model", "2", "--n", "50", "--m", "30", "--reps", "6", "--seed", "5", "--workers", workers, "--out", s(&rates),
            "--summary", s(&summary),
        ]);
        assert_eq!(code, 0, "{err}");
        (fs::read_to_string(rates).unwrap(), fs::read_to_string(summary).unwrap())
    };
    let one = run("1", "a");
    let four = run("4", "b");
    assert_eq!(one, four);
    assert!(one.0.starts_with("rep,p_c,p_f\n"));
    assert_eq!(one.0.lines().count(), 7);
    assert!(one.1.starts_with("statistic,value\n"));
    assert!(one.1.contains("p_c_mean,"));

    let (code, _) = msplot(&["bench", "--model", "1", "--target", "2", "--reps", "1", "--out", s(&p(dir.path(), "z.csv"))]);
    assert_eq!(code, 2);
}

#[test]
fn array_and_outliergram() {
    let dir = tempfile::tempdir().unwrap();
    let (data, truth) = simulate(dir.path(), "5", "30", "2");
    let out = p(dir.path(), "array.svg");
    let (code, err) = msplot(&["array", "--input", s(&data), "--out", s(&out), "--truth", s(&truth)]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    let panels: Vec<_> = doc.descendants().filter(|n| n.attribute("class") == Some("panel")).collect();
    assert_eq!(panels.len(), 4);
    for panel in panels {
        let marks = panel.descendants().filter(|n| n.attribute("class").is_some_and(|c| c.starts_with("mark "))).count();
        assert_eq!(marks, 30);
    }

    let (og, og_csv) = (p(dir.path(), "og.svg"), p(dir.path(), "og.csv"));
    let (code, err) = msplot(&["outliergram", "--input", s(&data), "--out", s(&og), "--csv", s(&og_csv)]);
    assert_eq!(code, 0, "{err}");
    roxmltree::Document::parse(&fs::read_to_string(&og).unwrap()).unwrap();
    let (header, rows) = parse_numeric_table(&fs::read_to_string(&og_csv).unwrap(), 1).unwrap();
    assert_eq!(header, ["id", "mo_norm", "fo", "vo_gap"]);
    assert_eq!(rows.len(), 30);
    assert!(p(dir.path(), "og.svg.manifest.json").exists());
}
