use msplot::csvio::parse_numeric_table;
use msplot::plot::{emit_msplot, emit_msplot_array, emit_outliergram, ArraySummaries, Format, PlotError};
use msplot_core::*;
use proptest::prelude::*;

fn mark_count(node: roxmltree::Node) -> usize {
    node.descendants().filter(|n| n.attribute("class").is_some_and(|c| c.starts_with("mark "))).count()
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("curve {i}")).collect()
}

fn points_of(attr: &str) -> Vec<(f64, f64)> {
    attr.split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

#[test]
fn identity_boundary_is_the_unit_circle() {
    let mo = Matrix::from_vec(4, 1, vec![-2.0, 0.5, 1.0, 3.0]).unwrap();
    let summary = OutlyingnessSummary { mo, vo: vec![0.0, 0.25, 2.0, 1.0], fo: vec![4.0, 0.5, 3.0, 10.0] };
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
    let pts = ms_coordinates(&summary, MsMode::Full);
    let scores = srmd(&pts, &fit).unwrap();
    let flags = scores.iter().map(|s| *s > 1.0).collect();
    let det = DetectionResult {
        method: Method::SrmdF,
        scores,
        cutoff: 1.0,
        flags,
        boundary: Some(ellipsoid_boundary(&fit, 1.0, 90).unwrap()),
        fit: Some(fit),
    };
    let doc = emit_msplot(&ids(4), &summary, Some(&det), None, MsMode::Full, Format::Svg).unwrap();
    let xml = roxmltree::Document::parse(doc.as_str()).unwrap();
    let panel = xml.descendants().find(|n| n.attribute("class") == Some("panel")).unwrap();
    let get = |k: &str| panel.attribute(k).unwrap().parse::<f64>().unwrap();
    let (xmin, xmax, ymin, ymax) = (get("data-xmin"), get("data-xmax"), get("data-ymin"), get("data-ymax"));
    let rect = panel.descendants().find(|n| n.attribute("class") == Some("axis")).unwrap();
    let r = |k: &str| rect.attribute(k).unwrap().parse::<f64>().unwrap();
    let (x0, y0, w, h) = (r("x"), r("y"), r("width"), r("height"));
    let boundary = panel.descendants().find(|n| n.attribute("class") == Some("boundary")).unwrap();
    let verts = points_of(boundary.attribute("points").unwrap());
    assert_eq!(verts.len(), 90);
    for (px, py) in verts {
        let x = xmin + (px - x0) / w * (xmax - xmin);
        let y = ymax - (py - y0) / h * (ymax - ymin);
        assert!(((x * x + y * y).sqrt() - 1.0).abs() < 0.01, "({x}, {y})");
    }
    assert_eq!(mark_count(xml.root()), 4);
}

#[test]
fn shifted_curves_have_large_mo_and_small_vo() {
    let labeled = model_sample(&ModelSpec::new(1, 100, 0.1, 21)).unwrap();
    let summary = outlyingness(&labeled.sample, None).unwrap();
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let (outliers, inliers): (Vec<usize>, Vec<usize>) = (0..100).partition(|&i| labeled.truth[i]);
    let mo_in = median(inliers.iter().map(|&i| summary.mo_norm(i)).collect());
    for &i in &outliers {
        assert!(summary.mo_norm(i) > 3.0 * mo_in, "curve {i}");
        assert!(summary.vo[i] < summary.mo_norm(i).powi(2), "curve {i}");
    }
    let mo_out = median(outliers.iter().map(|&i| summary.mo_norm(i)).collect());
    assert!(mo_out > 3.0 * mo_in);
    let doc = emit_msplot(labeled.sample.ids(), &summary, None, None, MsMode::Full, Format::Csv).unwrap();
    let (_, rows) = parse_numeric_table(doc.as_str(), 1).unwrap();
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], summary.mo[(i, 0)]);
        assert_eq!(r[1], summary.vo[i]);
    }
}

#[test]
fn array_layouts() {
    let labeled = model_sample(&ModelSpec::new(5, 25, 0.1, 4)).unwrap();
    let sums = ArraySummaries::compute(&labeled.sample, 100, 1).unwrap();
    let doc = emit_msplot_array(labeled.sample.ids(), &sums, None, Some(&labeled.truth)).unwrap();
    let xml = roxmltree::Document::parse(doc.as_str()).unwrap();
    let panels: Vec<_> = xml.descendants().filter(|n| n.attribute("class") == Some("panel")).collect();
    assert_eq!(panels.len(), 4);
    assert!(panels.iter().all(|p| mark_count(*p) == 25));
    // three dimensions from Model 5 plus a scaled copy of its first dimension
    let labeled = model_sample(&ModelSpec::new(5, 20, 0.0, 2)).unwrap();
    let s = &labeled.sample;
    let curves: Vec<Vec<Vec<f64>>> = (0..s.n())
        .map(|i| (0..s.m()).map(|j| vec![s.value(i, j, 0), s.value(i, j, 1), 2.0 * s.value(i, j, 0) + s.value(i, j, 1)]).collect())
        .collect();
    let three = FunctionalSample::from_curves(&curves, s.grid().clone(), s.ids().to_vec()).unwrap();
    let sums = ArraySummaries::compute(&three, 50, 3).unwrap();
    let doc = emit_msplot_array(three.ids(), &sums, None, None).unwrap();
    let xml = roxmltree::Document::parse(doc.as_str()).unwrap();
    assert_eq!(xml.descendants().filter(|n| n.attribute("class") == Some("panel")).count(), 9);

    let uni = model_sample(&ModelSpec::new(1, 20, 0.0, 2)).unwrap();
    assert_eq!(ArraySummaries::compute(&uni.sample, 50, 3).unwrap_err(), PlotError::ArrayNeedsMultivariate);
}

#[test]
fn parallel_constant_curves_lie_on_the_parabola() {
    let grid = uniform_grid(10, 0.0, 1.0).unwrap();
    let rows: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64 * 0.7; 10]).collect();
    let sample = FunctionalSample::from_rows(&rows, grid).unwrap();
    let summary = outlyingness(&sample, None).unwrap();
    let doc = emit_outliergram(sample.ids(), &summary, None, Format::Csv).unwrap();
    let (_, rows) = parse_numeric_table(doc.as_str(), 1).unwrap();
    for r in rows {
        assert!((r[1] - r[0] * r[0]).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn emitted_documents_are_consistent(seed in any::<u64>(), model in 1u32..=5, n in 12usize..40) {
        let labeled = model_sample(&ModelSpec { m: 20, ..ModelSpec::new(model, n, 0.1, seed) }).unwrap();
        let sample = &labeled.sample;
        let cfg = DetectConfig { seed, ..DetectConfig::default() };
        let (summary, det) = detect_outliers(sample, &cfg).unwrap();
        let names = ids(n);

        let mode = if sample.p() == 1 { MsMode::Full } else { MsMode::Norm };
        let svg = emit_msplot(&names, &summary, Some(&det), Some(&labeled.truth), mode, Format::Svg).unwrap();
        let xml = roxmltree::Document::parse(svg.as_str()).unwrap();
        prop_assert_eq!(mark_count(xml.root()), n);
        prop_assert_eq!(svg.n_marks, n);

        let og = emit_outliergram(&names, &summary, Some(&det.flags), Format::Svg).unwrap();
        prop_assert_eq!(mark_count(roxmltree::Document::parse(og.as_str()).unwrap().root()), n);

        let og_csv = emit_outliergram(&names, &summary, None, Format::Csv).unwrap();
        let (_, rows) = parse_numeric_table(og_csv.as_str(), 1).unwrap();
        prop_assert_eq!(rows.len(), n);
        for (i, r) in rows.iter().enumerate() {
            prop_assert!(r[1] >= r[0] * r[0] - 1e-10);
            prop_assert!((r[2] - summary.vo[i]).abs() < 1e-10);
            prop_assert_eq!(r[0], summary.mo_norm(i));
            prop_assert_eq!(r[1], summary.fo[i]);
        }

        let csv = emit_msplot(&names, &summary, Some(&det), None, MsMode::Full, Format::Csv).unwrap();
        let (_, rows) = parse_numeric_table(csv.as_str(), 1).unwrap();
        let coords = ms_coordinates(&summary, MsMode::Full);
        prop_assert_eq!(rows.len(), n);
        for (i, r) in rows.iter().enumerate() {
            prop_assert_eq!(&r[..coords.cols()], coords.row(i));
        }
    }
}
