//! MS-plot, MS-plot array and outliergram as SVG or CSV documents.

mod svg;

use std::fmt::Write as _;

use msplot_core::{
    ms_coordinates, outlyingness, sample_directions, Boundary, DetectionResult, FunctionalSample, MsMode,
    OutlyingnessSummary,
};

pub use svg::PANEL;
use svg::{document, legend, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Svg,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotDocument {
    pub format: Format,
    pub payload: Vec<u8>,
    /// Point marks per panel; always the number of curves.
    pub n_marks: usize,
}

impl PlotDocument {
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.payload).expect("documents are UTF-8")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlotError {
    #[error("cannot render full-mode MS-plot for p = {p} (a {}-dimensional scatter); use norm mode (|MO|, VO) instead", p + 1)]
    NoBoundaryGeometry { p: usize },
    #[error("MS-plot array needs multivariate curves (p >= 2)")]
    ArrayNeedsMultivariate,
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Core(#[from] msplot_core::Error),
}

/// Style class of a curve from its flag and, when known, its true label.
pub fn style_class(flagged: bool, truth: Option<bool>) -> &'static str {
    match (flagged, truth) {
        (true, Some(false)) => "false-alarm",
        (false, Some(true)) => "missed",
        (true, _) => "detected",
        (false, _) => "normal",
    }
}

fn check_len(what: &str, len: usize, n: usize) -> Result<(), PlotError> {
    if len != n {
        return Err(PlotError::Shape(format!("{what} has {len} entries for {n} curves")));
    }
    Ok(())
}

fn classes(n: usize, flags: Option<&[bool]>, truth: Option<&[bool]>) -> Vec<&'static str> {
    (0..n)
        .map(|i| style_class(flags.is_some_and(|f| f[i]), truth.map(|t| t[i])))
        .collect()
}

fn used_classes(classes: &[&'static str]) -> Vec<&'static str> {
    ["normal", "detected", "false-alarm", "missed"].into_iter().filter(|c| classes.contains(c)).collect()
}

fn csv_id(id: &str) -> String {
    if id.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", id.replace('"', "\"\""))
    } else {
        id.to_string()
    }
}

/// MS-plot of `summary`.
///
/// SVG output is two-dimensional: full mode renders `(MO, VO)` for `p = 1`
/// (with the detection ellipse when available), norm mode renders
/// `(|MO|, VO)`. Full mode with `p = 2` is rendered in norm mode; with
/// `p > 2` it is refused. CSV output carries the coordinates of the requested
/// mode for any `p`.
pub fn emit_msplot(
    ids: &[String],
    summary: &OutlyingnessSummary,
    detection: Option<&DetectionResult>,
    truth: Option<&[bool]>,
    mode: MsMode,
    format: Format,
) -> Result<PlotDocument, PlotError> {
    let (n, p) = (summary.n(), summary.p());
    check_len("id list", ids.len(), n)?;
    if let Some(d) = detection {
        check_len("detection", d.flags.len(), n)?;
    }
    if let Some(t) = truth {
        check_len("truth", t.len(), n)?;
    }
    let flags = detection.map(|d| d.flags.as_slice());

    if format == Format::Csv {
        let coords = ms_coordinates(summary, mode);
        let mut out = String::from("curve_id");
        match mode {
            MsMode::Full => (1..=p).for_each(|k| write!(out, ",mo_{k}").unwrap()),
            MsMode::Norm => out.push_str(",mo_norm"),
        }
        out.push_str(",vo,flagged\n");
        for (i, row) in coords.iter_rows().enumerate() {
            out.push_str(&csv_id(&ids[i]));
            for v in row {
                write!(out, ",{v}").unwrap();
            }
            writeln!(out, ",{}", u8::from(flags.is_some_and(|f| f[i]))).unwrap();
        }
        return Ok(PlotDocument { format, payload: out.into_bytes(), n_marks: n });
    }

    let render_full = match mode {
        MsMode::Full if p == 1 => true,
        MsMode::Full if p == 2 => false,
        MsMode::Full => return Err(PlotError::NoBoundaryGeometry { p }),
        MsMode::Norm => false,
    };
    let coords = ms_coordinates(summary, if render_full { MsMode::Full } else { MsMode::Norm });
    let boundary: Vec<(f64, f64)> = match detection.and_then(|d| d.boundary.as_ref()) {
        Some(Boundary::Polyline(v)) if render_full => v.iter().map(|q| (q[0], q[1])).collect(),
        _ => Vec::new(),
    };
    let points: Vec<(f64, f64)> = coords.iter_rows().map(|r| (r[0], r[1])).collect();
    let frame = Frame::fit(0.0, 0.0, points.iter().chain(&boundary).copied());
    let styles = classes(n, flags, truth);

    let mut body = String::new();
    let xlabel = if render_full { "MO" } else { "‖MO‖" };
    frame.open(&mut body, "MS-plot", xlabel, "VO");
    if !boundary.is_empty() {
        frame.polyline(&mut body, &boundary, "boundary", true);
    }
    for (i, (x, y)) in points.iter().enumerate() {
        frame.mark(&mut body, *x, *y, styles[i], &ids[i]);
    }
    frame.close(&mut body);
    legend(&mut body, PANEL - 190.0, 58.0, &used_classes(&styles));
    Ok(PlotDocument { format, payload: document(PANEL, PANEL, &body).into_bytes(), n_marks: n })
}

/// Summaries behind an MS-plot array: the marginal summary of every
/// dimension and the joint summary of every pair `(k, l)`, `k < l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArraySummaries {
    pub p: usize,
    pub marginal: Vec<OutlyingnessSummary>,
    pub joint: Vec<((usize, usize), OutlyingnessSummary)>,
}

impl ArraySummaries {
    pub fn compute(sample: &FunctionalSample, directions: usize, seed: u64) -> Result<Self, PlotError> {
        let p = sample.p();
        if p < 2 {
            return Err(PlotError::ArrayNeedsMultivariate);
        }
        let marginal = (0..p)
            .map(|k| outlyingness(&sample.select_dims(&[k])?, None))
            .collect::<Result<Vec<_>, _>>()?;
        let dirs = sample_directions(directions, 2, seed)?;
        let mut joint = Vec::new();
        for k in 0..p {
            for l in k + 1..p {
                joint.push(((k, l), outlyingness(&sample.select_dims(&[k, l])?, Some(&dirs))?));
            }
        }
        Ok(ArraySummaries { p, marginal, joint })
    }

    fn pair(&self, k: usize, l: usize) -> &OutlyingnessSummary {
        let key = (k.min(l), k.max(l));
        &self.joint.iter().find(|(kl, _)| *kl == key).expect("all pairs computed").1
    }
}

/// `p x p` grid of panels: marginal MS-plots `(MO_k, VO_k)` on the diagonal,
/// joint MS-plots of dimensions `(k, l)` in norm mode elsewhere. Every panel
/// has one mark per curve, styled by `flags` and `truth`.
pub fn emit_msplot_array(
    ids: &[String],
    summaries: &ArraySummaries,
    flags: Option<&[bool]>,
    truth: Option<&[bool]>,
) -> Result<PlotDocument, PlotError> {
    let p = summaries.p;
    if p < 2 {
        return Err(PlotError::ArrayNeedsMultivariate);
    }
    let n = summaries.marginal[0].n();
    check_len("id list", ids.len(), n)?;
    if let Some(f) = flags {
        check_len("flags", f.len(), n)?;
    }
    if let Some(t) = truth {
        check_len("truth", t.len(), n)?;
    }
    let styles = classes(n, flags, truth);
    let mut body = String::new();
    for k in 0..p {
        for l in 0..p {
            let (summary, mode, title, xlabel) = if k == l {
                (&summaries.marginal[k], MsMode::Full, format!("dimension {}", k + 1), "MO".to_string())
            } else {
                (summaries.pair(k, l), MsMode::Norm, format!("dimensions {} and {}", k.min(l) + 1, k.max(l) + 1), "‖MO‖".to_string())
            };
            let coords = ms_coordinates(summary, mode);
            let frame = Frame::fit(l as f64 * PANEL, k as f64 * PANEL, coords.iter_rows().map(|r| (r[0], r[1])));
            frame.open(&mut body, &title, &xlabel, "VO");
            for (i, r) in coords.iter_rows().enumerate() {
                frame.mark(&mut body, r[0], r[1], styles[i], &ids[i]);
            }
            frame.close(&mut body);
        }
    }
    legend(&mut body, PANEL - 190.0, 58.0, &used_classes(&styles));
    let side = PANEL * p as f64;
    Ok(PlotDocument { format: Format::Svg, payload: document(side, side, &body).into_bytes(), n_marks: n })
}

/// Outliergram: `(|MO|, FO)` against the parabola `FO = |MO|^2`; the vertical
/// gap of each mark is its VO. CSV columns: `id, mo_norm, fo, vo_gap`.
pub fn emit_outliergram(
    ids: &[String],
    summary: &OutlyingnessSummary,
    flags: Option<&[bool]>,
    format: Format,
) -> Result<PlotDocument, PlotError> {
    let n = summary.n();
    check_len("id list", ids.len(), n)?;
    if let Some(f) = flags {
        check_len("flags", f.len(), n)?;
    }
    let points: Vec<(f64, f64)> = (0..n).map(|i| (summary.mo_norm(i), summary.fo[i])).collect();
    if format == Format::Csv {
        let mut out = String::from("id,mo_norm,fo,vo_gap\n");
        for (i, (x, fo)) in points.iter().enumerate() {
            writeln!(out, "{},{x},{fo},{}", csv_id(&ids[i]), fo - x * x).unwrap();
        }
        return Ok(PlotDocument { format, payload: out.into_bytes(), n_marks: n });
    }
    let xmax = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let frame = Frame::fit(0.0, 0.0, points.iter().copied().chain([(0.0, 0.0)]));
    let curve: Vec<(f64, f64)> = (0..=200)
        .map(|k| {
            let x = frame.xmin.max(0.0) + (frame.xmax.max(xmax) - frame.xmin.max(0.0)) * k as f64 / 200.0;
            (x, x * x)
        })
        .filter(|(_, y)| *y <= frame.ymax)
        .collect();
    let styles = classes(n, flags, None);
    let mut body = String::new();
    frame.open(&mut body, "Outliergram", "‖MO‖", "FO");
    frame.polyline(&mut body, &curve, "parabola", false);
    for (i, (x, y)) in points.iter().enumerate() {
        frame.mark(&mut body, *x, *y, styles[i], &ids[i]);
    }
    frame.close(&mut body);
    legend(&mut body, PANEL - 190.0, 58.0, &used_classes(&styles));
    Ok(PlotDocument { format, payload: document(PANEL, PANEL, &body).into_bytes(), n_marks: n })
}
