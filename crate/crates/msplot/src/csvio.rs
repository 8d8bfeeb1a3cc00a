//! Long-format curve CSV (`curve_id,t,dim_1,...,dim_p`) and the result,
//! truth and benchmark tables written by the command-line tool.

use std::collections::HashMap;
use std::fmt::Write as _;

use msplot_core::{equal_weights, DetectionResult, FunctionalSample, Grid, OutlyingnessSummary, RateSummary};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("ragged grid: curve {curve:?} is observed at {found} t-values, expected the {expected} of curve {reference:?}")]
    RaggedGrid { curve: String, reference: String, expected: usize, found: usize },
    #[error(transparent)]
    Sample(#[from] msplot_core::Error),
}

fn parse_error(line: u64, message: impl Into<String>) -> CsvError {
    CsvError::Parse { line, message: message.into() }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn from_csv_error(e: csv::Error) -> CsvError {
    let line = e.position().map_or(0, |p| p.line());
    parse_error(line, e.to_string())
}

fn parse_number(field: &str, line: u64, column: &str) -> Result<f64, CsvError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_error(line, format!("column {column}: cannot parse {field:?} as a number")))
}

struct CurveRows {
    id: String,
    rows: Vec<(f64, Vec<f64>, u64)>,
}

/// Parses long-format curve data. Rows may come in any order; each curve is
/// sorted by `t` and every curve must be observed at exactly the same
/// `t`-values, which become the grid (weights `1/m`).
pub fn parse_long_csv(text: &str) -> Result<FunctionalSample, CsvError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(from_csv_error)?.clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names.first() != Some(&"curve_id") {
        return Err(parse_error(1, "first column must be curve_id"));
    }
    if names.get(1) != Some(&"t") {
        return Err(parse_error(1, "second column must be t"));
    }
    let p = names.len().saturating_sub(2);
    if p == 0 {
        return Err(parse_error(1, "missing column dim_1"));
    }
    for (k, name) in names[2..].iter().enumerate() {
        if *name != format!("dim_{}", k + 1) {
            return Err(parse_error(1, format!("expected column dim_{}, found {name:?}", k + 1)));
        }
    }

    let mut curves: Vec<CurveRows> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(from_csv_error)?;
        let line = record_line(&record);
        let id = record[0].trim().to_string();
        if id.is_empty() {
            return Err(parse_error(line, "empty curve_id"));
        }
        let t = parse_number(&record[1], line, "t")?;
        if !t.is_finite() {
            return Err(parse_error(line, "t must be finite"));
        }
        let dims = (0..p)
            .map(|k| parse_number(&record[k + 2], line, names[k + 2]))
            .collect::<Result<Vec<_>, _>>()?;
        let slot = *index.entry(id.clone()).or_insert_with(|| {
            curves.push(CurveRows { id, rows: Vec::new() });
            curves.len() - 1
        });
        curves[slot].rows.push((t, dims, line));
    }
    if curves.is_empty() {
        return Err(parse_error(1, "no data rows"));
    }

    for curve in &mut curves {
        curve.rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = curve.rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(parse_error(w[1].2, format!("curve {:?} repeats t = {}", curve.id, w[1].0)));
        }
    }
    let reference = &curves[0];
    let grid_t: Vec<f64> = reference.rows.iter().map(|r| r.0).collect();
    for curve in &curves[1..] {
        let same = curve.rows.len() == grid_t.len() && curve.rows.iter().zip(&grid_t).all(|(r, t)| r.0 == *t);
        if !same {
            return Err(CsvError::RaggedGrid {
                curve: curve.id.clone(),
                reference: reference.id.clone(),
                expected: grid_t.len(),
                found: curve.rows.len(),
            });
        }
    }

    let m = grid_t.len();
    let grid = Grid::new(1, grid_t, equal_weights(m))?;
    let mut values = Vec::with_capacity(curves.len() * m * p);
    for curve in &curves {
        for (_, dims, _) in &curve.rows {
            values.extend_from_slice(dims);
        }
    }
    let ids = curves.into_iter().map(|c| c.id).collect();
    Ok(FunctionalSample::new(values, p, grid, ids)?)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Long-format CSV of a sample, readable by [`parse_long_csv`].
pub fn write_long_csv(sample: &FunctionalSample) -> String {
    let p = sample.p();
    let mut out = String::from("curve_id,t");
    for k in 1..=p {
        write!(out, ",dim_{k}").unwrap();
    }
    out.push('\n');
    let t: Vec<f64> = sample.grid().first_coords().collect();
    for (i, id) in sample.ids().iter().enumerate() {
        let id = csv_field(id);
        for (j, tj) in t.iter().enumerate() {
            write!(out, "{id},{tj}").unwrap();
            for v in sample.point(i, j) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_truth_csv(ids: &[String], truth: &[bool]) -> String {
    let mut out = String::from("curve_id,outlier\n");
    for (id, t) in ids.iter().zip(truth) {
        writeln!(out, "{},{}", csv_field(id), u8::from(*t)).unwrap();
    }
    out
}

/// Reads a `curve_id,outlier` table and orders it like `ids`.
pub fn parse_truth_csv(text: &str, ids: &[String]) -> Result<Vec<bool>, CsvError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(from_csv_error)?.clone();
    if header.len() != 2 || header[0].trim() != "curve_id" || header[1].trim() != "outlier" {
        return Err(parse_error(1, "truth header must be curve_id,outlier"));
    }
    let mut labels = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(from_csv_error)?;
        let line = record_line(&record);
        let flag = match record[1].trim() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(parse_error(line, format!("outlier must be 0 or 1, found {other:?}"))),
        };
        if labels.insert(record[0].trim().to_string(), flag).is_some() {
            return Err(parse_error(line, format!("curve {:?} listed twice", record[0].trim())));
        }
    }
    ids.iter()
        .map(|id| labels.get(id).copied().ok_or_else(|| parse_error(0, format!("no truth label for curve {id:?}"))))
        .collect()
}

/// `curve_id, mo_1..mo_p, vo, fo, srmd, flagged`. For the boxplot rule the
/// `srmd` column holds the boxplot score.
pub fn write_result_csv(ids: &[String], summary: &OutlyingnessSummary, result: &DetectionResult) -> String {
    let p = summary.p();
    let mut out = String::from("curve_id");
    for k in 1..=p {
        write!(out, ",mo_{k}").unwrap();
    }
    out.push_str(",vo,fo,srmd,flagged\n");
    for (i, id) in ids.iter().enumerate() {
        out.push_str(&csv_field(id));
        for v in summary.mo.row(i) {
            write!(out, ",{v}").unwrap();
        }
        writeln!(out, ",{},{},{},{}", summary.vo[i], summary.fo[i], result.scores[i], u8::from(result.flags[i])).unwrap();
    }
    out
}

/// One row per replication: `rep,p_c,p_f`.
pub fn write_rates_csv(summary: &RateSummary) -> String {
    let mut out = String::from("rep,p_c,p_f\n");
    for (r, (pc, pf)) in summary.pc.iter().zip(&summary.pf).enumerate() {
        writeln!(out, "{r},{pc},{pf}").unwrap();
    }
    out
}

/// `statistic,value` table of the rate summaries.
pub fn write_summary_csv(summary: &RateSummary) -> String {
    let mut out = String::from("statistic,value\n");
    writeln!(out, "reps,{}", summary.reps()).unwrap();
    for (name, s) in [("p_c", &summary.pc_stats), ("p_f", &summary.pf_stats)] {
        writeln!(out, "{name}_mean,{}", s.mean).unwrap();
        writeln!(out, "{name}_median,{}", s.median).unwrap();
        writeln!(out, "{name}_q1,{}", s.q1).unwrap();
        writeln!(out, "{name}_q3,{}", s.q3).unwrap();
    }
    // replications without true outliers count as p_c = 1
    writeln!(out, "p_c_without_outliers,1").unwrap();
    out
}

/// Parses a header-plus-numbers CSV into its header and rows. Used to read
/// back emitted tables.
pub fn parse_numeric_table(text: &str, skip_columns: usize) -> Result<(Vec<String>, Vec<Vec<f64>>), CsvError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(from_csv_error)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(from_csv_error)?;
        let line = record_line(&record);
        let row = record
            .iter()
            .enumerate()
            .skip(skip_columns)
            .map(|(k, f)| parse_number(f, line, &header[k]))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
