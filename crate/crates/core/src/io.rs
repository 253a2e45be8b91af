//! File formats.
//!
//! Matrices are CSV (one row per line, `.` decimal point, `#` comments) or
//! JSON `{"n": rows, "m": cols, "entries": [row-major]}`. Damping vectors are
//! a single CSV line, a single CSV column, or a JSON array. Numbers are
//! written in shortest round-trip form, so write-then-read is exact.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::centrality::CentralityVector;
use crate::dynamics::{LimitResult, Trajectory};
use crate::error::{Error, Result};
use crate::inverse::{DesignSolution, FeasibilityReport};
use crate::matrix::{DampingMatrix, InfluenceMatrix, StateMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON, anything else CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Shortest string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    n: usize,
    m: usize,
    entries: Vec<f64>,
}

fn parse_csv_line(line: &str, lineno: u64) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(line.as_bytes());
    let record = match reader.records().next() {
        Some(r) => r.map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?,
        None => return Ok(Vec::new()),
    };
    record
        .iter()
        .enumerate()
        .map(|(c, field)| {
            field.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("column {}: {field:?} is not a number", c + 1),
            })
        })
        .collect()
}

/// Blank lines and lines starting with `#` are skipped; errors report the
/// 1-based line of the file.
pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lineno = idx as u64 + 1;
        let row = parse_csv_line(trimmed, lineno)?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {} fields, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no data rows".into(),
        });
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn parse_matrix_json(text: &str) -> Result<DMatrix<f64>> {
    let doc: MatrixDoc = serde_json::from_str(text)?;
    matrix_from_doc(doc)
}

fn matrix_from_doc(doc: MatrixDoc) -> Result<DMatrix<f64>> {
    if doc.entries.len() != doc.n * doc.m {
        return Err(Error::dims(format!(
            "matrix declares {}x{} but has {} entries",
            doc.n,
            doc.m,
            doc.entries.len()
        )));
    }
    Ok(DMatrix::from_row_slice(doc.n, doc.m, &doc.entries))
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

pub fn matrix_to_json(m: &DMatrix<f64>) -> Value {
    json!({ "n": m.nrows(), "m": m.ncols(), "entries": row_major(m) })
}

pub fn parse_matrix(text: &str, format: Format) -> Result<DMatrix<f64>> {
    match format {
        Format::Csv => parse_matrix_csv(text),
        Format::Json => parse_matrix_json(text),
    }
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix(&fs::read_to_string(path)?, Format::from_path(path))
}

pub fn read_influence(path: &Path) -> Result<InfluenceMatrix> {
    InfluenceMatrix::new(read_matrix(path)?)
}

pub fn read_state(path: &Path) -> Result<StateMatrix> {
    StateMatrix::new(read_matrix(path)?)
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => matrix_to_csv(m),
        Format::Json => serde_json::to_string_pretty(&matrix_to_json(m))? + "\n",
    };
    fs::write(path, text)?;
    Ok(())
}

/// A single CSV line, a single CSV column, or a JSON array.
pub fn parse_damping(text: &str, format: Format) -> Result<DampingMatrix> {
    let values = match format {
        Format::Json => serde_json::from_str::<Vec<f64>>(text)?,
        Format::Csv => {
            let m = parse_matrix_csv(text)?;
            if m.nrows() != 1 && m.ncols() != 1 {
                return Err(Error::dims(format!(
                    "damping must be one line or one column, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            m.as_slice().to_vec()
        }
    };
    DampingMatrix::new(values)
}

pub fn read_damping(path: &Path) -> Result<DampingMatrix> {
    parse_damping(&fs::read_to_string(path)?, Format::from_path(path))
}

pub fn damping_to_csv(a: &DampingMatrix) -> String {
    let fields: Vec<String> = a.as_slice().iter().map(|&v| fmt_f64(v)).collect();
    fields.join(",") + "\n"
}

/// Long format: `k,node,dim,value` with 0-based node and dimension.
pub fn trajectory_to_csv(t: &Trajectory) -> String {
    let mut out = String::from("k,node,dim,value\n");
    for (k, x) in t.steps.iter().zip(&t.states) {
        for i in 0..x.n() {
            for h in 0..x.m() {
                out.push_str(&format!("{k},{i},{h},{}\n", fmt_f64(x.get(i, h))));
            }
        }
    }
    out
}

/// `{V, X_inf, method, diagnostics}`; `V` and `X_inf` use the matrix schema.
pub fn limit_to_json(limit: &LimitResult, diagnostics: Value) -> Value {
    json!({
        "V": matrix_to_json(&limit.v),
        "X_inf": matrix_to_json(limit.x_inf.as_matrix()),
        "method": limit.method,
        "diagnostics": diagnostics,
    })
}

/// Reads back the `V` and `X_inf` matrices of [`limit_to_json`].
pub fn limit_matrices_from_json(text: &str) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    #[derive(Deserialize)]
    struct Doc {
        #[serde(rename = "V")]
        v: MatrixDoc,
        #[serde(rename = "X_inf")]
        x_inf: MatrixDoc,
    }
    let doc: Doc = serde_json::from_str(text)?;
    Ok((matrix_from_doc(doc.v)?, matrix_from_doc(doc.x_inf)?))
}

pub fn design_to_json(d: &DesignSolution) -> Value {
    json!({
        "a": d.a.as_slice(),
        "X0": matrix_to_json(d.x0.as_matrix()),
        "residual": d.residual,
    })
}

pub fn feasibility_to_json(r: &FeasibilityReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

pub fn centrality_to_json(r: &CentralityVector) -> Value {
    json!(r.as_slice())
}

pub fn centrality_to_csv(r: &CentralityVector) -> String {
    r.as_slice().iter().map(|&v| fmt_f64(v) + "\n").collect()
}
