//! Reading sequences, matrices and weights; writing CSV tables and JSON reports.
//!
//! Complex scalars are written as `re,im` pairs in CSV and as `[re, im]` in JSON.
//! Real data may omit the imaginary part everywhere.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::variation::ScalarSequence;

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn parse_f64(field: &str, line: u64) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("line {line}: cannot parse {field:?} as a number")))
}

/// Numeric CSV records with empty lines dropped; each entry is `(line, values)`.
fn numeric_records(text: &str) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut out = Vec::new();
    for rec in csv_reader(text).records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let vals = rec.iter().map(|f| parse_f64(f, line)).collect::<Result<Vec<_>>>()?;
        out.push((line, vals));
    }
    Ok(out)
}

/// One scalar per line, either `re` or `re,im`.
pub fn parse_sequence(text: &str) -> Result<ScalarSequence> {
    let mut samples = Vec::new();
    for (line, vals) in numeric_records(text)? {
        let z = match vals.as_slice() {
            [re] => Complex64::new(*re, 0.0),
            [re, im] => Complex64::new(*re, *im),
            _ => return Err(Error::Input(format!("line {line}: expected `re` or `re,im`, got {} fields", vals.len()))),
        };
        samples.push(z);
    }
    ScalarSequence::new(samples)
}

pub fn read_sequence(path: &Path) -> Result<ScalarSequence> {
    parse_sequence(&read_text(path)?)
}

/// Square matrix from CSV: `N` real columns or `2N` columns of `re,im` pairs per row.
pub fn parse_matrix_csv(text: &str) -> Result<CMat> {
    let rows = numeric_records(text)?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Input("matrix file has no rows".into()));
    }
    let mut m = CMat::zeros(n, n);
    for (i, (line, vals)) in rows.iter().enumerate() {
        if vals.len() == n {
            for (j, v) in vals.iter().enumerate() {
                m[(i, j)] = Complex64::new(*v, 0.0);
            }
        } else if vals.len() == 2 * n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(vals[2 * j], vals[2 * j + 1]);
            }
        } else {
            return Err(Error::Input(format!(
                "line {line}: {} rows need {n} real or {} complex columns, got {}",
                n,
                2 * n,
                vals.len()
            )));
        }
    }
    Ok(m)
}

fn json_scalar(v: &Value) -> Option<Complex64> {
    match v {
        Value::Number(x) => x.as_f64().map(|re| Complex64::new(re, 0.0)),
        Value::Array(pair) if pair.len() == 2 => Some(Complex64::new(pair[0].as_f64()?, pair[1].as_f64()?)),
        _ => None,
    }
}

/// A JSON matrix with optional weights.
#[derive(Debug, Clone)]
pub struct MatrixFile {
    pub matrix: CMat,
    pub weights: Option<Vec<f64>>,
}

/// Accepts either an array of rows or `{"matrix": rows, "weights": [...]}`.
/// Entries are numbers or `[re, im]` pairs.
pub fn parse_matrix_json(text: &str) -> Result<MatrixFile> {
    let root: Value = serde_json::from_str(text)?;
    let (rows, weights) = match &root {
        Value::Array(_) => (&root, None),
        Value::Object(obj) => {
            let rows = obj
                .get("matrix")
                .ok_or_else(|| Error::Input("JSON matrix object needs a \"matrix\" field".into()))?;
            let weights = match obj.get("weights") {
                None | Some(Value::Null) => None,
                Some(w) => Some(parse_weight_values(w)?),
            };
            (rows, weights)
        }
        _ => return Err(Error::Input("JSON matrix must be an array of rows or an object".into())),
    };
    let rows = rows.as_array().ok_or_else(|| Error::Input("matrix rows must be an array".into()))?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Input("matrix has no rows".into()));
    }
    let mut m = CMat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == n)
            .ok_or_else(|| Error::Input(format!("row {i} must be an array of {n} entries")))?;
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = json_scalar(v).ok_or_else(|| Error::Input(format!("entry ({i},{j}) is not a number or [re, im] pair")))?;
        }
    }
    Ok(MatrixFile { matrix: m, weights })
}

fn parse_weight_values(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| Error::Input("weights must be an array of numbers".into()))
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Reads a matrix, choosing JSON or CSV by file extension.
pub fn read_matrix(path: &Path) -> Result<MatrixFile> {
    let text = read_text(path)?;
    if is_json(path) {
        parse_matrix_json(&text)
    } else {
        Ok(MatrixFile { matrix: parse_matrix_csv(&text)?, weights: None })
    }
}

/// Atom masses: any mix of commas and newlines in CSV, or a JSON array.
pub fn parse_weights(text: &str) -> Result<Vec<f64>> {
    if text.trim_start().starts_with('[') {
        return parse_weight_values(&serde_json::from_str(text)?);
    }
    let w: Vec<f64> = numeric_records(text)?.into_iter().flat_map(|(_, v)| v).collect();
    if w.is_empty() {
        return Err(Error::Input("weights file is empty".into()));
    }
    Ok(w)
}

pub fn read_weights(path: &Path) -> Result<Vec<f64>> {
    parse_weights(&read_text(path)?)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV table with a header line; every value formatted by [`format_f64`].
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    fs::write(path, csv_table(header, rows))?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(to_json(value)?.as_bytes())?;
    Ok(())
}
