//! Browser bindings. Every entry point takes plain text in the same formats the CLI
//! reads and returns a JSON string, so the page needs no glue beyond `JSON.parse`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use qvar::analyticity::{
    analyze, numerical_range_check, numerical_range_support, stolz_support, AnalyticityOptions,
};
use qvar::variation::{vq_prefix_norms, BlockPartition};
use qvar::{io, MatrixOperator, MeasureSpace, VariationExponent};

const OUTLINE_POINTS: usize = 180;

#[derive(Serialize)]
struct VariationOut {
    value: f64,
    prefix: Vec<f64>,
    oscillation_dyadic: f64,
}

#[derive(Serialize)]
struct RangeOut {
    contained: bool,
    margin: f64,
    range_outline: Vec<[f64; 2]>,
    region_outline: Vec<[f64; 2]>,
    eigenvalues: Vec<[f64; 2]>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn parse_operator(text: &str) -> Result<MatrixOperator, String> {
    let t = text.trim_start();
    let (matrix, weights) = if t.starts_with('[') || t.starts_with('{') {
        let f = io::parse_matrix_json(t).map_err(err)?;
        (f.matrix, f.weights)
    } else {
        (io::parse_matrix_csv(t).map_err(err)?, None)
    };
    let space = match weights {
        Some(w) => MeasureSpace::new(w).map_err(err)?,
        None => MeasureSpace::uniform(matrix.nrows()),
    };
    MatrixOperator::new(matrix, space).map_err(err)
}

/// Convex outline of a set given its support function on a uniform angle grid:
/// consecutive supporting lines are intersected.
fn outline(h: &[f64]) -> Vec<[f64; 2]> {
    let n = h.len();
    let dt = 2.0 * PI / n as f64;
    (0..n)
        .map(|k| {
            let (a, b) = (k as f64 * dt, (k + 1) as f64 * dt);
            let (h0, h1) = (h[k], h[(k + 1) % n]);
            let det = (b - a).sin();
            [(h0 * b.sin() - h1 * a.sin()) / det, (h1 * a.cos() - h0 * b.cos()) / det]
        })
        .collect()
}

pub fn variation_json(sequence: &str, q: f64) -> Result<String, String> {
    let seq = io::parse_sequence(sequence).map_err(err)?;
    let q = VariationExponent::new(q).map_err(err)?;
    let prefix = vq_prefix_norms(seq.samples(), q);
    let blocks = BlockPartition::dyadic(seq.len() - 1);
    let osc = qvar::variation::oscillation_norm(&seq, &blocks).map_err(err)?;
    let out = VariationOut { value: *prefix.last().unwrap_or(&0.0), prefix, oscillation_dyadic: osc };
    serde_json::to_string(&out).map_err(err)
}

pub fn analyticity_json(matrix: &str, p: f64, n_max: usize) -> Result<String, String> {
    let t = parse_operator(matrix)?;
    let opts = AnalyticityOptions { p, n_max, angles_per_radius: 32, ..AnalyticityOptions::default() };
    let rep = analyze(&t, "input", &opts).map_err(err)?;
    serde_json::to_string(&rep).map_err(err)
}

pub fn numerical_range_json(matrix: &str, gamma: f64) -> Result<String, String> {
    let t = parse_operator(matrix)?;
    let check = numerical_range_check(&t, gamma).map_err(err)?;
    let thetas: Vec<f64> = (0..OUTLINE_POINTS).map(|k| 2.0 * PI * k as f64 / OUTLINE_POINTS as f64).collect();
    let hw = numerical_range_support(&t, &thetas);
    let hb: Vec<f64> = thetas.iter().map(|&th| stolz_support(th, gamma)).collect();
    let eigenvalues = qvar::linalg::eigenvalues(t.matrix())
        .map_err(err)?
        .iter()
        .map(|z: &Complex64| [z.re, z.im])
        .collect();
    let out = RangeOut {
        contained: check.contained,
        margin: check.margin,
        range_outline: outline(&hw),
        region_outline: outline(&hb),
        eigenvalues,
    };
    serde_json::to_string(&out).map_err(err)
}

/// Strong q-variation of a sequence (one `re` or `re,im` per line): total, prefix norms
/// and the dyadic square-function value.
#[wasm_bindgen]
pub fn variation(sequence: &str, q: f64) -> Result<String, JsValue> {
    variation_json(sequence, q).map_err(|e| JsValue::from_str(&e))
}

/// Profile `n‖Tⁿ − Tⁿ⁻¹‖_p` together with the resolvent and spectral diagnostics.
#[wasm_bindgen]
pub fn analyticity(matrix: &str, p: f64, n_max: usize) -> Result<String, JsValue> {
    analyticity_json(matrix, p, n_max).map_err(|e| JsValue::from_str(&e))
}

/// Numerical range of `T` against the Stolz region of half-angle `gamma`.
#[wasm_bindgen]
pub fn numerical_range(matrix: &str, gamma: f64) -> Result<String, JsValue> {
    numerical_range_json(matrix, gamma).map_err(|e| JsValue::from_str(&e))
}
