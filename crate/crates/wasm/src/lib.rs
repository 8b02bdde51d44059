//! Browser bindings for the Kitaev chain demo in `www/`.
//!
//! Every export takes the coefficient syntax of the CLI (`"0:0.5,1:1"` for
//! `z(k) = 0.5 + e^{ik}`) and returns a JSON string. The plain `*_json`
//! functions carry the logic and are what the native tests call.

use std::f64::consts::PI;

use serde::Serialize;
use wasm_bindgen::prelude::*;
use zaktop::invariants::{analyze, winding::kitaev_winding};
use zaktop::presets::{kitaev_chain, KitaevSpec};
use zaktop::sweep::{sweep, ModelPath};
use zaktop::{AnalysisConfig, Tolerances};

const MAX_POINTS: usize = 1 << 16;

#[derive(Serialize)]
struct Bands {
    k: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// `z(k)` as `[re, im]`; its winding about 0 is the invariant.
    z: Vec<[f64; 2]>,
    winding: Option<i64>,
}

fn spec(coeffs: &str) -> Result<KitaevSpec, String> {
    coeffs.parse().map_err(|e: zaktop::Error| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Bands `±|z(k)|` and the curve `z(k)` on `points` momenta in `[0, 2π]`.
pub fn bands_json(coeffs: &str, points: usize) -> Result<String, String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must lie in [2, {MAX_POINTS}]"));
    }
    let spec = spec(coeffs)?;
    let (model, _) = kitaev_chain(&spec).map_err(|e| e.to_string())?;
    let tol = Tolerances::default();
    let mut out = Bands {
        k: Vec::with_capacity(points),
        lower: Vec::with_capacity(points),
        upper: Vec::with_capacity(points),
        z: Vec::with_capacity(points),
        winding: kitaev_winding(&spec, &tol).ok(),
    };
    for i in 0..points {
        let k = 2.0 * PI * i as f64 / (points - 1) as f64;
        let e = model.spectrum(k, &tol).map_err(|e| e.to_string())?.eigenvalues;
        let z = spec.z(k);
        out.k.push(k);
        out.lower.push(e[0]);
        out.upper.push(e[1]);
        out.z.push([z.re, z.im]);
    }
    to_json(&out)
}

/// Full invariant report for the chain.
pub fn invariant_json(coeffs: &str, steps: usize) -> Result<String, String> {
    let (model, set) = kitaev_chain(&spec(coeffs)?).map_err(|e| e.to_string())?;
    let config = AnalysisConfig {
        steps,
        ..AnalysisConfig::default()
    };
    let report = analyze(&model, &set, &config).map_err(|e| e.to_string())?;
    to_json(&report)
}

/// Straight-line sweep between two chains.
pub fn sweep_json(from: &str, to: &str, samples: usize) -> Result<String, String> {
    if !(2..=1001).contains(&samples) {
        return Err("samples must lie in [2, 1001]".into());
    }
    let (start, set) = kitaev_chain(&spec(from)?).map_err(|e| e.to_string())?;
    let (end, _) = kitaev_chain(&spec(to)?).map_err(|e| e.to_string())?;
    let path = ModelPath::new(start, end, set, samples).map_err(|e| e.to_string())?;
    let config = AnalysisConfig {
        steps: 512,
        basis_grid: 0,
        ..AnalysisConfig::default()
    };
    let result = sweep(&path, &config).map_err(|e| e.to_string())?;
    to_json(&result)
}

#[wasm_bindgen]
pub fn bands(coeffs: &str, points: usize) -> Result<String, JsError> {
    bands_json(coeffs, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn invariant(coeffs: &str, steps: usize) -> Result<String, JsError> {
    invariant_json(coeffs, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sweepPath)]
pub fn sweep_path(from: &str, to: &str, samples: usize) -> Result<String, JsError> {
    sweep_json(from, to, samples).map_err(|e| JsError::new(&e))
}
