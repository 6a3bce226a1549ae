//! Browser bindings: a Julia-set point cloud, the pressure curve and the
//! Lyapunov spectrum of a map given as a map record.

use lyapspec::mapspec::MapSpec;
use lyapspec::orbits::julia_sample;
use lyapspec::pipeline::{self, Context, RunConfig};
use lyapspec::SpherePoint;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Depth ceiling for the demo, to keep each call interactive.
const MAX_DEPTH: usize = 16;

fn context(record: &str, depth: usize, seed: u64) -> Result<Context, String> {
    if depth > MAX_DEPTH {
        return Err(format!("depth {depth} exceeds the demo limit {MAX_DEPTH}"));
    }
    let spec = MapSpec::parse(record).map_err(|e| e.to_string())?;
    let mut config = RunConfig::new(spec);
    config.depth = depth;
    config.seed = seed;
    Context::new(config).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// `count` Julia-set points flattened as `[re0, im0, re1, im1, …]`; points at
/// infinity are skipped.
pub fn julia_cloud_native(record: &str, count: usize, seed: u64) -> Result<Vec<f64>, String> {
    let map = MapSpec::parse(record).and_then(|s| s.resolve()).map_err(|e| e.to_string())?;
    let start = SpherePoint::new(num_complex::Complex64::new(0.31, 0.17));
    let points = julia_sample(&map, start, count, seed).map_err(|e| e.to_string())?;
    Ok(points.iter().filter_map(|z| z.finite()).flat_map(|c| [c.re, c.im]).collect())
}

#[derive(Serialize)]
struct PressureView {
    t: Vec<f64>,
    hidden: Vec<f64>,
    full: Vec<f64>,
    chi_sup: f64,
    t_minus: Option<f64>,
    exceptional: Vec<SpherePoint>,
    basepoint: SpherePoint,
}

pub fn pressure_native(record: &str, depth: usize, seed: u64) -> Result<String, String> {
    let ctx = context(record, depth, seed)?;
    let (curve, _) = pipeline::pressure(&ctx).map_err(|e| e.to_string())?;
    to_json(&PressureView {
        t: curve.t_grid,
        hidden: curve.hidden,
        full: curve.full,
        chi_sup: curve.chi_sup,
        t_minus: curve.t_minus,
        exceptional: ctx.sigma.points.clone(),
        basepoint: ctx.basepoint,
    })
}

#[derive(Serialize)]
struct SpectrumView {
    alpha: Vec<f64>,
    f: Vec<f64>,
    audit: pipeline::SpectrumAudit,
}

pub fn spectrum_native(record: &str, depth: usize, seed: u64) -> Result<String, String> {
    let ctx = context(record, depth, seed)?;
    let (spec, audit) = pipeline::spectrum(&ctx).map_err(|e| e.to_string())?;
    to_json(&SpectrumView { alpha: spec.alpha_grid, f: spec.f_values, audit })
}

#[wasm_bindgen]
pub fn julia_cloud(record: &str, count: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    julia_cloud_native(record, count, seed).map_err(|e| JsError::new(&e))
}

/// Pressure curve as JSON: `{t, hidden, full, chi_sup, t_minus, exceptional, basepoint}`.
#[wasm_bindgen]
pub fn pressure_curve(record: &str, depth: usize, seed: u64) -> Result<String, JsError> {
    pressure_native(record, depth, seed).map_err(|e| JsError::new(&e))
}

/// Spectrum as JSON: `{alpha, f, audit}`.
#[wasm_bindgen]
pub fn spectrum(record: &str, depth: usize, seed: u64) -> Result<String, JsError> {
    spectrum_native(record, depth, seed).map_err(|e| JsError::new(&e))
}
