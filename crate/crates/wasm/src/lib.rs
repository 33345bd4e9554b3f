//! Browser bindings for the demo page. Every op takes and returns JSON text.

use copodual::cones::{is_copositive, DEFAULT_TOL};
use copodual::dam::{run_dam, DataSet};
use copodual::dualgen::{build_dual, GenConfig};
use copodual::model::{parse_matrix, parse_program};
use copodual::symcore::{quad_form, simplex_grid, SymMatrix};
use copodual::verify::strong_duality_report;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest grid resolution the page may request.
pub const MAX_GRID: usize = 64;

#[derive(Serialize)]
struct Sample {
    t: Vec<f64>,
    value: f64,
}

fn check_grid(k: usize) -> Result<(), String> {
    if (1..=MAX_GRID).contains(&k) {
        Ok(())
    } else {
        Err(format!("grid resolution must lie in 1..={MAX_GRID}, got {k}"))
    }
}

/// Values of `tᵀDt` on the grid of resolution `k` and the copositivity
/// verdict of `D`.
pub fn copositivity_landscape_json(matrix: &str, k: usize) -> Result<String, String> {
    check_grid(k)?;
    let d = parse_matrix(matrix).map_err(|e| e.to_string())?;
    if d.dim() > 4 {
        return Err(format!("the landscape is drawn for p <= 4, got p = {}", d.dim()));
    }
    let verdict = is_copositive(&d, DEFAULT_TOL, k).map_err(|e| e.to_string())?;
    let grid = simplex_grid(d.dim(), k).map_err(|e| e.to_string())?;
    let samples = grid
        .points()
        .iter()
        .map(|t| Ok(Sample { t: t.coords().to_vec(), value: quad_form(&d, t.coords())? }))
        .collect::<copodual::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    Ok(json!({ "p": d.dim(), "verdict": verdict, "samples": samples }).to_string())
}

/// Builds the regularized dual of a copositive program and reports the
/// per-level matrices `U_m` and the top matrix `U`.
pub fn build_dual_demo_json(program: &str, k: usize) -> Result<String, String> {
    check_grid(k)?;
    let prog = parse_program(program).and_then(|p| p.into_copositive()).map_err(|e| e.to_string())?;
    let cfg = GenConfig { grid: k, ..GenConfig::default() };
    let out = build_dual(&prog, &cfg).map_err(|e| e.to_string())?;
    let report = strong_duality_report(&prog, &out.x0, &out.solution).map_err(|e| e.to_string())?;
    let levels: Vec<_> = (1..=out.m0).map(|m| out.solution.u_level(m).rows()).collect();
    let top = out.solution.u();
    Ok(json!({
        "m0": out.m0,
        "x0": out.x0,
        "primal_value": out.primal_value,
        "dual_value": out.dual_value,
        "gap": out.gap,
        "converged": out.converged,
        "verdict": report.verdict,
        "immobile": out.immobile,
        "level_u": levels,
        "u": top.rows(),
    })
    .to_string())
}

/// Runs data modification on a data set and checks the bilinear functional
/// before and after against the identity and a fixed indefinite matrix.
pub fn dam_demo_json(data: &str) -> Result<String, String> {
    let set: DataSet = serde_json::from_str(data).map_err(|e| e.to_string())?;
    set.validate().map_err(|e| e.to_string())?;
    let out = run_dam(&set, None).map_err(|e| e.to_string())?;
    let p = set.delta.first().map(|d| d.tau.dim()).or_else(|| set.base.first().map(|b| b.tau.dim())).unwrap_or(0);
    let mut checks = Vec::new();
    let mut ramp = SymMatrix::zeros(p);
    for i in 0..p {
        for j in i..p {
            ramp.set_sym(i, j, ((i + 1) * (j + 1)) as f64 - (i + j) as f64);
        }
    }
    let probes = [("identity", SymMatrix::identity(p)), ("ramp", ramp)];
    for (name, a) in &probes {
        let before = set.functional(a).map_err(|e| e.to_string())?;
        let after = out.data.functional(a).map_err(|e| e.to_string())?;
        checks.push(json!({ "matrix": name, "before": before, "after": after }));
    }
    Ok(json!({ "input": set, "output": out.data, "steps": out.steps, "functional": checks }).to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn copositivity_landscape(matrix: &str, k: usize) -> Result<String, JsValue> {
    js(copositivity_landscape_json(matrix, k))
}

#[wasm_bindgen]
pub fn build_dual_demo(program: &str, k: usize) -> Result<String, JsValue> {
    js(build_dual_demo_json(program, k))
}

#[wasm_bindgen]
pub fn dam_demo(data: &str) -> Result<String, JsValue> {
    js(dam_demo_json(data))
}
