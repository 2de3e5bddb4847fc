//! WebAssembly bindings for the browser demo. Every entry point returns a
//! JSON string; errors surface as JS exceptions carrying the message.

use resil_core::builder;
use resil_core::cube::{self, SubsetMask};
use resil_core::fourier;
use resil_core::lp;
use resil_core::witness;
use resil_core::{CubeFunction, FnSpec};
use resil_core::{Error, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Keeps a single call responsive in the browser.
pub const MAX_WEB_DIM: usize = 16;
pub const MAX_WEB_BUILD: usize = 17;
pub const MAX_WEB_LP: usize = 10;
const TOP_COEFFICIENTS: usize = 24;

fn parse(spec: &str) -> Result<resil_core::Table> {
    let spec: FnSpec = spec.trim().parse()?;
    let table = spec.build_pure()?;
    cube::check_dim(table.n(), MAX_WEB_DIM)?;
    Ok(table)
}

fn mask_name(mask: SubsetMask) -> String {
    let coords: Vec<String> = cube::coords_of(mask).iter().map(|c| c.to_string()).collect();
    format!("{{{}}}", coords.join(","))
}

/// Level weights, total influence and the largest coefficients.
pub fn spectrum_json(spec: &str) -> Result<Value> {
    let table = parse(spec)?;
    let s = fourier::wht(table.as_cube())?;
    let mut top: Vec<(SubsetMask, f64)> =
        s.coeffs().iter().enumerate().filter(|(_, c)| c.abs() > 1e-12).map(|(m, &c)| (m as SubsetMask, c)).collect();
    top.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    top.truncate(TOP_COEFFICIENTS);
    let top: Vec<Value> = top.into_iter().map(|(m, c)| json!({ "set": mask_name(m), "coefficient": c })).collect();
    Ok(json!({
        "n": s.n(),
        "level_weights": s.level_weights(),
        "influence": s.influence(),
        "resilience_order": resil_core::amplify::resilience_order(&s, fourier::RESILIENCE_TOL),
        "top": top,
    }))
}

/// Witness rows for every threshold in `taus` (comma separated).
pub fn witness_json(spec: &str, d: usize, taus: &str) -> Result<Value> {
    let f = parse(spec)?.boolean()?;
    let taus = taus
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad threshold '{t}'"))))
        .collect::<Result<Vec<f64>>>()?;
    let lp_optimum = if f.n() <= MAX_WEB_LP { Some(1.0 - lp::distance_to_resilience(&f, d)?.alpha) } else { None };
    let rows: Vec<Value> = taus
        .iter()
        .zip(witness::witness_sweep(&f, d, &taus))
        .map(|(tau, r)| match r {
            Ok(rep) => json!({
                "tau": tau,
                "status": "ok",
                "delta_emp": rep.delta_emp,
                "corr_qf": rep.corr_qf,
                "corr_qf_bound": rep.corr_qf_bound,
                "corr_pf": rep.corr_pf,
                "certified": rep.certified(),
            }),
            Err(e) => json!({ "tau": tau, "status": "error", "message": e.to_string() }),
        })
        .collect();
    Ok(json!({ "n": f.n(), "d": d, "lp_optimum": lp_optimum, "rows": rows }))
}

/// Runs the greedy 1-resilient builder and reports its certificates.
pub fn build_json(n: usize, c1: f64) -> Result<Value> {
    cube::check_dim(n, MAX_WEB_BUILD)?;
    let report = builder::build_one_resilient(n, c1)?;
    let audit = builder::audit_invariants(&report);
    let sigma: Vec<i64> = report.log.iter().map(|r| r.sigma_after).collect();
    Ok(json!({
        "n": n,
        "iterations": report.log.len(),
        "flipped_points": report.sbar_size,
        "distance": report.distance,
        "distance_ratio": report.distance_ratio,
        "budget_used": report.budget_used,
        "final_sigma": report.final_sigma,
        "mean_certificate": report.mean_certificate,
        "first_level_certificate": report.first_level_certificate,
        "audit_holds": audit.holds,
        "sigma_trace": sigma,
    }))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn spectrum(spec: &str) -> std::result::Result<String, JsError> {
    to_js(spectrum_json(spec))
}

#[wasm_bindgen]
pub fn witness_sweep(spec: &str, d: usize, taus: &str) -> std::result::Result<String, JsError> {
    to_js(witness_json(spec, d, taus))
}

#[wasm_bindgen]
pub fn cyclerun_build(n: usize, c1: f64) -> std::result::Result<String, JsError> {
    to_js(build_json(n, c1))
}
