//! Browser entry points. Every function returns a JSON string so the page
//! can plot without extra glue.

use allpay_core::bounds_kernel::r_lower_bound;
use allpay_core::multi_unit_psam::psam_efficiency;
use allpay_core::simultaneous::combined_poa_bound;
use allpay_core::single_item::{bkv_worst_equilibrium, equilibrium_welfare, welfare_t, SingleItemInstance};
use allpay_core::valuations::MultiUnitValuation;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const CURVE_GRID: usize = 1025;

fn to_js(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[derive(Debug, Serialize)]
pub struct SingleItemPoint {
    pub v: f64,
    pub welfare: f64,
    pub price_of_anarchy: f64,
    pub t: f64,
}

/// Worst-equilibrium welfare of `(1, v, ..., v)` with `n` players over
/// `steps` values of `v` in `(0, 1)`, next to the large-`n` limit `T(v)`.
pub fn single_item_points(n: usize, steps: usize) -> allpay_core::Result<Vec<SingleItemPoint>> {
    (1..=steps)
        .map(|k| {
            let v = k as f64 / (steps + 1) as f64;
            let inst = SingleItemInstance::top_and_rest(n, 1.0, v)?;
            let r = equilibrium_welfare(&bkv_worst_equilibrium(&inst, CURVE_GRID)?, &inst)?;
            Ok(SingleItemPoint { v, welfare: r.welfare, price_of_anarchy: r.price_of_anarchy, t: welfare_t(v)? })
        })
        .collect()
}

#[wasm_bindgen]
pub fn single_item_curve(n: usize, steps: usize) -> Result<String, JsValue> {
    let points = single_item_points(n, steps).map_err(to_js)?;
    serde_json::to_string(&points).map_err(to_js)
}

#[derive(Debug, Serialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub poa_bound: f64,
    pub r_bound: f64,
}

pub fn lambda_points(lo: f64, hi: f64, steps: usize) -> allpay_core::Result<Vec<LambdaPoint>> {
    (0..=steps.max(1))
        .map(|k| {
            let lambda = lo + (hi - lo) * k as f64 / steps.max(1) as f64;
            Ok(LambdaPoint { lambda, poa_bound: combined_poa_bound(lambda)?, r_bound: r_lower_bound(lambda)? })
        })
        .collect()
}

/// Price-of-anarchy bound and the `R(F, v) / v` floor across `lambda`.
#[wasm_bindgen]
pub fn lambda_curve(lo: f64, hi: f64, steps: usize) -> Result<String, JsValue> {
    let points = lambda_points(lo, hi, steps).map_err(to_js)?;
    serde_json::to_string(&points).map_err(to_js)
}

/// `valuations` is a JSON array of `[f(0), ..., f(m)]` tables.
pub fn psam_report(valuations: &str, m: usize) -> Result<String, String> {
    let tables: Vec<Vec<f64>> = serde_json::from_str(valuations).map_err(|e| e.to_string())?;
    let fs = tables
        .into_iter()
        .map(MultiUnitValuation::new)
        .collect::<allpay_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let eff = psam_efficiency(&fs, m).map_err(|e| e.to_string())?;
    serde_json::to_string(&eff).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn psam_solve(valuations: &str, m: usize) -> Result<String, JsValue> {
    psam_report(valuations, m).map_err(to_js)
}
