//! Browser bindings. Every export returns a JSON string; failures come back
//! as `{"error": "..."}` so the page never has to catch.

use std::f64::consts::PI;

use harmrand::counterexamples::{build_ml_poisson, build_schnorr_poisson, StepConstruction, TentConstruction};
use harmrand::exact;
use harmrand::functions::BoundaryData;
use harmrand::kernels;
use harmrand::poisson;
use harmrand::randomness_tests::{covering_test, nest_tail};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

const MAX_DEGREE: u32 = 4096;
const MAX_POINTS: u32 = 4000;
const MAX_STEP_STAGES: u32 = 40;
const MAX_TENT_STAGES: u32 = 61;

fn respond(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

pub fn fejer_curve_value(n: u32, points: u32) -> Result<Value, String> {
    if n > MAX_DEGREE {
        return Err(format!("degree is limited to {MAX_DEGREE}"));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must lie in 2..={MAX_POINTS}"));
    }
    let n64 = u64::from(n);
    let xs: Vec<f64> = (0..points).map(|j| -PI + 2.0 * PI * f64::from(j) / f64::from(points - 1)).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| kernels::fejer_eval(n64, x)).collect();
    Ok(json!({
        "n": n,
        "x": xs,
        "y": ys,
        "peak_halfwidth": PI / (f64::from(n) + 1.0),
        "lower_bound": kernels::fejer_lower_bound(n64),
    }))
}

/// `F_N` sampled on `[-π, π]` with the peak lower bound.
#[wasm_bindgen]
pub fn fejer_curve(n: u32, points: u32) -> String {
    respond(fejer_curve_value(n, points))
}

pub fn schnorr_radial_value(m_max: u32, x: f64) -> Result<Value, String> {
    if !(1..=MAX_STEP_STAGES).contains(&m_max) {
        return Err(format!("stages must lie in 1..={MAX_STEP_STAGES}"));
    }
    if !x.is_finite() || x.abs() > 8.0 {
        return Err("x must lie in [-8, 8]".into());
    }
    let m_max = m_max as usize;
    let family = covering_test(&exact::int(0), m_max + 2, 2).and_then(|t| nest_tail(&t)).map_err(|e| e.to_string())?;
    let c = build_schnorr_poisson(&family, m_max).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = poisson::default_y_sequence()
        .into_iter()
        .map(|y| {
            let stage = c.stage_for_height(&exact::from_f64(y));
            let m = stage.unwrap_or(m_max);
            json!({
                "y": y,
                "stage": m,
                "value": c.stages[m].f.poisson_integral(x, y),
                "lower_bound": stage.map(|_| StepConstruction::radial_lower_bound(x)),
            })
        })
        .collect();
    Ok(json!({ "x": x, "boundary_value": c.stages[m_max].f.eval(x), "rows": rows }))
}

/// `P[f_m](x, y)` along `y = 2^{-j}` for the step-function construction
/// around `0`, with the stage chosen per height.
#[wasm_bindgen]
pub fn schnorr_radial_trace(m_max: u32, x: f64) -> String {
    respond(schnorr_radial_value(m_max, x))
}

pub fn tent_stage_value(target: &str, s: u32) -> Result<Value, String> {
    if s > MAX_TENT_STAGES {
        return Err(format!("stage is limited to {MAX_TENT_STAGES}"));
    }
    let x = exact::parse(target).map_err(|e| e.to_string())?;
    let s = s as usize;
    let family = covering_test(&x, s.saturating_sub(1) / 2 + 1, 0).map_err(|e| e.to_string())?;
    let c = build_ml_poisson(&family, s).map_err(|e| e.to_string())?;
    let st = &c.stages[s];
    let vertices: Vec<[f64; 2]> =
        st.f.vertices().iter().map(|(a, b)| [exact::to_f64(a), exact::to_f64(b)]).collect();
    let intervals: Vec<[f64; 2]> =
        st.intervals.iter().map(|i| [exact::to_f64(&i.lo), exact::to_f64(&i.hi)]).collect();
    Ok(json!({
        "s": s,
        "vertices": vertices,
        "intervals": intervals,
        "l1_norm": exact::format(&st.l1_norm),
        "norm_bound": exact::format(&TentConstruction::norm_bound(s)),
        "value_at_target": exact::format(&st.f.value_at(&x)),
    }))
}

/// Stage `s` of the tent construction for a covering test around `target`.
#[wasm_bindgen]
pub fn tent_stage(target: &str, s: u32) -> String {
    respond(tent_stage_value(target, s))
}
