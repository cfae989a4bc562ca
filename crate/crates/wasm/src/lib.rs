//! Browser bindings for the demo page in `www/`. Curves cross the boundary
//! in the native text format.

use granrtc::curves::io::{format_curve, parse_curve};
use granrtc::curves::{causality_closure, sample};
use granrtc::engine::{analyze_component, AnalysisOptions};
use granrtc::mta::{coarse_thresholds, sleep_run};
use wasm_bindgen::prelude::*;

/// Keeps the page responsive on large inputs.
const STATE_BUDGET: u64 = 2_000_000;

fn text<T: ToString>(e: T) -> String {
    e.to_string()
}

pub fn tighten_text(curve: &str) -> Result<String, String> {
    let x = parse_curve(curve).map_err(text)?;
    Ok(format_curve(&causality_closure(&x).map_err(text)?))
}

pub fn sample_text(curve: &str, g: u32) -> Result<String, String> {
    let x = parse_curve(curve).map_err(text)?;
    Ok(format_curve(&sample(&x, g).map_err(text)?))
}

pub fn thresholds_text(b_low: u32, b_high: u32, g: u32) -> Result<String, String> {
    let t = coarse_thresholds(b_low, b_high, g).map_err(text)?;
    Ok(format!("{} {} {} {}", t.y_low, t.y_high, t.h_low, t.h_high))
}

/// Output curve of the sleep/run component followed by a `# states=..`
/// line.
pub fn sleep_run_text(
    threshold: u32,
    arrival: &str,
    service: &str,
    g: u32,
    horizon: u64,
) -> Result<String, String> {
    let arrival = parse_curve(arrival).map_err(text)?;
    let service = parse_curve(service).map_err(text)?;
    let spec = sleep_run(threshold, service);
    let opts = AnalysisOptions {
        horizon: Some(horizon),
        state_budget: Some(STATE_BUDGET),
    };
    let r = analyze_component(&spec, &arrival, g, arrival.len(), &opts).map_err(text)?;
    Ok(format!(
        "{}# states={} stalls={}\n",
        format_curve(&r.curve),
        r.exploration.stats.states,
        r.exploration.bounds.stalls
    ))
}

#[wasm_bindgen]
pub fn tighten(curve: &str) -> Result<String, JsValue> {
    tighten_text(curve).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sample_curve(curve: &str, g: u32) -> Result<String, JsValue> {
    sample_text(curve, g).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn thresholds(b_low: u32, b_high: u32, g: u32) -> Result<String, JsValue> {
    thresholds_text(b_low, b_high, g).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn analyze_sleep_run(
    threshold: u32,
    arrival: &str,
    service: &str,
    g: u32,
    horizon: u64,
) -> Result<String, JsValue> {
    sleep_run_text(threshold, arrival, service, g, horizon).map_err(|e| JsValue::from_str(&e))
}
