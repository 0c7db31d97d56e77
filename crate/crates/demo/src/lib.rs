//! WebAssembly bindings for the browser demo in `www/`.

pub mod api;

use wasm_bindgen::prelude::*;

fn js(r: pnlsep::Result<String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// JSON with the sources and mixtures of the synthetic instance.
#[wasm_bindgen]
pub fn instance(seed: u32) -> Result<String, JsError> {
    js(api::instance(seed.into()))
}

/// JSON bundle entry for one slope candidate.
#[wasm_bindgen]
pub fn evaluate(seed: u32, d1: f64, d2: f64) -> Result<String, JsError> {
    js(api::evaluate(seed.into(), &[d1, d2]))
}

/// JSON solution bundle of a complete run.
#[wasm_bindgen]
pub fn optimize(seed: u32, population: u32, archive: u32, generations: u32) -> Result<String, JsError> {
    js(api::optimize(seed.into(), population as usize, archive as usize, generations as usize))
}
