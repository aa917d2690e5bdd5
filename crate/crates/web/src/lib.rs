//! Browser bindings for the demo page in `www/`.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(e: colligation::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = charfnModulusGrid)]
pub fn charfn_modulus_grid(seed: u32, inner_dim: usize, res: usize, extent: f64) -> Result<Vec<f64>, JsError> {
    demo::charfn_modulus_grid(seed, inner_dim, res, extent).map_err(js)
}

#[wasm_bindgen(js_name = divisorSlice)]
pub fn divisor_slice(seed: u32, inner_dim: usize, embedded: bool, res: usize, extent: f64) -> Result<Vec<f64>, JsError> {
    demo::divisor_slice(seed, inner_dim, embedded, res, extent).map_err(js)
}

#[wasm_bindgen(js_name = multiplicativityCheck)]
pub fn multiplicativity_check(seed: u32, alpha: usize, m: usize, n1: usize, n2: usize) -> Result<String, JsError> {
    demo::multiplicativity_check(seed, alpha, m, n1, n2).map_err(js)
}
