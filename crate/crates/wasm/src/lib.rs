//! Browser bindings. Every export takes and returns JSON text.

use serde_json::json;
use springer_core::exactlinalg::{jordan_form, PrimeField};
use springer_core::partitions::{mu_sigma, LeviDatum, Partition};
use springer_core::springer::{enumerate_fibre, FibreOptions};
use springer_core::tableaux::{enumerate_standard, stack, StandardTableau};
use wasm_bindgen::prelude::*;

/// Fibre enumeration cap for the page.
pub const BROWSER_FLAG_CEILING: u64 = 200_000;

fn levi(blocks: &str, shape: &str) -> Result<LeviDatum, String> {
    let shape = Some(shape.trim()).filter(|s| !s.is_empty());
    LeviDatum::parse(blocks, shape).map_err(|e| e.to_string())
}

/// `{"tableau": rows, "shape": [...], "text": rendered}` for the stacked tuple.
pub fn stack_json(blocks: &str, shape: &str, tableaux: &str) -> Result<String, String> {
    let d = levi(blocks, shape)?;
    let tuple: Vec<StandardTableau> =
        serde_json::from_str(tableaux).map_err(|e| format!("tableaux: {e}"))?;
    let out = stack(&d, &tuple).map_err(|e| e.to_string())?;
    Ok(json!({ "tableau": out, "shape": mu_sigma(&d), "text": out.render() }).to_string())
}

/// All standard tableaux of `shape` in ascending order.
pub fn standard_tableaux_json(shape: &str) -> Result<String, String> {
    let shape = Partition::parse(shape).map_err(|e| e.to_string())?;
    let all = enumerate_standard(&shape).map_err(|e| e.to_string())?;
    Ok(json!({ "shape": shape, "count": all.len(), "tableaux": all }).to_string())
}

/// Class sizes of the Springer fibre of a nilpotent of Jordan type `shape` over `F_p`.
pub fn fibre_classes_json(shape: &str, p: u32) -> Result<String, String> {
    let shape = Partition::parse(shape).map_err(|e| e.to_string())?;
    let field = PrimeField::new(p).map_err(|e| e.to_string())?;
    let opts = FibreOptions {
        ceiling: BROWSER_FLAG_CEILING,
        ..Default::default()
    };
    let fibre = enumerate_fibre(&jordan_form(field, &shape), &opts).map_err(|e| e.to_string())?;
    serde_json::to_string(&fibre).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = stackTableaux)]
pub fn stack_tableaux(blocks: &str, shape: &str, tableaux: &str) -> Result<String, JsValue> {
    stack_json(blocks, shape, tableaux).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = standardTableaux)]
pub fn standard_tableaux(shape: &str) -> Result<String, JsValue> {
    standard_tableaux_json(shape).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = fibreClasses)]
pub fn fibre_classes(shape: &str, p: u32) -> Result<String, JsValue> {
    fibre_classes_json(shape, p).map_err(|e| JsValue::from_str(&e))
}
