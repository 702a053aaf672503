//! Browser bindings: generate an instance, solve it, decompose its graph.
//!
//! Each binding wraps a plain function over instance text so the logic is testable
//! on native targets.

use wasm_bindgen::prelude::*;
use wrp_core::instances::{generate, Family, GeneratorSpec};
use wrp_core::io::{format_decomposition, format_instance, format_route, parse_instance};
use wrp_core::oracle::DEFAULT_STATE_BUDGET;
use wrp_core::treewidth::{decompose, DecomposeMode, DEFAULT_EXACT_BUDGET};
use wrp_core::{brute_force_solve, solve_tw, DpConfig, Result, WrpError};

/// Instance text for a generator family.
pub fn generate_text(family: &str, seed: u64, n: usize) -> Result<String> {
    let family: Family = family.parse()?;
    let spec = GeneratorSpec { seed, n, ..GeneratorSpec::new(family) };
    let g = generate(&spec)?;
    Ok(format_instance(&g.instance, g.coords.as_ref()))
}

/// Solves instance text with `tw` or `oracle`; returns route text or `infeasible`.
pub fn solve_text(text: &str, algo: &str) -> Result<String> {
    let inst = parse_instance(text)?;
    let out = match algo {
        "tw" => solve_tw(&inst, &DpConfig::default())?,
        "oracle" => brute_force_solve(&inst, DEFAULT_STATE_BUDGET)?,
        _ => return Err(WrpError::Precondition(format!("unknown algorithm '{algo}'"))),
    };
    let mut body = match &out.solution {
        Some(sol) => format_route(&sol.route, sol.cost),
        None => "infeasible\n".to_string(),
    };
    for (k, v) in &out.counters {
        body.push_str(&format!("counter {k} {v}\n"));
    }
    Ok(body)
}

/// Exact tree decomposition of the instance graph, with a `# width` header.
pub fn decompose_text(text: &str) -> Result<String> {
    let inst = parse_instance(text)?;
    let td = decompose(&inst.graph, DecomposeMode::Exact { budget: DEFAULT_EXACT_BUDGET })?;
    Ok(format!("# width {}\n{}", td.width(), format_decomposition(&td)))
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = generateInstance)]
pub fn generate_instance(family: &str, seed: u32, n: usize) -> std::result::Result<String, JsError> {
    js(generate_text(family, seed.into(), n))
}

#[wasm_bindgen(js_name = solveInstance)]
pub fn solve_instance(text: &str, algo: &str) -> std::result::Result<String, JsError> {
    js(solve_text(text, algo))
}

#[wasm_bindgen(js_name = decomposeInstance)]
pub fn decompose_instance(text: &str) -> std::result::Result<String, JsError> {
    js(decompose_text(text))
}
