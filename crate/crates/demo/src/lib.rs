//! Browser demo: resistance heat maps, single growth steps and short
//! `D_n` time series, rendered as SVG strings for the page in `www/`.

use respert::detection::pair_statistics;
use respert::experiment::{run_timeseries, ExperimentConfig, ExperimentKind, NValues};
use respert::models::{grow_pair, sample_sbm, Schedule};
use respert::plot::{heatmap_svg, timeseries_svg};
use respert::{resistance_matrix, DistanceParams};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_HEATMAP_N: usize = 200;
const MAX_SERIES_N: usize = 300;

fn regime(name: &str) -> Result<Schedule, String> {
    match name {
        "separated" => Ok(Schedule::separated()),
        "overlapping" => Ok(Schedule::overlapping()),
        other => Err(format!("unknown regime {other:?}")),
    }
}

/// Renormalized resistances of a blockmodel sample. Vertices are listed
/// community by community so the block structure shows as two squares.
pub fn heatmap(n: usize, p: f64, q: f64, seed: u64, beta: f64) -> Result<String, String> {
    if n == 0 || n > MAX_HEATMAP_N {
        return Err(format!("n must lie in 1..={MAX_HEATMAP_N}"));
    }
    let params = DistanceParams::new(beta).map_err(|e| e.to_string())?;
    let g = sample_sbm(n, p, q, seed).map_err(|e| e.to_string())?;
    let r = resistance_matrix(&g);
    let order: Vec<usize> = (0..n).step_by(2).chain((1..n).step_by(2)).collect();
    let title = format!(
        "R/(R+{beta}) for n={n}, {} edges, {} components",
        g.edge_count(),
        r.labeling().count()
    );
    Ok(heatmap_svg(n, |i, j| r.renormalized(order[i], order[j], params), &title))
}

/// One growth step at size `n` under a regime, as JSON.
pub fn growth_step(regime_name: &str, n: usize, seed: u64) -> Result<String, String> {
    if !(4..=MAX_SERIES_N).contains(&n) {
        return Err(format!("n must lie in 4..={MAX_SERIES_N}"));
    }
    let s = regime(regime_name)?.evaluate(n).map_err(|e| e.to_string())?;
    let pair = grow_pair(n, s.p, s.q, seed).map_err(|e| e.to_string())?;
    let st = pair_statistics(&pair, DistanceParams::default());
    Ok(json!({
        "n": n,
        "p": s.p,
        "q": s.q,
        "d_n": st.d_n,
        "h": st.h,
        "z": st.z,
        "k_n": st.k_before,
        "k_np1": st.k_after,
        "m_n": st.m_before,
        "event": pair.has_new_cross_edges(),
        "new_neighbors": pair.new_vertex_neighbors(),
    })
    .to_string())
}

/// `D_n` for `n` in `start..=end` with event markers.
pub fn series(regime_name: &str, start: usize, end: usize, seed: u64) -> Result<String, String> {
    if start < 4 || end < start || end > MAX_SERIES_N {
        return Err(format!("need 4 <= start <= end <= {MAX_SERIES_N}"));
    }
    let mut cfg = ExperimentConfig::new(ExperimentKind::Timeseries);
    cfg.schedule = regime(regime_name)?;
    cfg.n_values = NValues::Range { start, end, step: 1 };
    cfg.master_seed = seed;
    let rec = run_timeseries(&cfg).map_err(|e| e.to_string())?;
    Ok(timeseries_svg(&rec))
}

#[wasm_bindgen(js_name = resistanceHeatmap)]
pub fn resistance_heatmap_js(n: usize, p: f64, q: f64, seed: u32, beta: f64) -> Result<String, JsError> {
    heatmap(n, p, q, seed.into(), beta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = growthStep)]
pub fn growth_step_js(regime: &str, n: usize, seed: u32) -> Result<String, JsError> {
    growth_step(regime, n, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = timeSeries)]
pub fn time_series_js(regime: &str, start: usize, end: usize, seed: u32) -> Result<String, JsError> {
    series(regime, start, end, seed.into()).map_err(|e| JsError::new(&e))
}
