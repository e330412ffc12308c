//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function takes plain arrays and returns a JSON string. The
//! `*_json` functions hold the logic and also run natively, which is how the
//! tests exercise them.

use bemdsvr::bemd::{bemd_decompose, emd_decompose, SiftConfig};
use bemdsvr::forecasters::{rolling_evaluation, EvaluationConfig, HoltConfig, ModelSpec, PipelineConfig, Repair, VecConfig};
use bemdsvr::interval_ts::{IntervalSeries, Scale, Transform};
use bemdsvr::synthetic::{generate, SyntheticSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct SeriesOut {
    periods: Vec<String>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize)]
struct Component {
    name: String,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize)]
struct DecompositionOut {
    components: Vec<Component>,
    reconstruction_error: f64,
}

#[derive(Serialize)]
struct WalkForwardOut {
    model: String,
    periods: Vec<String>,
    actual_lower: Vec<f64>,
    actual_upper: Vec<f64>,
    pred_lower: Vec<f64>,
    pred_upper: Vec<f64>,
    u_model: f64,
    u_naive: f64,
    repairs: usize,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn series(lower: &[f64], upper: &[f64]) -> Result<IntervalSeries, String> {
    IntervalSeries::from_bounds(lower, upper, Scale::Raw).map_err(|e| e.to_string())
}

pub fn synthetic_json(seed: u64, length: usize, noise_sd: f64) -> Result<String, String> {
    let s = generate(&SyntheticSpec { seed, length, noise_sd, ..SyntheticSpec::default() }).map_err(|e| e.to_string())?;
    to_json(&SeriesOut {
        periods: s.periods().iter().map(ToString::to_string).collect(),
        lower: s.lower(),
        upper: s.upper(),
    })
}

/// `method` is `bemd-trans1`, `bemd-trans2` or `emd`; `max_imfs == 0` means no limit.
/// For `emd` the lower bound goes in `re` and the upper bound in `im`.
pub fn decompose_json(lower: &[f64], upper: &[f64], method: &str, max_imfs: usize) -> Result<String, String> {
    let s = series(lower, upper)?;
    let cfg = SiftConfig { max_imfs: (max_imfs > 0).then_some(max_imfs), ..SiftConfig::default() };
    let named = |i: usize, n: usize| if i < n { format!("IMF {}", i + 1) } else { "residual".into() };
    let out = match method {
        "bemd-trans1" | "bemd-trans2" => {
            let t = if method == "bemd-trans1" { Transform::Trans1 } else { Transform::Trans2 };
            let c = s.to_complex(t);
            let d = bemd_decompose(&c, &cfg).map_err(|e| e.to_string())?;
            let n = d.num_imfs();
            DecompositionOut {
                components: d
                    .components()
                    .enumerate()
                    .map(|(i, v)| Component {
                        name: named(i, n),
                        re: v.iter().map(|z| z.re).collect(),
                        im: v.iter().map(|z| z.im).collect(),
                    })
                    .collect(),
                reconstruction_error: d.reconstruction_error(c.samples()),
            }
        }
        "emd" => {
            let dl = emd_decompose(&s.lower(), &cfg).map_err(|e| e.to_string())?;
            let du = emd_decompose(&s.upper(), &cfg).map_err(|e| e.to_string())?;
            let err = dl.reconstruction_error(&s.lower()).max(du.reconstruction_error(&s.upper()));
            let n = dl.num_imfs().max(du.num_imfs());
            let (dl, du) = (dl.padded_to(n), du.padded_to(n));
            DecompositionOut {
                components: dl
                    .components()
                    .zip(du.components())
                    .enumerate()
                    .map(|(i, (a, b))| Component { name: named(i, n), re: a.clone(), im: b.clone() })
                    .collect(),
                reconstruction_error: err,
            }
        }
        other => return Err(format!("unknown method {other:?}")),
    };
    to_json(&out)
}

/// One-step forecasts over the last `holdout` points. `model` is one of
/// `bemd-trans1`, `bemd-trans2`, `emd`, `holt`, `vec`.
pub fn walk_forward_json(lower: &[f64], upper: &[f64], holdout: usize, model: &str, seed: u64) -> Result<String, String> {
    let s = series(lower, upper)?;
    let pipeline = PipelineConfig::compact();
    let spec = match model {
        "bemd-trans1" => ModelSpec::BemdSvr(pipeline),
        "bemd-trans2" => ModelSpec::BemdSvr(PipelineConfig { transform: Transform::Trans2, ..pipeline }),
        "emd" => ModelSpec::EmdSvr(pipeline),
        "holt" => ModelSpec::Holt(HoltConfig::default()),
        "vec" => ModelSpec::Vec(VecConfig::default()),
        other => return Err(format!("unknown model {other:?}")),
    };
    let name = spec.name();
    let cfg = EvaluationConfig { holdout, replications: 1, base_seed: seed, models: vec![spec], repair: Repair::Swap };
    let out = rolling_evaluation(&s, &cfg).map_err(|e| e.to_string())?;
    let recs: Vec<_> = out.records.iter().filter(|r| r.model == name).collect();
    let score = |m: &str| out.score(m).map(|a| a.values[0]).unwrap_or(f64::NAN);
    to_json(&WalkForwardOut {
        periods: recs.iter().map(|r| r.period.to_string()).collect(),
        actual_lower: recs.iter().map(|r| r.actual.lower()).collect(),
        actual_upper: recs.iter().map(|r| r.actual.upper()).collect(),
        pred_lower: recs.iter().map(|r| r.pred_lower).collect(),
        pred_upper: recs.iter().map(|r| r.pred_upper).collect(),
        u_model: score(&name),
        u_naive: score("Naive"),
        repairs: out.repairs.last().copied().unwrap_or(0),
        model: name,
    })
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn synthetic(seed: u64, length: usize, noise_sd: f64) -> Result<String, JsValue> {
    js(synthetic_json(seed, length, noise_sd))
}

#[wasm_bindgen]
pub fn decompose(lower: &[f64], upper: &[f64], method: &str, max_imfs: usize) -> Result<String, JsValue> {
    js(decompose_json(lower, upper, method, max_imfs))
}

#[wasm_bindgen]
pub fn walk_forward(lower: &[f64], upper: &[f64], holdout: usize, model: &str, seed: u64) -> Result<String, JsValue> {
    js(walk_forward_json(lower, upper, holdout, model, seed))
}
