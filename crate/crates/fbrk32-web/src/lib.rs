//! Browser-facing bindings: a small JSON surface over the weight toolkit so
//! a static page can plot dispersion curves, query stability limits, and
//! watch a coarse shallow-water run. Every export returns a JSON string with
//! either the payload under `"ok": true` or `"ok": false` plus an `"error"`
//! message, so the JavaScript side never deals with thrown values.

use fbrk32::scheme::{FBWeights, SchemeSpec};
use fbrk32::swe::{build_case, diagnostics, step, CaseSpec};
use fbrk32::vn::{dispersion_curve, effective_cfl, nu_max, LinearWaveParams, NuMaxFlag};
use serde::Serialize;
use wasm_bindgen::prelude::wasm_bindgen;

fn err_json(message: &str) -> String {
    serde_json::json!({ "ok": false, "error": message }).to_string()
}

fn ok_json<T: Serialize>(payload: &T) -> String {
    match serde_json::to_value(payload) {
        Ok(mut value) => {
            value["ok"] = serde_json::Value::Bool(true);
            value.to_string()
        }
        Err(e) => err_json(&e.to_string()),
    }
}

fn parse_weights(b1: f64, b2: f64, b3: f64) -> Result<FBWeights, String> {
    let w = FBWeights::new(b1, b2, b3);
    if !w.is_finite() {
        return Err("weights must be finite".to_string());
    }
    Ok(w)
}

#[derive(Serialize)]
struct CurvePoint {
    x: f64,
    abs1: f64,
    abs2: f64,
    arg1: f64,
    arg2: f64,
}

#[derive(Serialize)]
struct CurvePayload {
    samples: Vec<CurvePoint>,
    nu_max: f64,
}

/// Dispersion curve of the scheme at the given weights: per sampled K~nu the
/// moduli and phases of both eigenvalues, plus the zero-mean-flow stability
/// limit for the header line.
#[wasm_bindgen]
pub fn dispersion_curve_json(b1: f64, b2: f64, b3: f64, samples: usize) -> String {
    let weights = match parse_weights(b1, b2, b3) {
        Ok(w) => w,
        Err(e) => return err_json(&e),
    };
    if !(2..=4096).contains(&samples) {
        return err_json("samples must lie in 2..=4096");
    }
    let limit = match nu_max(&weights, &LinearWaveParams::grid_scale(0.0), 1e-3) {
        Ok(r) => r.value,
        Err(e) => return err_json(&e.to_string()),
    };
    let samples = dispersion_curve(&weights, samples)
        .into_iter()
        .map(|s| CurvePoint {
            x: s.ktilde_nu,
            abs1: s.lambda1.norm(),
            abs2: s.lambda2.norm(),
            arg1: s.lambda1.arg(),
            arg2: s.lambda2.arg(),
        })
        .collect();
    ok_json(&CurvePayload {
        samples,
        nu_max: limit,
    })
}

#[derive(Serialize)]
struct StabilityPayload {
    nu_max: f64,
    flag: String,
    effective_cfl: f64,
}

/// Largest stable Courant number at the grid-scale wave for the given
/// weights and mean-flow magnitude, with the per-stage efficiency figure.
#[wasm_bindgen]
pub fn stability_json(b1: f64, b2: f64, b3: f64, froude: f64) -> String {
    let weights = match parse_weights(b1, b2, b3) {
        Ok(w) => w,
        Err(e) => return err_json(&e),
    };
    if !(0.0..=0.9).contains(&froude) {
        return err_json("froude must lie in [0, 0.9]");
    }
    let result = match nu_max(&weights, &LinearWaveParams::grid_scale(froude), 1e-3) {
        Ok(r) => r,
        Err(e) => return err_json(&e.to_string()),
    };
    let flag = match result.flag {
        NuMaxFlag::Bracketed => "bracketed",
        NuMaxFlag::StableToScanLimit => "stable_to_scan_limit",
        NuMaxFlag::UnstableEverywhere => "unstable_everywhere",
    };
    ok_json(&StabilityPayload {
        nu_max: result.value,
        flag: flag.to_string(),
        effective_cfl: effective_cfl(result.value.max(f64::MIN_POSITIVE), std::f64::consts::PI, 3),
    })
}

#[derive(Serialize)]
struct Frame {
    t: f64,
    h: Vec<f64>,
}

#[derive(Serialize)]
struct PreviewPayload {
    nx: usize,
    ny: usize,
    dt: f64,
    courant: f64,
    stable: bool,
    steps_taken: usize,
    scale: f64,
    max_abs_u: f64,
    total_mass: f64,
    frames: Vec<Frame>,
}

fn quantize(x: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    (x / scale * 1e4).round() * scale / 1e4
}

/// Integrate a named case at Courant number `courant` on an nx-by-nx grid,
/// recording the thickness anomaly every `stride` steps for animation. The
/// run stops early (with `stable: false`) if the anomaly blows past fifty
/// times its initial size or turns non-finite.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_preview_json(
    case: &str,
    b1: f64,
    b2: f64,
    b3: f64,
    nx: usize,
    courant: f64,
    steps: usize,
    stride: usize,
) -> String {
    let weights = match parse_weights(b1, b2, b3) {
        Ok(w) => w,
        Err(e) => return err_json(&e),
    };
    let spec: CaseSpec = match case.parse() {
        Ok(s) => s,
        Err(_) => return err_json("case must be rest, qlw, or jet"),
    };
    if !(8..=64).contains(&nx) {
        return err_json("nx must lie in 8..=64");
    }
    if !(1..=2000).contains(&steps) || stride == 0 {
        return err_json("need 1..=2000 steps and a positive stride");
    }
    if !(courant > 0.0 && courant <= 4.0) {
        return err_json("courant must lie in (0, 4]");
    }

    let setup = match build_case(spec, nx, nx) {
        Ok(s) => s,
        Err(e) => return err_json(&e.to_string()),
    };
    let scheme = SchemeSpec::Fbrk32(weights);
    let dt = courant * setup.grid.dx / setup.config.wave_speed();
    let h_rest = setup.config.h_rest;
    let blowup = 50.0 * setup.h_scale;

    let anomaly_frame = |state: &fbrk32::swe::SWEState, t: f64, scale: f64| Frame {
        t,
        h: state
            .h
            .iter()
            .map(|h| quantize(h - h_rest, scale))
            .collect(),
    };
    let mut frames = vec![anomaly_frame(&setup.state, 0.0, setup.h_scale)];
    let mut state = setup.state.clone();
    let mut stable = true;
    let mut steps_taken = 0usize;
    for k in 1..=steps {
        match step(&state, &scheme, dt, &setup.config, &setup.grid) {
            Ok(next) => state = next,
            Err(_) => {
                stable = false;
                break;
            }
        }
        steps_taken = k;
        if !state.all_finite() || state.max_abs_h_anomaly(h_rest) > blowup {
            stable = false;
            break;
        }
        if k % stride == 0 {
            frames.push(anomaly_frame(&state, k as f64 * dt, setup.h_scale));
        }
    }

    let diag = diagnostics(&state, &setup.config, &setup.grid);
    ok_json(&PreviewPayload {
        nx,
        ny: nx,
        dt,
        courant,
        stable,
        steps_taken,
        scale: setup.h_scale,
        max_abs_u: diag.max_abs_u,
        total_mass: diag.total_mass,
        frames,
    })
}
