//! Shared oracles for the integration suites: a line-by-line transcription
//! of the forward-backward stage equations with every intermediate exposed,
//! an independent eigenvalue solver, and a small JSON-schema checker for
//! the shipped output schemas.

#![allow(dead_code)]

use fbrk32::linalg::Mat3;
use fbrk32::scheme::FBWeights;
use fbrk32::vn::LinearWaveParams;
use num_complex::Complex64 as C64;

/// Every intermediate of one forward-backward step on a single Fourier
/// mode, computed by straight-line code independent of the library's
/// column-probing implementation.
pub struct StageTranscript {
    /// Thickness after the one-third stage.
    pub h_third: C64,
    /// Blended thickness seen by the first momentum stage.
    pub h_star_1: C64,
    pub u_1: C64,
    pub v_1: C64,
    /// Thickness after the one-half stage.
    pub h_half: C64,
    pub h_star_2: C64,
    pub u_2: C64,
    pub v_2: C64,
    /// Final thickness.
    pub h_next: C64,
    pub h_star_3: C64,
    pub u_next: C64,
    pub v_next: C64,
}

/// State order is (u_hat, v_hat, eta_hat).
pub fn transcribe_stages(p: &LinearWaveParams, w: &FBWeights, state: [C64; 3]) -> StageTranscript {
    let i = C64::new(0.0, 1.0);
    let big_k = 2.0 * (p.k_dx / 2.0).sin();
    let big_l = 2.0 * (p.l_dy / 2.0).sin();
    let coriolis = p.dt_f * (p.k_dx / 2.0).cos() * (p.l_dy / 2.0).cos();
    let advect = i * (p.u_mean * big_k * p.nu + p.v_mean * big_l * p.nu);
    let grad_x = i * big_k * p.nu;
    let grad_y = i * big_l * p.nu;

    let psi = |u: C64, v: C64, e: C64| -(grad_x * u + grad_y * v) - advect * e;
    let phi_u = |u: C64, v: C64, e_star: C64| {
        p.dt_f * p.v_mean + coriolis * v - advect * u - grad_x * e_star
    };
    let phi_v = |u: C64, v: C64, e_star: C64| {
        -p.dt_f * p.u_mean - coriolis * u - advect * v - grad_y * e_star
    };

    let [u_0, v_0, h_0] = state;

    let h_third = h_0 + psi(u_0, v_0, h_0) / 3.0;
    let h_star_1 = w.beta1 * h_third + (1.0 - w.beta1) * h_0;
    let u_1 = u_0 + phi_u(u_0, v_0, h_star_1) / 3.0;
    let v_1 = v_0 + phi_v(u_0, v_0, h_star_1) / 3.0;

    let h_half = h_0 + psi(u_1, v_1, h_third) / 2.0;
    let h_star_2 = w.beta2 * h_half + (1.0 - w.beta2) * h_0;
    let u_2 = u_0 + phi_u(u_1, v_1, h_star_2) / 2.0;
    let v_2 = v_0 + phi_v(u_1, v_1, h_star_2) / 2.0;

    let h_next = h_0 + psi(u_2, v_2, h_half);
    let h_star_3 = w.beta3 * h_next + (1.0 - 2.0 * w.beta3) * h_half + w.beta3 * h_0;
    let u_next = u_0 + phi_u(u_2, v_2, h_star_3);
    let v_next = v_0 + phi_v(u_2, v_2, h_star_3);

    StageTranscript {
        h_third,
        h_star_1,
        u_1,
        v_1,
        h_half,
        h_star_2,
        u_2,
        v_2,
        h_next,
        h_star_3,
        u_next,
        v_next,
    }
}

/// Final state (u, v, eta) of the transcription.
pub fn transcribe_step(p: &LinearWaveParams, w: &FBWeights, state: [C64; 3]) -> [C64; 3] {
    let t = transcribe_stages(p, w, state);
    [t.u_next, t.v_next, t.h_next]
}

/// Roots of the characteristic polynomial of a 3x3 matrix by Durand-Kerner
/// simultaneous iteration; independent of the library's Cardano solver.
pub fn durand_kerner_eigenvalues(g: &Mat3) -> [C64; 3] {
    let c2 = -g.trace();
    let c1 = g.minor_sum();
    let c0 = -g.det();
    let poly = |z: C64| ((z + c2) * z + c1) * z + c0;

    let scale = 1.0 + g.frobenius();
    let seed = C64::new(0.4, 0.9);
    let mut roots = [
        seed * scale,
        seed * seed * scale,
        seed * seed * seed * scale,
    ];
    for _ in 0..500 {
        let mut next = roots;
        let mut moved = 0.0f64;
        for k in 0..3 {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..3 {
                if j != k {
                    denom *= roots[k] - roots[j];
                }
            }
            let delta = poly(roots[k]) / denom;
            next[k] = roots[k] - delta;
            moved = moved.max(delta.norm());
        }
        roots = next;
        if moved < 1e-15 * scale {
            break;
        }
    }
    roots
}

/// Match two unordered eigenvalue triples; returns the largest pairwise
/// distance under the best assignment.
pub fn eigenvalue_set_distance(a: &[C64; 3], b: &[C64; 3]) -> f64 {
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    perms
        .iter()
        .map(|perm| {
            (0..3)
                .map(|k| (a[k] - b[perm[k]]).norm())
                .fold(0.0f64, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Validate `value` against a JSON-schema subset: `type` (single or list),
/// `properties`/`required`/`additionalProperties: false`, `items`,
/// `minItems`/`maxItems`, `enum`, `anyOf`, and `$ref` into `definitions`.
pub fn validate_schema(
    schema: &serde_json::Value,
    value: &serde_json::Value,
) -> Result<(), String> {
    validate_node(schema, schema, value, "$")
}

fn type_matches(kind: &str, value: &serde_json::Value) -> bool {
    match kind {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.is_i64() || value.is_u64(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        _ => false,
    }
}

fn validate_node(
    root: &serde_json::Value,
    schema: &serde_json::Value,
    value: &serde_json::Value,
    path: &str,
) -> Result<(), String> {
    if let Some(reference) = schema.get("$ref").and_then(|r| r.as_str()) {
        let target = reference
            .strip_prefix("#/")
            .ok_or_else(|| format!("{path}: unsupported $ref '{reference}'"))?
            .split('/')
            .try_fold(root, |node, key| node.get(key))
            .ok_or_else(|| format!("{path}: dangling $ref '{reference}'"))?;
        return validate_node(root, target, value, path);
    }

    if let Some(options) = schema.get("anyOf").and_then(|a| a.as_array()) {
        let mut reasons = Vec::new();
        for option in options {
            match validate_node(root, option, value, path) {
                Ok(()) => return Ok(()),
                Err(e) => reasons.push(e),
            }
        }
        return Err(format!("{path}: no anyOf branch matched ({reasons:?})"));
    }

    if let Some(kinds) = schema.get("type") {
        let ok = match kinds {
            serde_json::Value::String(k) => type_matches(k, value),
            serde_json::Value::Array(list) => list
                .iter()
                .filter_map(|k| k.as_str())
                .any(|k| type_matches(k, value)),
            _ => false,
        };
        if !ok {
            return Err(format!(
                "{path}: type mismatch (expected {kinds}, got {value})"
            ));
        }
    }

    if let Some(allowed) = schema.get("enum").and_then(|e| e.as_array()) {
        if !allowed.contains(value) {
            return Err(format!("{path}: {value} not in enum {allowed:?}"));
        }
    }

    if let Some(object) = value.as_object() {
        if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
            for key in required.iter().filter_map(|k| k.as_str()) {
                if !object.contains_key(key) {
                    return Err(format!("{path}: missing required key '{key}'"));
                }
            }
        }
        let properties = schema.get("properties").and_then(|p| p.as_object());
        if schema.get("additionalProperties") == Some(&serde_json::Value::Bool(false)) {
            for key in object.keys() {
                if properties.is_none_or(|p| !p.contains_key(key)) {
                    return Err(format!("{path}: unexpected key '{key}'"));
                }
            }
        }
        if let Some(props) = properties {
            for (key, subschema) in props {
                if let Some(subvalue) = object.get(key) {
                    validate_node(root, subschema, subvalue, &format!("{path}.{key}"))?;
                }
            }
        }
    }

    if let Some(array) = value.as_array() {
        if let Some(min) = schema.get("minItems").and_then(|m| m.as_u64()) {
            if (array.len() as u64) < min {
                return Err(format!("{path}: fewer than {min} items"));
            }
        }
        if let Some(max) = schema.get("maxItems").and_then(|m| m.as_u64()) {
            if (array.len() as u64) > max {
                return Err(format!("{path}: more than {max} items"));
            }
        }
        if let Some(items) = schema.get("items") {
            for (idx, element) in array.iter().enumerate() {
                validate_node(root, items, element, &format!("{path}[{idx}]"))?;
            }
        }
    }

    Ok(())
}

/// Load a shipped schema from the workspace `schemas/` directory.
pub fn load_schema(name: &str) -> serde_json::Value {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read schema {}: {e}", path.display()));
    serde_json::from_str(&text).expect("schema parses")
}
