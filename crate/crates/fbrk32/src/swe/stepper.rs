//! Time integrators. All schemes advance thickness and momentum together;
//! the forward-backward scheme additionally blends already-updated
//! thicknesses into the pressure gradient of each momentum stage.

use super::tendency::{momentum_tendency, thickness_tendency};
use super::{Grid, SWEConfig, SWEState, SweError};
use crate::scheme::{FBWeights, SchemeSpec};

fn saxpy(base: &[f64], k: &[f64], s: f64) -> Vec<f64> {
    base.iter().zip(k).map(|(b, t)| b + s * t).collect()
}

fn blend(a: &[f64], wa: f64, b: &[f64], wb: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| wa * x + wb * y).collect()
}

/// Advance one step of size `dt`. The input state is untouched.
pub fn step(
    state: &SWEState,
    scheme: &SchemeSpec,
    dt: f64,
    config: &SWEConfig,
    grid: &Grid,
) -> Result<SWEState, SweError> {
    let n = grid.n();
    if state.h.len() != n || state.u.len() != n || state.v.len() != n {
        return Err(SweError::ShapeMismatch);
    }
    if let Some(zb) = &config.zb {
        if zb.len() != n {
            return Err(SweError::ShapeMismatch);
        }
    }
    Ok(match scheme {
        SchemeSpec::Fbrk32(w) => step_fbrk32(state, *w, dt, config, grid),
        SchemeSpec::Rk3 => step_rk3(state, dt, config, grid),
        SchemeSpec::Ssprk3 => step_ssprk3(state, dt, config, grid),
        SchemeSpec::Rk4 => step_rk4(state, dt, config, grid),
    })
}

/// Three-stage second-order scheme with forward-backward weighting: each
/// momentum stage sees a pressure thickness blended from the newest
/// thickness stage and older levels, while the thickness stages themselves
/// follow the plain three-stage update.
fn step_fbrk32(
    state: &SWEState,
    w: FBWeights,
    dt: f64,
    config: &SWEConfig,
    grid: &Grid,
) -> SWEState {
    let (h0, u0, v0) = (&state.h, &state.u, &state.v);

    let h1 = saxpy(h0, &thickness_tendency(u0, v0, h0, grid), dt / 3.0);
    let h_star = blend(&h1, w.beta1, h0, 1.0 - w.beta1);
    let (du, dv) = momentum_tendency(u0, v0, &h_star, config, grid);
    let u1 = saxpy(u0, &du, dt / 3.0);
    let v1 = saxpy(v0, &dv, dt / 3.0);

    let h2 = saxpy(h0, &thickness_tendency(&u1, &v1, &h1, grid), dt / 2.0);
    let h_star2 = blend(&h2, w.beta2, h0, 1.0 - w.beta2);
    let (du, dv) = momentum_tendency(&u1, &v1, &h_star2, config, grid);
    let u2 = saxpy(u0, &du, dt / 2.0);
    let v2 = saxpy(v0, &dv, dt / 2.0);

    let h3 = saxpy(h0, &thickness_tendency(&u2, &v2, &h2, grid), dt);
    let mut h_star3 = blend(&h3, w.beta3, &h2, 1.0 - 2.0 * w.beta3);
    for (x, h) in h_star3.iter_mut().zip(h0) {
        *x += w.beta3 * h;
    }
    let (du, dv) = momentum_tendency(&u2, &v2, &h_star3, config, grid);
    let u3 = saxpy(u0, &du, dt);
    let v3 = saxpy(v0, &dv, dt);

    SWEState {
        h: h3,
        u: u3,
        v: v3,
    }
}

fn full_tendency(
    u: &[f64],
    v: &[f64],
    h: &[f64],
    config: &SWEConfig,
    grid: &Grid,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let dh = thickness_tendency(u, v, h, grid);
    let (du, dv) = momentum_tendency(u, v, h, config, grid);
    (dh, du, dv)
}

/// Three-stage Runge-Kutta with stage fractions 1/3, 1/2, 1.
fn step_rk3(state: &SWEState, dt: f64, config: &SWEConfig, grid: &Grid) -> SWEState {
    let (h0, u0, v0) = (&state.h, &state.u, &state.v);
    let (dh, du, dv) = full_tendency(u0, v0, h0, config, grid);
    let (h1, u1, v1) = (
        saxpy(h0, &dh, dt / 3.0),
        saxpy(u0, &du, dt / 3.0),
        saxpy(v0, &dv, dt / 3.0),
    );
    let (dh, du, dv) = full_tendency(&u1, &v1, &h1, config, grid);
    let (h2, u2, v2) = (
        saxpy(h0, &dh, dt / 2.0),
        saxpy(u0, &du, dt / 2.0),
        saxpy(v0, &dv, dt / 2.0),
    );
    let (dh, du, dv) = full_tendency(&u2, &v2, &h2, config, grid);
    SWEState {
        h: saxpy(h0, &dh, dt),
        u: saxpy(u0, &du, dt),
        v: saxpy(v0, &dv, dt),
    }
}

/// Strong-stability-preserving three-stage Runge-Kutta: an Euler step, then
/// convex combinations 3/4 + 1/4 and 1/3 + 2/3.
fn step_ssprk3(state: &SWEState, dt: f64, config: &SWEConfig, grid: &Grid) -> SWEState {
    let (h0, u0, v0) = (&state.h, &state.u, &state.v);
    let (dh, du, dv) = full_tendency(u0, v0, h0, config, grid);
    let (h1, u1, v1) = (saxpy(h0, &dh, dt), saxpy(u0, &du, dt), saxpy(v0, &dv, dt));

    let (dh, du, dv) = full_tendency(&u1, &v1, &h1, config, grid);
    let h2 = blend(h0, 0.75, &saxpy(&h1, &dh, dt), 0.25);
    let u2 = blend(u0, 0.75, &saxpy(&u1, &du, dt), 0.25);
    let v2 = blend(v0, 0.75, &saxpy(&v1, &dv, dt), 0.25);

    let (dh, du, dv) = full_tendency(&u2, &v2, &h2, config, grid);
    SWEState {
        h: blend(h0, 1.0 / 3.0, &saxpy(&h2, &dh, dt), 2.0 / 3.0),
        u: blend(u0, 1.0 / 3.0, &saxpy(&u2, &du, dt), 2.0 / 3.0),
        v: blend(v0, 1.0 / 3.0, &saxpy(&v2, &dv, dt), 2.0 / 3.0),
    }
}

/// Classical four-stage fourth-order Runge-Kutta.
fn step_rk4(state: &SWEState, dt: f64, config: &SWEConfig, grid: &Grid) -> SWEState {
    let (h0, u0, v0) = (&state.h, &state.u, &state.v);
    let k1 = full_tendency(u0, v0, h0, config, grid);
    let s1 = (
        saxpy(h0, &k1.0, 0.5 * dt),
        saxpy(u0, &k1.1, 0.5 * dt),
        saxpy(v0, &k1.2, 0.5 * dt),
    );
    let k2 = full_tendency(&s1.1, &s1.2, &s1.0, config, grid);
    let s2 = (
        saxpy(h0, &k2.0, 0.5 * dt),
        saxpy(u0, &k2.1, 0.5 * dt),
        saxpy(v0, &k2.2, 0.5 * dt),
    );
    let k3 = full_tendency(&s2.1, &s2.2, &s2.0, config, grid);
    let s3 = (
        saxpy(h0, &k3.0, dt),
        saxpy(u0, &k3.1, dt),
        saxpy(v0, &k3.2, dt),
    );
    let k4 = full_tendency(&s3.1, &s3.2, &s3.0, config, grid);

    let combine = |base: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| {
        base.iter()
            .enumerate()
            .map(|(idx, &w)| w + dt / 6.0 * (a[idx] + 2.0 * b[idx] + 2.0 * c[idx] + d[idx]))
            .collect()
    };
    SWEState {
        h: combine(h0, &k1.0, &k2.0, &k3.0, &k4.0),
        u: combine(u0, &k1.1, &k2.1, &k3.1, &k4.1),
        v: combine(v0, &k1.2, &k2.2, &k3.2, &k4.2),
    }
}
