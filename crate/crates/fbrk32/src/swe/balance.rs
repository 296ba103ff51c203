//! Balanced initialization: given velocities, find the thickness whose
//! pressure gradient cancels the remaining momentum tendency, so the state
//! starts steady up to discretization roundoff.

use super::tendency::momentum_tendency;
use super::{Grid, SWEConfig, SWEState, SweError};

const CG_REL_TOL: f64 = 1e-13;
const MEAN_COMPAT_TOL: f64 = 1e-10;
const RESIDUAL_REL_TOL: f64 = 1e-7;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn subtract_mean(x: &mut [f64]) {
    let m = mean(x);
    for v in x.iter_mut() {
        *v -= m;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negated five-point periodic Laplacian, the symmetric positive
/// semi-definite operator the gradient/divergence pair composes to.
fn neg_laplacian(x: &[f64], grid: &Grid, out: &mut [f64]) {
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let inv_dy2 = 1.0 / (grid.dy * grid.dy);
    for i in 0..grid.nx {
        let im = grid.im(i);
        let ip = grid.ip(i);
        for j in 0..grid.ny {
            let jm = grid.jm(j);
            let jp = grid.jp(j);
            let c = grid.idx(i, j);
            out[c] = -((x[grid.idx(ip, j)] - 2.0 * x[c] + x[grid.idx(im, j)]) * inv_dx2
                + (x[grid.idx(i, jp)] - 2.0 * x[c] + x[grid.idx(i, jm)]) * inv_dy2);
        }
    }
}

/// Solve laplacian(phi) = rhs on the periodic grid by conjugate gradients,
/// returning the zero-mean solution. The right-hand side must have
/// (numerically) zero mean; a mean above `1e-10 * rms(rhs)` is reported as
/// incompatible because no periodic solution exists.
pub fn solve_poisson(rhs: &[f64], grid: &Grid) -> Result<Vec<f64>, SweError> {
    let n = grid.n();
    if rhs.len() != n {
        return Err(SweError::ShapeMismatch);
    }
    if rhs.iter().any(|x| !x.is_finite()) {
        return Err(SweError::NonFinite);
    }
    let rms = (dot(rhs, rhs) / n as f64).sqrt();
    if mean(rhs).abs() > MEAN_COMPAT_TOL * rms {
        return Err(SweError::Incompatible);
    }

    // CG on -laplacian(x) = -rhs over the zero-mean subspace.
    let mut b: Vec<f64> = rhs.iter().map(|x| -x).collect();
    subtract_mean(&mut b);
    let b_norm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }

    let mut r = b;
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let max_iter = 20 * (grid.nx + grid.ny).max(50);
    for _ in 0..max_iter {
        neg_laplacian(&p, grid, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for c in 0..n {
            x[c] += alpha * p[c];
            r[c] -= alpha * ap[c];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= CG_REL_TOL * b_norm {
            subtract_mean(&mut x);
            return Ok(x);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for c in 0..n {
            p[c] = r[c] + beta * p[c];
        }
    }
    Err(SweError::NoConvergence)
}

/// Build a steady state for the given velocity field. The momentum tendency
/// evaluated with a flat reference thickness isolates everything except the
/// free-surface pressure gradient; its divergence is the Poisson right-hand
/// side for the surface that cancels it. The result has mean thickness
/// `config.h_rest`. Velocities whose forcing no periodic surface can cancel
/// (curl or net circulation, e.g. any flow with nonzero mean) are rejected
/// as `Incompatible`.
pub fn balanced_ic(
    u0: &[f64],
    v0: &[f64],
    config: &SWEConfig,
    grid: &Grid,
) -> Result<SWEState, SweError> {
    let n = grid.n();
    if u0.len() != n || v0.len() != n {
        return Err(SweError::ShapeMismatch);
    }
    if u0.iter().chain(v0).any(|x| !x.is_finite()) {
        return Err(SweError::NonFinite);
    }

    // With h_p = 0 the returned tendency is exactly the part the new
    // surface gradient has to cancel: W = (q vbar - d/dx(K + g zb), ...).
    let zeros = vec![0.0; n];
    let (wu, wv) = momentum_tendency(u0, v0, &zeros, config, grid);

    // Divergence of the edge field W, evaluated at centers with the same
    // difference stencil the pressure gradient uses, so that
    // laplacian(g h) = div(W) holds discretely.
    let mut rhs = vec![0.0; n];
    for i in 0..grid.nx {
        let ip = grid.ip(i);
        for j in 0..grid.ny {
            let jp = grid.jp(j);
            let c = grid.idx(i, j);
            rhs[c] =
                (wu[grid.idx(ip, j)] - wu[c]) / grid.dx + (wv[grid.idx(i, jp)] - wv[c]) / grid.dy;
        }
    }
    for x in rhs.iter_mut() {
        *x /= config.g;
    }

    let mut h = solve_poisson(&rhs, grid)?;
    for x in h.iter_mut() {
        *x += config.h_rest;
    }
    let state = SWEState {
        h,
        u: u0.to_vec(),
        v: v0.to_vec(),
    };

    // The Poisson solve only matches the divergence of W. A W with a curl
    // component, or with net circulation around either periodic direction
    // (e.g. Coriolis forcing of a mean flow), is invisible to it, so check
    // that the built state's momentum tendency actually vanishes.
    let (ru, rv) = momentum_tendency(u0, v0, &state.h, config, grid);
    let residual = ru.iter().chain(&rv).fold(0.0f64, |m, &x| m.max(x.abs()));
    let forcing_scale = wu.iter().chain(&wv).fold(0.0f64, |m, &x| m.max(x.abs()));
    if residual > RESIDUAL_REL_TOL * forcing_scale.max(1e-30) {
        return Err(SweError::Incompatible);
    }
    Ok(state)
}
