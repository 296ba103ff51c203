//! Spatial discretization: flux-form thickness tendency and vector-invariant
//! momentum tendency on the C-grid.
//!
//! The momentum tendency takes the thickness used for the pressure gradient
//! as a separate argument, because forward-backward averaging feeds the
//! momentum stages a different thickness than the one the velocities carry.

use super::{Grid, SWEConfig, SWEState, SweError};

#[derive(Clone, Debug)]
pub struct Tendency {
    pub dh: Vec<f64>,
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

/// d(h)/dt = -div(h_bar * velocity), with edge thicknesses averaged from the
/// two adjacent centers.
pub fn thickness_tendency(u: &[f64], v: &[f64], h: &[f64], grid: &Grid) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let n = grid.n();
    let mut fu = vec![0.0; n];
    let mut fv = vec![0.0; n];
    for i in 0..nx {
        let im = grid.im(i);
        for j in 0..ny {
            let jm = grid.jm(j);
            let c = grid.idx(i, j);
            fu[c] = 0.5 * (h[c] + h[grid.idx(im, j)]) * u[c];
            fv[c] = 0.5 * (h[c] + h[grid.idx(i, jm)]) * v[c];
        }
    }
    let mut dh = vec![0.0; n];
    for i in 0..nx {
        let ip = grid.ip(i);
        for j in 0..ny {
            let jp = grid.jp(j);
            let c = grid.idx(i, j);
            dh[c] = -((fu[grid.idx(ip, j)] - fu[c]) / grid.dx
                + (fv[grid.idx(i, jp)] - fv[c]) / grid.dy);
        }
    }
    dh
}

/// Vector-invariant momentum tendency:
///   du/dt =  q_u * vbar_u - d/dx (g (h_p + zb) + K)
///   dv/dt = -q_v * ubar_v - d/dy (g (h_p + zb) + K)
/// where q is absolute vorticity averaged to the opposing edge and K is the
/// kinetic energy at centers. With `momentum_advection` off the relative
/// vorticity and K are dropped, leaving Coriolis plus pressure gradient.
///
/// `u`/`v` supply the vorticity, kinetic-energy, and Coriolis terms; `h_p`
/// supplies the pressure gradient.
pub fn momentum_tendency(
    u: &[f64],
    v: &[f64],
    h_p: &[f64],
    config: &SWEConfig,
    grid: &Grid,
) -> (Vec<f64>, Vec<f64>) {
    let (nx, ny) = (grid.nx, grid.ny);
    let n = grid.n();

    let mut zeta = vec![0.0; n];
    if config.momentum_advection {
        for i in 0..nx {
            let im = grid.im(i);
            for j in 0..ny {
                let jm = grid.jm(j);
                let c = grid.idx(i, j);
                zeta[c] =
                    (v[c] - v[grid.idx(im, j)]) / grid.dx - (u[c] - u[grid.idx(i, jm)]) / grid.dy;
            }
        }
    }

    let mut phi = vec![0.0; n];
    for i in 0..nx {
        let ip = grid.ip(i);
        for j in 0..ny {
            let jp = grid.jp(j);
            let c = grid.idx(i, j);
            let mut p = config.g * (h_p[c] + config.zb_at(c));
            if config.momentum_advection {
                let u0 = u[c];
                let u1 = u[grid.idx(ip, j)];
                let v0 = v[c];
                let v1 = v[grid.idx(i, jp)];
                p += 0.25 * (u0 * u0 + u1 * u1) + 0.25 * (v0 * v0 + v1 * v1);
            }
            phi[c] = p;
        }
    }

    let mut du = vec![0.0; n];
    let mut dv = vec![0.0; n];
    for i in 0..nx {
        let im = grid.im(i);
        let ip = grid.ip(i);
        for j in 0..ny {
            let jm = grid.jm(j);
            let jp = grid.jp(j);
            let c = grid.idx(i, j);

            let vbar_u =
                0.25 * (v[c] + v[grid.idx(im, j)] + v[grid.idx(i, jp)] + v[grid.idx(im, jp)]);
            let ubar_v =
                0.25 * (u[c] + u[grid.idx(ip, j)] + u[grid.idx(i, jm)] + u[grid.idx(ip, jm)]);

            let (q_u, q_v) = if config.momentum_advection {
                (
                    0.5 * (zeta[c] + zeta[grid.idx(i, jp)]) + config.f,
                    0.5 * (zeta[c] + zeta[grid.idx(ip, j)]) + config.f,
                )
            } else {
                (config.f, config.f)
            };

            du[c] = q_u * vbar_u - (phi[c] - phi[grid.idx(im, j)]) / grid.dx;
            dv[c] = -q_v * ubar_v - (phi[c] - phi[grid.idx(i, jm)]) / grid.dy;
        }
    }
    (du, dv)
}

/// Full tendency of a state, with the pressure gradient taken from the same
/// thickness that is being fluxed. Rejects non-finite input.
pub fn tendencies(state: &SWEState, config: &SWEConfig, grid: &Grid) -> Result<Tendency, SweError> {
    let n = grid.n();
    if state.h.len() != n || state.u.len() != n || state.v.len() != n {
        return Err(SweError::ShapeMismatch);
    }
    if let Some(zb) = &config.zb {
        if zb.len() != n {
            return Err(SweError::ShapeMismatch);
        }
    }
    if !state.all_finite() || !config.g.is_finite() || !config.f.is_finite() {
        return Err(SweError::NonFinite);
    }
    let dh = thickness_tendency(&state.u, &state.v, &state.h, grid);
    let (du, dv) = momentum_tendency(&state.u, &state.v, &state.h, config, grid);
    Ok(Tendency { dh, du, dv })
}
