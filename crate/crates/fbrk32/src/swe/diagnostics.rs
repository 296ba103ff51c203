//! Integral diagnostics and field comparison helpers.

use super::{Grid, SWEConfig, SWEState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// Integral of thickness over the domain (m^3).
    pub total_mass: f64,
    /// Kinetic plus potential energy (J per unit density).
    pub total_energy: f64,
    pub max_abs_vorticity: f64,
    pub max_abs_u: f64,
    pub max_h_anomaly: f64,
}

/// Relative vorticity (dv/dx - du/dy) at cell corners (i dx, j dy).
pub fn vorticity(u: &[f64], v: &[f64], grid: &Grid) -> Vec<f64> {
    let mut zeta = vec![0.0; grid.n()];
    for i in 0..grid.nx {
        let im = grid.im(i);
        for j in 0..grid.ny {
            let jm = grid.jm(j);
            let c = grid.idx(i, j);
            zeta[c] = (v[c] - v[grid.idx(im, j)]) / grid.dx - (u[c] - u[grid.idx(i, jm)]) / grid.dy;
        }
    }
    zeta
}

pub fn diagnostics(state: &SWEState, config: &SWEConfig, grid: &Grid) -> Diagnostics {
    let cell = grid.dx * grid.dy;
    let mut mass = 0.0;
    let mut energy = 0.0;
    for i in 0..grid.nx {
        let im = grid.im(i);
        for j in 0..grid.ny {
            let jm = grid.jm(j);
            let c = grid.idx(i, j);
            mass += state.h[c];

            let h_u = 0.5 * (state.h[c] + state.h[grid.idx(im, j)]);
            let h_v = 0.5 * (state.h[c] + state.h[grid.idx(i, jm)]);
            let surface = state.h[c] + config.zb_at(c);
            energy += 0.5 * h_u * state.u[c] * state.u[c]
                + 0.5 * h_v * state.v[c] * state.v[c]
                + 0.5 * config.g * surface * surface;
        }
    }
    let zeta = vorticity(&state.u, &state.v, grid);
    Diagnostics {
        total_mass: mass * cell,
        total_energy: energy * cell,
        max_abs_vorticity: zeta.iter().fold(0.0f64, |m, &x| m.max(x.abs())),
        max_abs_u: state.max_abs_u(),
        max_h_anomaly: state.max_abs_h_anomaly(config.h_rest),
    }
}

/// Root-mean-square difference between two equally shaped fields.
pub fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (s / a.len() as f64).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
