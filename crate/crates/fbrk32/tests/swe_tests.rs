//! Physics oracles for the planar solver: discrete Fourier symbols for the
//! staggered tendencies, the single-mode bridge between the nonlinear
//! stepper and the linear amplification matrix, an empirical grid-scale
//! stability onset, and structural invariants.

mod common;

use fbrk32::scheme::{FBWeights, SchemeSpec};
use fbrk32::swe::{
    build_case, diagnostics, read_csv, step, tendencies, write_csv, CaseSpec, Grid, SWEConfig,
    SWEState,
};
use fbrk32::vn::{build_amplification, nu_max, LinearWaveParams};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::TAU;

const BOX: f64 = 1e6;
const GRAV: f64 = 9.80616;
const F_COR: f64 = 1e-4;
const H_REST: f64 = 500.0;

struct ModeAmplitudes {
    u: C64,
    v: C64,
    h: C64,
}

fn wave_config() -> SWEConfig {
    let mut config = SWEConfig::new(GRAV, F_COR, H_REST);
    config.momentum_advection = false;
    config
}

/// Sample complex single-mode amplitudes onto the staggered grid: every
/// field is evaluated at its own location with the common phase
/// kappa_x * x + kappa_y * y.
fn mode_state(grid: &Grid, m: i32, n: i32, amps: &ModeAmplitudes) -> SWEState {
    let kx = TAU * m as f64 / (grid.nx as f64 * grid.dx);
    let ky = TAU * n as f64 / (grid.ny as f64 * grid.dy);
    let wave = |amp: C64, x: f64, y: f64| (amp * C64::from_polar(1.0, kx * x + ky * y)).re;
    let mut state = SWEState::rest(grid, &wave_config());
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let c = grid.idx(i, j);
            let (xc, yc) = ((i as f64 + 0.5) * grid.dx, (j as f64 + 0.5) * grid.dy);
            let (xu, yu) = (i as f64 * grid.dx, yc);
            let (xv, yv) = (xc, j as f64 * grid.dy);
            state.h[c] += wave(amps.h, xc, yc);
            state.u[c] = wave(amps.u, xu, yu);
            state.v[c] = wave(amps.v, xv, yv);
        }
    }
    state
}

/// Recover the complex amplitude of the (m, n) mode from a sampled field;
/// `(ox, oy)` are the staggering offsets of the field's points in cells.
fn project(field: &[f64], grid: &Grid, m: i32, n: i32, ox: f64, oy: f64) -> C64 {
    let kx = TAU * m as f64 / (grid.nx as f64 * grid.dx);
    let ky = TAU * n as f64 / (grid.ny as f64 * grid.dy);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let x = (i as f64 + ox) * grid.dx;
            let y = (j as f64 + oy) * grid.dy;
            acc += field[grid.idx(i, j)] * C64::from_polar(1.0, -(kx * x + ky * y));
        }
    }
    acc * 2.0 / (grid.nx * grid.ny) as f64
}

#[test]
fn staggered_tendencies_match_discrete_fourier_symbols() {
    let grid = Grid::new(64, 64, BOX / 64.0, BOX / 64.0).unwrap();
    let config = wave_config();
    let (m, n) = (3, 5);
    let a = 1e-4;
    let amps = ModeAmplitudes {
        u: C64::new(0.31, 0.12) * a,
        v: C64::new(-0.21, 0.33) * a,
        h: C64::new(0.17, -0.25) * a,
    };
    let state = mode_state(&grid, m, n, &amps);
    let t = tendencies(&state, &config, &grid).unwrap();

    let kx = TAU * m as f64 / BOX;
    let ky = TAU * n as f64 / BOX;
    let sx = 2.0 * (kx * grid.dx / 2.0).sin() / grid.dx;
    let sy = 2.0 * (ky * grid.dy / 2.0).sin() / grid.dy;
    let cc = (kx * grid.dx / 2.0).cos() * (ky * grid.dy / 2.0).cos();
    let i = C64::new(0.0, 1.0);
    let du_hat = F_COR * cc * amps.v - i * GRAV * sx * amps.h;
    let dv_hat = -F_COR * cc * amps.u - i * GRAV * sy * amps.h;
    let dh_hat = -i * H_REST * (sx * amps.u + sy * amps.v);

    let mut worst: f64 = 0.0;
    let wave = |amp: C64, kxx: f64, kyy: f64| (amp * C64::from_polar(1.0, kxx + kyy)).re;
    for ii in 0..grid.nx {
        for jj in 0..grid.ny {
            let c = grid.idx(ii, jj);
            let (xc, yc) = ((ii as f64 + 0.5) * grid.dx, (jj as f64 + 0.5) * grid.dy);
            let du_pred = wave(du_hat, kx * (ii as f64 * grid.dx), ky * yc);
            let dv_pred = wave(dv_hat, kx * xc, ky * (jj as f64 * grid.dy));
            let dh_pred = wave(dh_hat, kx * xc, ky * yc);
            worst = worst
                .max((t.du[c] - du_pred).abs())
                .max((t.dv[c] - dv_pred).abs())
                .max((t.dh[c] - dh_pred).abs());
        }
    }
    assert!(
        worst <= 1e-10,
        "staggered tendencies deviate from symbol prediction by {worst:.3e}"
    );
}

#[test]
fn one_nonlinear_step_matches_the_amplification_matrix() {
    let grid = Grid::new(64, 64, BOX / 64.0, BOX / 64.0).unwrap();
    let config = wave_config();
    let weights = FBWeights::new(0.516, 0.532, 0.331);
    let (m, n) = (3, 5);
    let a = 1e-4;
    let amps = ModeAmplitudes {
        u: C64::new(0.31, 0.12) * a,
        v: C64::new(-0.21, 0.33) * a,
        h: C64::new(0.17, -0.25) * a,
    };
    let c = config.wave_speed();
    let nu = 0.4;
    let dt = nu * grid.dx / c;

    let state = mode_state(&grid, m, n, &amps);
    let next = step(&state, &SchemeSpec::Fbrk32(weights), dt, &config, &grid).unwrap();

    let params = LinearWaveParams {
        nu,
        k_dx: TAU * m as f64 / 64.0,
        l_dy: TAU * n as f64 / 64.0,
        dt_f: dt * F_COR,
        u_mean: 0.0,
        v_mean: 0.0,
    };
    let sys = build_amplification(&params, &weights).unwrap();
    assert_eq!(sys.b.norm(), 0.0, "no forcing without mean flow");
    let w0 = fbrk32::linalg::Vec3([amps.u, amps.v, amps.h * (GRAV / c)]);
    let predicted = sys.g.mul_vec(&w0);

    let anomaly: Vec<f64> = next.h.iter().map(|h| h - H_REST).collect();
    let measured = [
        project(&next.u, &grid, m, n, 0.0, 0.5),
        project(&next.v, &grid, m, n, 0.5, 0.0),
        project(&anomaly, &grid, m, n, 0.5, 0.5) * (GRAV / c),
    ];
    let mut worst: f64 = 0.0;
    for (got, want) in measured.iter().zip(&predicted.0) {
        worst = worst.max((got - want).norm());
    }
    assert!(
        worst <= 1e-10,
        "one-step mode amplitudes deviate from the linear map by {worst:.3e}"
    );
}

/// Integrate a grid-scale checkerboard thickness perturbation and report
/// whether it blows past 100x its initial amplitude within `steps`.
fn checkerboard_grows(weights: &FBWeights, nu: f64, steps: usize) -> bool {
    let (nx, ny) = (16usize, 16usize);
    let grid = Grid::new(nx, ny, BOX / nx as f64, BOX / ny as f64).unwrap();
    let config = wave_config();
    let amp = 1e-6;
    let mut state = SWEState::rest(&grid, &config);
    for i in 0..nx {
        for j in 0..ny {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            state.h[grid.idx(i, j)] += amp * sign;
        }
    }
    let dt = nu * grid.dx / config.wave_speed();
    let scheme = SchemeSpec::Fbrk32(*weights);
    for _ in 0..steps {
        state = match step(&state, &scheme, dt, &config, &grid) {
            Ok(s) => s,
            Err(_) => return true,
        };
        if !state.all_finite() || state.max_abs_h_anomaly(H_REST) > 100.0 * amp {
            return true;
        }
    }
    false
}

#[test]
fn empirical_grid_scale_onset_matches_the_linear_bound() {
    let weights = FBWeights::new(0.516, 0.532, 0.331);
    let (mut lo, mut hi) = (1.5f64, 2.1f64);
    assert!(
        !checkerboard_grows(&weights, lo, 2000),
        "onset below scan window"
    );
    assert!(
        checkerboard_grows(&weights, hi, 2000),
        "onset above scan window"
    );
    while hi - lo > 5e-3 {
        let mid = 0.5 * (lo + hi);
        if checkerboard_grows(&weights, mid, 2000) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let onset = 0.5 * (lo + hi);
    let bound = nu_max(&weights, &LinearWaveParams::grid_scale(0.0), 1e-3)
        .unwrap()
        .value;
    assert!(
        (onset - bound).abs() <= 0.02,
        "empirical onset {onset:.4} vs linear bound {bound:.4}"
    );
}

#[test]
fn mass_is_conserved_over_a_thousand_steps() {
    let case = build_case(CaseSpec::Qlw, 32, 32).unwrap();
    let scheme = SchemeSpec::Fbrk32(FBWeights::new(0.516, 0.532, 0.331));
    let before = diagnostics(&case.state, &case.config, &case.grid).total_mass;
    let mut state = case.state.clone();
    for _ in 0..1000 {
        state = step(&state, &scheme, 300.0, &case.config, &case.grid).unwrap();
    }
    assert!(state.all_finite());
    let after = diagnostics(&state, &case.config, &case.grid).total_mass;
    let drift = ((after - before) / before).abs();
    assert!(drift <= 1e-12, "relative mass drift {drift:.3e}");
}

#[test]
fn csv_snapshot_format_is_stable() {
    let grid = Grid::new(4, 4, 1.0, 1.0).unwrap();
    let config = SWEConfig::new(GRAV, F_COR, 1.0);
    let mut state = SWEState::rest(&grid, &config);
    state.h[grid.idx(0, 0)] = 1.5;
    state.u[grid.idx(1, 2)] = 0.25;
    state.v[grid.idx(3, 3)] = -0.125;

    let mut buf = Vec::new();
    write_csv(&mut buf, &state, &grid).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "field,i,j,value");
    assert_eq!(lines.len(), 1 + 3 * 16);
    assert!(lines.contains(&"h,0,0,1.5"));
    assert!(lines.contains(&"u,1,2,0.25"));
    assert!(lines.contains(&"v,3,3,-0.125"));

    let (back, back_grid) = read_csv(std::io::BufReader::new(buf.as_slice())).unwrap();
    assert_eq!(back_grid.nx, 4);
    assert_eq!(back_grid.ny, 4);
    assert_eq!(back.h, state.h);
    assert_eq!(back.u, state.u);
    assert_eq!(back.v, state.v);
}

fn translate(state: &SWEState, grid: &Grid, si: usize, sj: usize) -> SWEState {
    let mut out = state.clone();
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let src = grid.idx((i + si) % grid.nx, (j + sj) % grid.ny);
            let dst = grid.idx(i, j);
            out.h[dst] = state.h[src];
            out.u[dst] = state.u[src];
            out.v[dst] = state.v[src];
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stepping_commutes_with_torus_translation(
        si in 0usize..8,
        sj in 0usize..8,
        amp_h in -5.0..5.0f64,
        amp_u in -0.5..0.5f64,
        mh in 1i32..4,
        nh in 1i32..4,
        b1 in 0.0..1.0f64,
        b2 in 0.0..1.0f64,
        b3 in 0.0..0.5f64,
        advection in proptest::bool::ANY,
    ) {
        let grid = Grid::new(8, 8, BOX / 8.0, BOX / 8.0).unwrap();
        let mut config = wave_config();
        config.momentum_advection = advection;
        let amps = ModeAmplitudes {
            u: C64::new(amp_u, 0.3 * amp_u),
            v: C64::new(-0.2 * amp_u, amp_u),
            h: C64::new(amp_h, -0.4 * amp_h),
        };
        let base = mode_state(&grid, mh, nh, &amps);
        let scheme = SchemeSpec::Fbrk32(FBWeights::new(b1, b2, b3));
        let dt = 120.0;

        let step_then_shift = translate(
            &step(&base, &scheme, dt, &config, &grid).unwrap(),
            &grid, si, sj,
        );
        let shift_then_step = step(
            &translate(&base, &grid, si, sj),
            &scheme, dt, &config, &grid,
        ).unwrap();
        prop_assert_eq!(&step_then_shift.h, &shift_then_step.h);
        prop_assert_eq!(&step_then_shift.u, &shift_then_step.u);
        prop_assert_eq!(&step_then_shift.v, &shift_then_step.v);
    }
}
