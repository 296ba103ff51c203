//! Canonical test-problem setups on a doubly-periodic square box.

use super::{balanced_ic, Grid, SWEConfig, SWEState, SweError};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub const BOX_SIZE: f64 = 1.0e6;
pub const GRAVITY: f64 = 9.80616;
pub const CORIOLIS: f64 = 1.0e-4;
pub const REST_THICKNESS: f64 = 500.0;

const QLW_BUMP_AMPLITUDE: f64 = 1.0;
const JET_PEAK_SPEED: f64 = 3.5;
const JET_WIDTH: f64 = 0.3;
const JET_BUMP_AMPLITUDE: f64 = 0.2;
const JET_BUMP_SIGMA: f64 = 0.15;

/// Named initial-value problems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CaseSpec {
    /// Flat rest state; nothing should ever move.
    Rest,
    /// Quasi-linear gravity-wave test: a Gaussian thickness bump radiating
    /// waves with momentum advection switched off.
    Qlw,
    /// Nonlinear shear test: a balanced zonal jet plus an unbalanced
    /// thickness perturbation, full momentum equation.
    Jet,
    /// Single smooth cosine thickness mode, quasi-linear; cheap and exactly
    /// reproducible, used for step-size studies.
    Mode { k: usize, l: usize, amp: f64 },
}

impl fmt::Display for CaseSpec {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseSpec::Rest => write!(fm, "rest"),
            CaseSpec::Qlw => write!(fm, "qlw"),
            CaseSpec::Jet => write!(fm, "jet"),
            CaseSpec::Mode { k, l, amp } => write!(fm, "mode:{k},{l},{amp}"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("unknown case '{0}' (expected rest, qlw, or jet)")]
pub struct ParseCaseError(String);

impl FromStr for CaseSpec {
    type Err = ParseCaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rest" => Ok(CaseSpec::Rest),
            "qlw" => Ok(CaseSpec::Qlw),
            "jet" => Ok(CaseSpec::Jet),
            other => Err(ParseCaseError(other.to_string())),
        }
    }
}

/// A built problem: grid, physics, initial state, and the scales the
/// stability monitor compares against.
#[derive(Clone, Debug)]
pub struct CaseSetup {
    pub spec: CaseSpec,
    pub grid: Grid,
    pub config: SWEConfig,
    pub state: SWEState,
    /// Largest initial thickness deviation from rest (m).
    pub h_scale: f64,
    /// Largest initial speed, floored by the linear-wave speed a thickness
    /// anomaly of `h_scale` can induce, so purely height-forced cases still
    /// get a meaningful velocity bound.
    pub u_scale: f64,
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Physics knobs a run configuration may override before a case is built
/// (balanced initializations depend on them, so they cannot be patched in
/// afterwards).
#[derive(Clone, Copy, Debug, Default)]
pub struct PhysicsOverrides {
    pub g: Option<f64>,
    pub f: Option<f64>,
    pub h_rest: Option<f64>,
    pub momentum_advection: Option<bool>,
    /// Constant bottom elevation (m).
    pub zb_constant: Option<f64>,
}

/// Construct one of the named cases on an nx-by-ny grid covering the
/// standard square box.
pub fn build_case(spec: CaseSpec, nx: usize, ny: usize) -> Result<CaseSetup, SweError> {
    build_case_with(spec, nx, ny, &PhysicsOverrides::default())
}

/// `build_case` with physics overrides applied before initialization.
pub fn build_case_with(
    spec: CaseSpec,
    nx: usize,
    ny: usize,
    overrides: &PhysicsOverrides,
) -> Result<CaseSetup, SweError> {
    let grid = Grid::new(nx, ny, BOX_SIZE / nx as f64, BOX_SIZE / ny as f64)?;
    let mut config = SWEConfig::new(
        overrides.g.unwrap_or(GRAVITY),
        overrides.f.unwrap_or(CORIOLIS),
        overrides.h_rest.unwrap_or(REST_THICKNESS),
    );
    if !(config.g > 0.0 && config.h_rest > 0.0 && config.f.is_finite()) {
        return Err(SweError::BadGrid(
            "physics needs positive g and rest thickness and finite f",
        ));
    }
    if let Some(z) = overrides.zb_constant {
        if !z.is_finite() {
            return Err(SweError::NonFinite);
        }
        config.zb = Some(vec![z; grid.n()]);
    }
    let n = grid.n();

    let xc = |i: usize| 2.0 * PI * (i as f64 + 0.5) / nx as f64;
    let yc = |j: usize| 2.0 * PI * (j as f64 + 0.5) / ny as f64;

    let state = match spec {
        CaseSpec::Rest => SWEState::rest(&grid, &config),
        CaseSpec::Qlw => {
            config.momentum_advection = false;
            let mut state = SWEState::rest(&grid, &config);
            for i in 0..nx {
                let dx2 = wrap(xc(i) - PI).powi(2);
                for j in 0..ny {
                    let dy2 = wrap(yc(j) - PI).powi(2);
                    state.h[grid.idx(i, j)] += QLW_BUMP_AMPLITUDE * (-100.0 * (dx2 + dy2)).exp();
                }
            }
            state
        }
        CaseSpec::Mode { k, l, amp } => {
            config.momentum_advection = false;
            let mut state = SWEState::rest(&grid, &config);
            for i in 0..nx {
                for j in 0..ny {
                    state.h[grid.idx(i, j)] += amp * (k as f64 * xc(i) + l as f64 * yc(j)).cos();
                }
            }
            state
        }
        CaseSpec::Jet => {
            // u shares its y coordinate with cell centers, so the profile is
            // sampled at yc. The discrete mean is removed: on a periodic
            // domain only a mean-free zonal flow admits a balancing surface.
            let mut profile: Vec<f64> = (0..ny)
                .map(|j| JET_PEAK_SPEED / ((yc(j) - PI) / JET_WIDTH).cosh().powi(2))
                .collect();
            let pmean = profile.iter().sum::<f64>() / ny as f64;
            for p in profile.iter_mut() {
                *p -= pmean;
            }
            let mut u0 = vec![0.0; n];
            for i in 0..nx {
                for j in 0..ny {
                    u0[grid.idx(i, j)] = profile[j];
                }
            }
            let mut state = balanced_ic(&u0, &vec![0.0; n], &config, &grid)?;
            for i in 0..nx {
                let dx2 = wrap(xc(i) - PI).powi(2);
                for j in 0..ny {
                    let dy2 = wrap(yc(j) - PI).powi(2);
                    state.h[grid.idx(i, j)] += JET_BUMP_AMPLITUDE
                        * (-(dx2 + dy2) / (2.0 * JET_BUMP_SIGMA * JET_BUMP_SIGMA)).exp();
                }
            }
            state
        }
    };
    if let Some(adv) = overrides.momentum_advection {
        config.momentum_advection = adv;
    }

    let h_scale = state.max_abs_h_anomaly(config.h_rest).max(1e-30);
    let wave_speed_scale = h_scale * (config.g / config.h_rest).sqrt();
    let u_scale = state.max_abs_u().max(wave_speed_scale);
    Ok(CaseSetup {
        spec,
        grid,
        config,
        state,
        h_scale,
        u_scale,
    })
}
