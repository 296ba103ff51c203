//! Nonlinear (and quasi-linear) shallow-water solver on a doubly-periodic
//! Arakawa C-grid: thickness at cell centers, u at west edges, v at south
//! edges, vorticity at corners.

mod balance;
mod cases;
mod diagnostics;
mod snapshot;
mod stepper;
mod tendency;

pub use balance::{balanced_ic, solve_poisson};
pub use cases::{
    build_case, build_case_with, CaseSetup, CaseSpec, ParseCaseError, PhysicsOverrides,
};
pub use cases::{BOX_SIZE, CORIOLIS, GRAVITY, REST_THICKNESS};
pub use diagnostics::{diagnostics, l2_diff, max_abs_diff, vorticity, Diagnostics};
pub use snapshot::{read_binary, read_csv, write_binary, write_csv, SnapshotError, BINARY_MAGIC};
pub use stepper::step;
pub use tendency::{momentum_tendency, tendencies, thickness_tendency, Tendency};

/// Doubly-periodic rectangular grid. Index (i, j) is stored at i*ny + j,
/// with i the x index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self, SweError> {
        if nx < 4 || ny < 4 {
            return Err(SweError::BadGrid("grid needs nx, ny >= 4"));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(SweError::BadGrid("grid needs positive finite dx, dy"));
        }
        Ok(Self { nx, ny, dx, dy })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    #[inline]
    pub fn ip(&self, i: usize) -> usize {
        if i + 1 == self.nx {
            0
        } else {
            i + 1
        }
    }

    #[inline]
    pub fn im(&self, i: usize) -> usize {
        if i == 0 {
            self.nx - 1
        } else {
            i - 1
        }
    }

    #[inline]
    pub fn jp(&self, j: usize) -> usize {
        if j + 1 == self.ny {
            0
        } else {
            j + 1
        }
    }

    #[inline]
    pub fn jm(&self, j: usize) -> usize {
        if j == 0 {
            self.ny - 1
        } else {
            j - 1
        }
    }
}

/// Physical configuration of a run.
#[derive(Clone, Debug)]
pub struct SWEConfig {
    /// Gravity (m/s^2).
    pub g: f64,
    /// Constant Coriolis parameter (1/s).
    pub f: f64,
    /// Rest thickness (m).
    pub h_rest: f64,
    /// Bottom topography at cell centers (m); `None` means flat (0).
    pub zb: Option<Vec<f64>>,
    /// With this off the vorticity and kinetic-energy terms are dropped,
    /// leaving the quasi-linear system -f u_perp - g grad(h + zb).
    pub momentum_advection: bool,
}

impl SWEConfig {
    pub fn new(g: f64, f: f64, h_rest: f64) -> Self {
        Self {
            g,
            f,
            h_rest,
            zb: None,
            momentum_advection: true,
        }
    }

    /// Gravity-wave speed sqrt(g H).
    pub fn wave_speed(&self) -> f64 {
        (self.g * self.h_rest).sqrt()
    }

    #[inline]
    pub(crate) fn zb_at(&self, idx: usize) -> f64 {
        match &self.zb {
            Some(zb) => zb[idx],
            None => 0.0,
        }
    }
}

/// Staggered prognostic fields, all nx*ny and indexed i*ny + j:
/// h at centers ((i+1/2)dx, (j+1/2)dy), u at west edges (i dx, (j+1/2)dy),
/// v at south edges ((i+1/2)dx, j dy).
#[derive(Clone, Debug, PartialEq)]
pub struct SWEState {
    pub h: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl SWEState {
    pub fn rest(grid: &Grid, config: &SWEConfig) -> Self {
        let n = grid.n();
        Self {
            h: vec![config.h_rest; n],
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    /// Instability shows up as non-finite fields; this is the marker the
    /// harness inspects after stepping.
    pub fn all_finite(&self) -> bool {
        self.h.iter().all(|x| x.is_finite())
            && self.u.iter().all(|x| x.is_finite())
            && self.v.iter().all(|x| x.is_finite())
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_h_anomaly(&self, h_rest: f64) -> f64 {
        self.h
            .iter()
            .fold(0.0f64, |m, &x| m.max((x - h_rest).abs()))
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SweError {
    #[error("invalid grid: {0}")]
    BadGrid(&'static str),
    #[error("state or parameters contain non-finite values")]
    NonFinite,
    #[error("field length does not match the grid")]
    ShapeMismatch,
    #[error("elliptic right-hand side is incompatible (nonzero mean)")]
    Incompatible,
    #[error("iterative solver failed to converge within the iteration cap")]
    NoConvergence,
    #[error("unknown case name '{0}'")]
    UnknownCase(String),
}
