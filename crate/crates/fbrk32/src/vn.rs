//! Von Neumann analysis of the forward-backward RK(3,2) scheme on the
//! linearized shallow-water equations: one-step amplification system,
//! spectra, maximal Courant number, cost functions, and the analytic
//! matrix-exponential reference.
//!
//! Fourier state ordering is (u_hat, v_hat, eta_hat) throughout.

use crate::linalg::{self, eig3, expm, Mat3, Vec3, I, ONE, ZERO};
use crate::numerics::simpson;
use crate::scheme::FBWeights;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Slack on |lambda| <= 1: neutral modes sit exactly on the unit circle, so
/// the stability predicate needs room for eigenvalue round-off.
pub const EPS_STAB: f64 = 1e-10;

/// Sentinel cost reported for weights with no stable Courant range.
pub const UNSTABLE_COST: f64 = 1e6;

/// Upper end of the Courant-number scan.
pub const NU_SCAN_MAX: f64 = 4.0;

/// Coarse scan step for the maximal-Courant-number search.
pub const NU_SCAN_STEP: f64 = 0.01;

/// Dimensionless parameters of the one-step linear map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearWaveParams {
    /// Courant number c*dt/dx (equal in x and y).
    pub nu: f64,
    /// k*dx, x-wavenumber-grid product in radians.
    pub k_dx: f64,
    /// l*dy, y-wavenumber-grid product in radians.
    pub l_dy: f64,
    /// dt*f, Coriolis-time-step product.
    pub dt_f: f64,
    /// Dimensionless mean-flow components (Froude-number components).
    pub u_mean: f64,
    pub v_mean: f64,
}

impl LinearWaveParams {
    /// Grid-scale template: k*dx = l*dy = pi, dt*f = 1e-2, mean flow split
    /// evenly between x and y so that |U| is the requested Froude number.
    pub fn grid_scale(froude: f64) -> Self {
        let comp = froude / 2.0f64.sqrt();
        Self {
            nu: 0.0,
            k_dx: std::f64::consts::PI,
            l_dy: std::f64::consts::PI,
            dt_f: 1e-2,
            u_mean: comp,
            v_mean: comp,
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    /// K = 2 sin(k dx / 2).
    pub fn cap_k(&self) -> f64 {
        2.0 * (self.k_dx / 2.0).sin()
    }

    /// L = 2 sin(l dy / 2).
    pub fn cap_l(&self) -> f64 {
        2.0 * (self.l_dy / 2.0).sin()
    }

    /// Grid-modulated Coriolis factor dt*f*cos(k dx/2)*cos(l dy/2) from the
    /// four-point velocity average.
    pub fn phi(&self) -> f64 {
        self.dt_f * (self.k_dx / 2.0).cos() * (self.l_dy / 2.0).cos()
    }

    pub fn froude(&self) -> f64 {
        self.u_mean.hypot(self.v_mean)
    }

    pub fn validate(&self) -> Result<(), VnError> {
        let vals = [
            self.nu,
            self.k_dx,
            self.l_dy,
            self.dt_f,
            self.u_mean,
            self.v_mean,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(VnError::NonFinite);
        }
        if self.nu < 0.0 {
            return Err(VnError::OutOfRange("nu must be nonnegative"));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.k_dx)
            || !(0.0..=std::f64::consts::PI).contains(&self.l_dy)
        {
            return Err(VnError::OutOfRange("k_dx and l_dy must lie in [0, pi]"));
        }
        Ok(())
    }
}

/// The affine one-step map w_next = G w + b of Fourier coefficients.
#[derive(Clone, Copy, Debug)]
pub struct AmplificationSystem {
    pub g: Mat3,
    pub b: Vec3,
}

/// Eigenvalues of an amplification matrix together with its spectral radius.
#[derive(Clone, Copy, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: [C64; 3],
    pub spectral_radius: f64,
    /// Largest eigenpair residual ||G v - lambda v|| observed.
    pub max_residual: f64,
}

/// Outcome classification for the maximal-Courant-number search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NuMaxFlag {
    /// Instability onset bracketed and refined to tolerance.
    Bracketed,
    /// Stable over the whole scanned range; the value is the scan limit.
    StableToScanLimit,
    /// No stable Courant number was found at any tested value.
    UnstableEverywhere,
}

/// Result of the maximal-Courant-number search.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NuMaxResult {
    pub value: f64,
    pub flag: NuMaxFlag,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum VnError {
    #[error("parameters contain non-finite values")]
    NonFinite,
    #[error("parameter out of range: {0}")]
    OutOfRange(&'static str),
    #[error("operation requires zero mean flow")]
    MeanFlowNotZero,
}

/// Apply the three stage equations to one Fourier state. Thickness stages
/// are plain RK3 updates; momentum stages read forward-backward-averaged
/// thickness. This is the production stage path used to assemble G and b.
fn apply_stages(p: &LinearWaveParams, w: &FBWeights, state: &Vec3) -> Vec3 {
    let nu = p.nu;
    let ikn = I * C64::new(p.cap_k() * nu, 0.0);
    let iln = I * C64::new(p.cap_l() * nu, 0.0);
    let phi = C64::new(p.phi(), 0.0);
    let adv = I * C64::new(p.u_mean * p.cap_k() * nu + p.v_mean * p.cap_l() * nu, 0.0);
    let force_u = C64::new(p.dt_f * p.v_mean, 0.0);
    let force_v = C64::new(-p.dt_f * p.u_mean, 0.0);

    let psi = |u: C64, v: C64, eta: C64| -(ikn * u + iln * v) - adv * eta;
    let phi_u = |u: C64, v: C64, eta_avg: C64| force_u + phi * v - adv * u - ikn * eta_avg;
    let phi_v = |u: C64, v: C64, eta_avg: C64| force_v - phi * u - adv * v - iln * eta_avg;

    let (b1, b2, b3) = (
        C64::new(w.beta1, 0.0),
        C64::new(w.beta2, 0.0),
        C64::new(w.beta3, 0.0),
    );
    let [u0, v0, e0] = state.0;
    let third = C64::new(1.0 / 3.0, 0.0);
    let half = C64::new(0.5, 0.0);

    let e1 = e0 + third * psi(u0, v0, e0);
    let ea1 = b1 * e1 + (ONE - b1) * e0;
    let u1 = u0 + third * phi_u(u0, v0, ea1);
    let v1 = v0 + third * phi_v(u0, v0, ea1);

    let e2 = e0 + half * psi(u1, v1, e1);
    let ea2 = b2 * e2 + (ONE - b2) * e0;
    let u2 = u0 + half * phi_u(u1, v1, ea2);
    let v2 = v0 + half * phi_v(u1, v1, ea2);

    let e3 = e0 + psi(u2, v2, e2);
    let ea3 = b3 * e3 + (ONE - C64::new(2.0, 0.0) * b3) * e2 + b3 * e0;
    let u3 = u0 + phi_u(u2, v2, ea3);
    let v3 = v0 + phi_v(u2, v2, ea3);

    Vec3([u3, v3, e3])
}

/// Build the one-step amplification system by evaluating the stage
/// equations on the zero state (forcing vector) and the three unit basis
/// states (matrix columns).
pub fn build_amplification(
    params: &LinearWaveParams,
    weights: &FBWeights,
) -> Result<AmplificationSystem, VnError> {
    params.validate()?;
    if !weights.is_finite() {
        return Err(VnError::NonFinite);
    }
    let b = apply_stages(params, weights, &Vec3::zeros());
    let mut g = Mat3::zeros();
    for j in 0..3 {
        let col = apply_stages(params, weights, &Vec3::basis(j)).sub(&b);
        g.set_col(j, col);
    }
    Ok(AmplificationSystem { g, b })
}

/// Eigenvalues and spectral radius of the amplification matrix.
pub fn spectrum(sys: &AmplificationSystem) -> SpectrumResult {
    let pairs = eig3(&sys.g);
    let eigenvalues = [pairs[0].value, pairs[1].value, pairs[2].value];
    let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_residual = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
    SpectrumResult {
        eigenvalues,
        spectral_radius,
        max_residual,
    }
}

fn stable_at(params: &LinearWaveParams, weights: &FBWeights, nu: f64) -> bool {
    let sys =
        build_amplification(&params.with_nu(nu), weights).expect("scan parameters are finite");
    linalg::spectral_radius(&sys.g) <= 1.0 + EPS_STAB
}

/// Largest Courant number nu such that the scheme is stable at every
/// tested nu' <= nu: coarse scan at `NU_SCAN_STEP` over (0, `NU_SCAN_MAX`],
/// then bisection of the first unstable bracket to absolute tolerance `tol`.
pub fn nu_max(
    weights: &FBWeights,
    template: &LinearWaveParams,
    tol: f64,
) -> Result<NuMaxResult, VnError> {
    template.with_nu(0.0).validate()?;
    if !weights.is_finite() {
        return Err(VnError::NonFinite);
    }
    assert!(tol > 0.0, "bisection tolerance must be positive");
    let steps = (NU_SCAN_MAX / NU_SCAN_STEP).round() as usize;
    let mut bracket = None;
    for i in 1..=steps {
        let nu = i as f64 * NU_SCAN_STEP;
        if !stable_at(template, weights, nu) {
            bracket = Some(((i - 1) as f64 * NU_SCAN_STEP, nu));
            break;
        }
    }
    let (mut lo, mut hi) = match bracket {
        None => {
            return Ok(NuMaxResult {
                value: NU_SCAN_MAX,
                flag: NuMaxFlag::StableToScanLimit,
            })
        }
        Some(b) => b,
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if stable_at(template, weights, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        Ok(NuMaxResult {
            value: 0.0,
            flag: NuMaxFlag::UnstableEverywhere,
        })
    } else {
        Ok(NuMaxResult {
            value: lo,
            flag: NuMaxFlag::Bracketed,
        })
    }
}

/// Reciprocal-of-nu_max cost at bisection tolerance `tol`.
pub fn cost_c1_with_tol(
    weights: &FBWeights,
    template: &LinearWaveParams,
    tol: f64,
) -> Result<f64, VnError> {
    let r = nu_max(weights, template, tol)?;
    if r.value <= 0.0 {
        Ok(UNSTABLE_COST)
    } else {
        Ok(1.0 / r.value)
    }
}

/// Reciprocal of the maximal Courant number (sentinel for unstable weights).
pub fn cost_c1(weights: &FBWeights, template: &LinearWaveParams) -> Result<f64, VnError> {
    cost_c1_with_tol(weights, template, 1e-3)
}

/// Generator of the time-continuous, space-discrete evolution over one step,
/// scaled by dt: gravity entries carry K*nu and L*nu, Coriolis the
/// grid-modulated phi. exp of this is the zero-time-discretization-error
/// reference for the same spatial operator.
pub fn semi_discrete_generator(params: &LinearWaveParams) -> Mat3 {
    let phi = C64::new(params.phi(), 0.0);
    let gk = I * C64::new(params.cap_k() * params.nu, 0.0);
    let gl = I * C64::new(params.cap_l() * params.nu, 0.0);
    Mat3::from_rows([ZERO, phi, -gk], [-phi, ZERO, -gl], [-gk, -gl, ZERO])
}

/// Generator used inside the dispersion-fidelity cost integral: wave entries
/// use the continuous products (k dx)*nu = c k dt, while the Coriolis entry
/// keeps the grid-modulated phi so the integrand vanishes with nu and the
/// quadrature refinement bound holds.
pub fn wave_reference_generator(params: &LinearWaveParams) -> Mat3 {
    let phi = C64::new(params.phi(), 0.0);
    let gk = I * C64::new(params.k_dx * params.nu, 0.0);
    let gl = I * C64::new(params.l_dy * params.nu, 0.0);
    Mat3::from_rows([ZERO, phi, -gk], [-phi, ZERO, -gl], [-gk, -gl, ZERO])
}

/// Analytic one-step map exp(A dt) of the linearized equations with
/// A = [[0, f, -i c k], [-f, 0, -i c l], [-i c k, -i c l, 0]]; unitary
/// because A is skew-Hermitian. Defined for zero mean flow only.
pub fn analytic_g(
    params: &LinearWaveParams,
    dt: f64,
    c: f64,
    k: f64,
    l: f64,
    f: f64,
) -> Result<Mat3, VnError> {
    if params.u_mean != 0.0 || params.v_mean != 0.0 {
        return Err(VnError::MeanFlowNotZero);
    }
    if ![dt, c, k, l, f].iter().all(|v| v.is_finite()) {
        return Err(VnError::NonFinite);
    }
    let fdt = C64::new(f * dt, 0.0);
    let gk = I * C64::new(c * k * dt, 0.0);
    let gl = I * C64::new(c * l * dt, 0.0);
    let a_dt = Mat3::from_rows([ZERO, fdt, -gk], [-fdt, ZERO, -gl], [-gk, -gl, ZERO]);
    Ok(expm(&a_dt))
}

/// Cost combining inverse-nu_max with the integrated Frobenius mismatch
/// between the scheme's map and the analytic wave reference over
/// nu in [0, pi/6], by composite Simpson quadrature with 48 intervals.
pub fn cost_c2_with_tol(
    weights: &FBWeights,
    template: &LinearWaveParams,
    tol: f64,
) -> Result<f64, VnError> {
    cost_c2_quadrature(weights, template, tol, 48)
}

/// Inverse-nu_max plus dispersion-fidelity integral (zero mean flow only).
pub fn cost_c2(weights: &FBWeights, template: &LinearWaveParams) -> Result<f64, VnError> {
    cost_c2_with_tol(weights, template, 1e-3)
}

/// C2 with an explicit Simpson interval count, for refinement checks.
pub fn cost_c2_quadrature(
    weights: &FBWeights,
    template: &LinearWaveParams,
    tol: f64,
    intervals: usize,
) -> Result<f64, VnError> {
    if template.u_mean != 0.0 || template.v_mean != 0.0 {
        return Err(VnError::MeanFlowNotZero);
    }
    let c1 = cost_c1_with_tol(weights, template, tol)?;
    let integrand = |nu: f64| {
        let p = template.with_nu(nu);
        let sys = build_amplification(&p, weights).expect("finite quadrature parameters");
        let reference = expm(&wave_reference_generator(&p));
        reference.sub(&sys.g).frobenius()
    };
    let integral = simpson(integrand, 0.0, std::f64::consts::PI / 6.0, intervals);
    Ok(c1 + integral)
}

/// Per-stage efficiency metric nu_max * k dx / n_stages.
pub fn effective_cfl(nu_max_val: f64, k_dx: f64, n_stages: u32) -> f64 {
    assert!(
        nu_max_val > 0.0 && k_dx > 0.0 && n_stages > 0,
        "effective CFL inputs must be positive"
    );
    nu_max_val * k_dx / n_stages as f64
}

/// 2x2 complex matrix for the one-dimensional wave system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= rhs.0[i][j];
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Eigenvalues by the quadratic formula.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let tr = self.0[0][0] + self.0[1][1];
        let det = self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0];
        let disc = (tr * tr - C64::new(4.0, 0.0) * det).sqrt();
        let half = C64::new(0.5, 0.0);
        [half * (tr + disc), half * (tr - disc)]
    }
}

fn apply_stages_1d(ktilde_nu: f64, w: &FBWeights, state: [C64; 2]) -> [C64; 2] {
    let z = I * C64::new(ktilde_nu, 0.0);
    let (b1, b2, b3) = (
        C64::new(w.beta1, 0.0),
        C64::new(w.beta2, 0.0),
        C64::new(w.beta3, 0.0),
    );
    let third = C64::new(1.0 / 3.0, 0.0);
    let half = C64::new(0.5, 0.0);
    let [e0, u0] = state;

    let e1 = e0 - third * z * u0;
    let u1 = u0 - third * z * (b1 * e1 + (ONE - b1) * e0);
    let e2 = e0 - half * z * u1;
    let u2 = u0 - half * z * (b2 * e2 + (ONE - b2) * e0);
    let e3 = e0 - z * u2;
    let u3 = u0 - z * (b3 * e3 + (ONE - C64::new(2.0, 0.0) * b3) * e2 + b3 * e0);
    [e3, u3]
}

/// One-step map of (eta_hat, u_hat) for the one-dimensional linear wave
/// system with spatially continuous derivatives; the exact counterpart has
/// eigenvalues e^{+-i ktilde nu}.
pub fn amp_1d(ktilde_nu: f64, weights: &FBWeights) -> Mat2 {
    assert!(ktilde_nu >= 0.0, "ktilde_nu must be nonnegative");
    let c0 = apply_stages_1d(ktilde_nu, weights, [ONE, ZERO]);
    let c1 = apply_stages_1d(ktilde_nu, weights, [ZERO, ONE]);
    Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
}

/// Exact one-step map exp(-i ktilde nu [[0,1],[1,0]]) of the 1D system.
pub fn exact_1d(ktilde_nu: f64) -> Mat2 {
    let ct = C64::new(ktilde_nu.cos(), 0.0);
    let mist = -I * C64::new(ktilde_nu.sin(), 0.0);
    Mat2([[ct, mist], [mist, ct]])
}

/// One sampled point of the dispersion relation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DispersionSample {
    pub ktilde_nu: f64,
    pub lambda1: C64,
    pub lambda2: C64,
}

/// Eigenvalue tracks of `amp_1d` at `n_samples` uniform points of
/// ktilde_nu in [0, pi], continuity-ordered by nearest-neighbor matching so
/// each track is a continuous curve.
pub fn dispersion_curve(weights: &FBWeights, n_samples: usize) -> Vec<DispersionSample> {
    assert!(n_samples >= 2, "need at least two samples");
    let mut out = Vec::with_capacity(n_samples);
    let mut prev: Option<(C64, C64)> = None;
    for s in 0..n_samples {
        let kn = std::f64::consts::PI * s as f64 / (n_samples - 1) as f64;
        let [a, b] = amp_1d(kn, weights).eigenvalues();
        let (l1, l2) = match prev {
            None => (a, b),
            Some((p1, p2)) => {
                let keep = (a - p1).norm() + (b - p2).norm();
                let swap = (b - p1).norm() + (a - p2).norm();
                if swap < keep {
                    (b, a)
                } else {
                    (a, b)
                }
            }
        };
        prev = Some((l1, l2));
        out.push(DispersionSample {
            ktilde_nu: kn,
            lambda1: l1,
            lambda2: l2,
        });
    }
    out
}
