//! Experiment layer: long stable runs with a blow-up monitor, maximal
//! stable step search, step-size convergence studies, one-step accuracy
//! slopes on the 1D linear system, and cross-scheme solution comparison.

use crate::numerics::loglog_slope;
use crate::scheme::{FBWeights, SchemeSpec};
use crate::swe::{self, build_case, step, vorticity, CaseSetup, CaseSpec, SWEState, SweError};
use crate::vn::{self, Mat2};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// A run is declared blown up once thickness anomaly or speed exceeds this
/// multiple of the initial scales (or goes non-finite).
pub const STABILITY_FACTOR: f64 = 50.0;

/// Environment variable capping worker threads used by the sweep helpers.
pub const THREADS_ENV: &str = "FBRK_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Swe(#[from] SweError),
    #[error("run with dt={dt} blew up before t={t_final}")]
    Unstable { dt: f64, t_final: f64 },
    #[error("dt={dt} does not divide the final time {t_final} to 1e-9 relative")]
    NotCommensurate { dt: f64, t_final: f64 },
    #[error("the lower trial step dt={0} is already unstable; no bracket exists")]
    UnstableAtLowerBound(f64),
    #[error("invalid argument: {0}")]
    BadArgument(&'static str),
    #[error("reference step must be at least 8x smaller than the finest tested dt")]
    ReferenceTooCoarse,
}

/// Outcome of a monitored fixed-step run.
pub struct RunOutcome {
    pub state: SWEState,
    pub stable: bool,
    pub steps_taken: u64,
}

fn within_bounds(state: &SWEState, case: &CaseSetup) -> bool {
    state.all_finite()
        && state.max_abs_h_anomaly(case.config.h_rest) <= STABILITY_FACTOR * case.h_scale
        && state.max_abs_u() <= STABILITY_FACTOR * case.u_scale
}

/// Advance `steps` steps of size `dt` from the case's initial state,
/// checking the blow-up monitor after every step and stopping early once it
/// trips.
pub fn run_fixed(
    case: &CaseSetup,
    scheme: &SchemeSpec,
    dt: f64,
    steps: u64,
) -> Result<RunOutcome, HarnessError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(HarnessError::BadArgument("dt must be positive and finite"));
    }
    let mut state = case.state.clone();
    for k in 0..steps {
        state = step(&state, scheme, dt, &case.config, &case.grid)?;
        if !within_bounds(&state, case) {
            return Ok(RunOutcome {
                state,
                stable: false,
                steps_taken: k + 1,
            });
        }
    }
    Ok(RunOutcome {
        state,
        stable: true,
        steps_taken: steps,
    })
}

fn steps_covering(duration: f64, dt: f64) -> u64 {
    ((duration / dt).ceil() as u64).max(1)
}

/// Result of a maximal-stable-step search.
#[derive(Clone, Debug, Serialize)]
pub struct CFLReport {
    pub case: String,
    pub scheme: String,
    pub duration: f64,
    pub dt_max: f64,
    /// Set when even the upper trial step stayed stable, so `dt_max` is only
    /// a lower bound on the true threshold.
    pub open_upper_bound: bool,
    pub probes: u32,
}

/// Bisect the largest dt that survives `duration` of integration (the run
/// uses ceil(duration/dt) steps). Requires a stable lower trial step; an
/// upper trial step that is still stable short-circuits with
/// `open_upper_bound` set.
pub fn max_stable_dt(
    case: &CaseSetup,
    scheme: &SchemeSpec,
    duration: f64,
    dt_lo: f64,
    dt_hi: f64,
    rel_tol: f64,
) -> Result<CFLReport, HarnessError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(HarnessError::BadArgument("duration must be positive"));
    }
    if !(dt_lo > 0.0 && dt_hi > dt_lo && dt_hi.is_finite()) {
        return Err(HarnessError::BadArgument("need 0 < dt_lo < dt_hi"));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(HarnessError::BadArgument("rel_tol must lie in (0, 1)"));
    }
    let mut probes = 0u32;
    let mut stable_at = |dt: f64| -> Result<bool, HarnessError> {
        probes += 1;
        Ok(run_fixed(case, scheme, dt, steps_covering(duration, dt))?.stable)
    };

    if !stable_at(dt_lo)? {
        return Err(HarnessError::UnstableAtLowerBound(dt_lo));
    }
    let report = |dt_max: f64, open: bool, probes: u32| CFLReport {
        case: case.spec.to_string(),
        scheme: scheme.to_string(),
        duration,
        dt_max,
        open_upper_bound: open,
        probes,
    };
    if stable_at(dt_hi)? {
        return Ok(report(dt_hi, true, probes));
    }
    let (mut lo, mut hi) = (dt_lo, dt_hi);
    while hi - lo > rel_tol * lo {
        let mid = 0.5 * (lo + hi);
        if stable_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(report(lo, false, probes))
}

/// Step-size convergence against a fourth-order reference run.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub case: String,
    pub scheme: String,
    pub t_final: f64,
    pub reference_dt: f64,
    pub dt_list: Vec<f64>,
    pub errors_h: Vec<f64>,
    pub errors_u: Vec<f64>,
    pub slope_h: f64,
    pub slope_u: f64,
}

fn commensurate_steps(t_final: f64, dt: f64) -> Result<u64, HarnessError> {
    let n = (t_final / dt).round();
    if n < 1.0 || (n * dt - t_final).abs() > 1e-9 * t_final {
        return Err(HarnessError::NotCommensurate { dt, t_final });
    }
    Ok(n as u64)
}

fn run_to(
    case: &CaseSetup,
    scheme: &SchemeSpec,
    dt: f64,
    t_final: f64,
) -> Result<SWEState, HarnessError> {
    let steps = commensurate_steps(t_final, dt)?;
    let out = run_fixed(case, scheme, dt, steps)?;
    if !out.stable {
        return Err(HarnessError::Unstable { dt, t_final });
    }
    Ok(out.state)
}

/// Integrate `scheme` to `t_final` at each dt in `dt_list` and measure
/// root-mean-square errors in thickness and zonal velocity against a
/// fourth-order run at `reference_dt`, fitting log-log slopes. Every dt
/// (including the reference) must divide `t_final`; the reference step must
/// be at least eight times smaller than the finest tested step.
pub fn convergence_study(
    case: &CaseSetup,
    scheme: &SchemeSpec,
    dt_list: &[f64],
    reference_dt: f64,
    t_final: f64,
) -> Result<ConvergenceReport, HarnessError> {
    if dt_list.len() < 2 {
        return Err(HarnessError::BadArgument("need at least two step sizes"));
    }
    if dt_list.iter().any(|&dt| !(dt > 0.0 && dt.is_finite())) {
        return Err(HarnessError::BadArgument("step sizes must be positive"));
    }
    let min_dt = dt_list.iter().cloned().fold(f64::INFINITY, f64::min);
    if !reference_dt.is_finite() || reference_dt <= 0.0 || reference_dt > min_dt / 8.0 {
        return Err(HarnessError::ReferenceTooCoarse);
    }
    for &dt in dt_list.iter().chain(std::iter::once(&reference_dt)) {
        commensurate_steps(t_final, dt)?;
    }

    let reference = run_to(case, &SchemeSpec::Rk4, reference_dt, t_final)?;
    let runs = parallel_map(dt_list.to_vec(), |dt| run_to(case, scheme, dt, t_final));
    let mut errors_h = Vec::with_capacity(dt_list.len());
    let mut errors_u = Vec::with_capacity(dt_list.len());
    for run in runs {
        let state = run?;
        errors_h.push(swe::l2_diff(&state.h, &reference.h));
        errors_u.push(swe::l2_diff(&state.u, &reference.u));
    }
    let floor = |v: &[f64]| -> Vec<f64> { v.iter().map(|&e| e.max(1e-300)).collect() };
    Ok(ConvergenceReport {
        case: case.spec.to_string(),
        scheme: scheme.to_string(),
        t_final,
        reference_dt,
        dt_list: dt_list.to_vec(),
        errors_h: errors_h.clone(),
        errors_u: errors_u.clone(),
        slope_h: loglog_slope(dt_list, &floor(&errors_h)),
        slope_u: loglog_slope(dt_list, &floor(&errors_u)),
    })
}

/// Root-mean-square thickness difference between fourth-order reference
/// runs at `reference_dt` and half of it; quantifies how converged the
/// reference itself is.
pub fn reference_self_check(
    case: &CaseSetup,
    reference_dt: f64,
    t_final: f64,
) -> Result<f64, HarnessError> {
    let a = run_to(case, &SchemeSpec::Rk4, reference_dt, t_final)?;
    let b = run_to(case, &SchemeSpec::Rk4, reference_dt / 2.0, t_final)?;
    Ok(swe::l2_diff(&a.h, &b.h))
}

/// Which part of the one-step error to measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LteComponent {
    /// Frobenius norm of the full 2x2 map difference.
    Full,
    /// Norm of the thickness row only.
    Thickness,
}

fn rk_polynomial_map(theta: f64, order4: bool) -> Mat2 {
    // The one-step map of a classical RK method on the symmetric linear
    // system has eigenvalues R(-i theta), R(+i theta) on the fixed
    // eigenvectors (1, 1) and (1, -1).
    let r = |z: C64| {
        let mut acc = C64::new(1.0, 0.0) + z + z * z / 2.0 + z * z * z / 6.0;
        if order4 {
            acc += z * z * z * z / 24.0;
        }
        acc
    };
    let rp = r(C64::new(0.0, -theta));
    let rm = r(C64::new(0.0, theta));
    let d = 0.5 * (rp + rm);
    let o = 0.5 * (rp - rm);
    Mat2([[d, o], [o, d]])
}

fn one_step_map(scheme: &SchemeSpec, theta: f64) -> Mat2 {
    match scheme {
        SchemeSpec::Fbrk32(w) => vn::amp_1d(theta, w),
        SchemeSpec::Rk3 | SchemeSpec::Ssprk3 => rk_polynomial_map(theta, false),
        SchemeSpec::Rk4 => rk_polynomial_map(theta, true),
    }
}

/// One-step truncation errors of a scheme on the 1D linear wave system at
/// the given nondimensional steps, with the log-log slope of error versus
/// step. Steps must be positive, distinct, and at most pi.
pub fn lte_errors(
    scheme: &SchemeSpec,
    ktilde_nu_list: &[f64],
    component: LteComponent,
) -> Result<Vec<f64>, HarnessError> {
    if ktilde_nu_list.len() < 2 {
        return Err(HarnessError::BadArgument("need at least two step sizes"));
    }
    if ktilde_nu_list
        .iter()
        .any(|&t| !(t > 0.0 && t <= std::f64::consts::PI))
    {
        return Err(HarnessError::BadArgument(
            "one-step sizes must lie in (0, pi]",
        ));
    }
    Ok(ktilde_nu_list
        .iter()
        .map(|&theta| {
            let diff = one_step_map(scheme, theta).sub(&vn::exact_1d(theta));
            let err = match component {
                LteComponent::Full => diff.frobenius(),
                LteComponent::Thickness => {
                    (diff.0[0][0].norm_sqr() + diff.0[0][1].norm_sqr()).sqrt()
                }
            };
            err.max(1e-300)
        })
        .collect())
}

pub fn lte_slope_component(
    scheme: &SchemeSpec,
    ktilde_nu_list: &[f64],
    component: LteComponent,
) -> Result<f64, HarnessError> {
    let errs = lte_errors(scheme, ktilde_nu_list, component)?;
    Ok(loglog_slope(ktilde_nu_list, &errs))
}

pub fn lte_slope(scheme: &SchemeSpec, ktilde_nu_list: &[f64]) -> Result<f64, HarnessError> {
    lte_slope_component(scheme, ktilde_nu_list, LteComponent::Full)
}

/// Pointwise comparison of two integrations of the same case on the same
/// grid (so no interpolation enters). The relative measure divides by the
/// larger of the two vorticity maxima, making the result symmetric under
/// swapping the schemes.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionDiff {
    pub case: String,
    pub scheme_a: String,
    pub scheme_b: String,
    pub dt_a: f64,
    pub dt_b: f64,
    pub t_final: f64,
    pub max_abs_vorticity_diff: f64,
    pub max_abs_vorticity: f64,
    pub relative_vorticity_diff: f64,
    pub rms_h_diff: f64,
}

pub fn solution_diff(
    case: &CaseSetup,
    scheme_a: &SchemeSpec,
    dt_a: f64,
    scheme_b: &SchemeSpec,
    dt_b: f64,
    t_final: f64,
) -> Result<SolutionDiff, HarnessError> {
    let state_a = run_to(case, scheme_a, dt_a, t_final)?;
    let state_b = run_to(case, scheme_b, dt_b, t_final)?;
    let za = vorticity(&state_a.u, &state_a.v, &case.grid);
    let zb = vorticity(&state_b.u, &state_b.v, &case.grid);
    let max_abs = |f: &[f64]| f.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let scale = max_abs(&za).max(max_abs(&zb)).max(1e-300);
    let diff = swe::max_abs_diff(&za, &zb);
    Ok(SolutionDiff {
        case: case.spec.to_string(),
        scheme_a: scheme_a.to_string(),
        scheme_b: scheme_b.to_string(),
        dt_a,
        dt_b,
        t_final,
        max_abs_vorticity_diff: diff,
        max_abs_vorticity: scale,
        relative_vorticity_diff: diff / scale,
        rms_h_diff: swe::l2_diff(&state_a.h, &state_b.h),
    })
}

/// Default search window and duration used by the step-limit experiments.
pub fn default_cfl_duration(case: CaseSpec) -> f64 {
    match case {
        CaseSpec::Jet => 2.4e5,
        _ => 1.2e5,
    }
}

/// Convenience wrapper building the standard 64x64 case.
pub fn standard_case(spec: CaseSpec) -> Result<CaseSetup, HarnessError> {
    Ok(build_case(spec, 64, 64)?)
}

/// Reference weights measured as optimal in the two cost models at zero
/// mean flow, used by the comparison experiments.
pub fn published_c1_weights() -> FBWeights {
    FBWeights::new(0.500, 0.500, 0.344)
}

pub fn published_c2_weights() -> FBWeights {
    FBWeights::new(0.516, 0.532, 0.331)
}

fn thread_count(items: usize) -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1);
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    cap.unwrap_or(hw).min(items.max(1))
}

/// Apply `f` to every item, fanning out over worker threads capped by the
/// `FBRK_THREADS` environment variable. Output order matches input order,
/// and `f` must be a pure function of its argument.
pub fn parallel_map<T, R, F>(items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let workers = thread_count(items.len());
    if workers <= 1 {
        return items.into_iter().map(f).collect();
    }
    let n = items.len();
    let slots: Vec<Mutex<Option<T>>> = items.into_iter().map(|t| Mutex::new(Some(t))).collect();
    let results: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let f = &f;
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= n {
                    break;
                }
                let item = slots[k].lock().unwrap().take().unwrap();
                *results[k].lock().unwrap() = Some(f(item));
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().unwrap().unwrap())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_preserves_order() {
        let out = parallel_map((0..100).collect::<Vec<_>>(), |x| x * x);
        assert_eq!(out, (0..100).map(|x| x * x).collect::<Vec<_>>());
    }

    #[test]
    fn rest_case_never_blows_up_and_reports_open_bound() {
        let case = standard_case(CaseSpec::Rest).unwrap();
        let report = max_stable_dt(&case, &SchemeSpec::Rk4, 1e4, 50.0, 2000.0, 0.01).unwrap();
        assert!(report.open_upper_bound);
        assert_eq!(report.dt_max, 2000.0);
    }

    #[test]
    fn unstable_lower_bound_is_an_error() {
        let case = standard_case(CaseSpec::Qlw).unwrap();
        let err = max_stable_dt(&case, &SchemeSpec::Rk4, 2.4e4, 5e4, 1e5, 0.01).unwrap_err();
        assert!(matches!(err, HarnessError::UnstableAtLowerBound(_)));
    }

    #[test]
    fn commensurability_is_enforced() {
        let case = standard_case(CaseSpec::Qlw).unwrap();
        let err =
            convergence_study(&case, &SchemeSpec::Rk3, &[300.0, 170.0], 1.0, 1.0e4).unwrap_err();
        assert!(matches!(err, HarnessError::NotCommensurate { .. }));
    }

    #[test]
    fn reference_dt_must_be_much_finer() {
        let case = standard_case(CaseSpec::Qlw).unwrap();
        let err =
            convergence_study(&case, &SchemeSpec::Rk3, &[200.0, 100.0], 50.0, 1.0e4).unwrap_err();
        assert!(matches!(err, HarnessError::ReferenceTooCoarse));
    }

    #[test]
    fn one_step_slopes_match_formal_orders() {
        let thetas: Vec<f64> = (0..8).map(|k| 1e-3 * 2f64.powi(k)).collect();
        let rk3 = lte_slope(&SchemeSpec::Rk3, &thetas).unwrap();
        assert!((rk3 - 4.0).abs() < 0.1, "rk3 slope {rk3}");
        let rk4 = lte_slope(&SchemeSpec::Rk4, &thetas).unwrap();
        assert!((rk4 - 5.0).abs() < 0.1, "rk4 slope {rk4}");
        let fb = lte_slope(
            &SchemeSpec::Fbrk32(FBWeights::new(0.531, 0.531, 0.313)),
            &thetas,
        )
        .unwrap();
        assert!((fb - 3.0).abs() < 0.1, "fb slope {fb}");
    }

    #[test]
    fn reduction_weights_keep_thickness_third_order() {
        let thetas: Vec<f64> = (0..8).map(|k| 1e-3 * 2f64.powi(k)).collect();
        let slope = lte_slope_component(
            &SchemeSpec::Fbrk32(FBWeights::rk3_reduction()),
            &thetas,
            LteComponent::Thickness,
        )
        .unwrap();
        assert!(slope >= 3.0, "thickness-row slope {slope}");
    }

    #[test]
    fn lte_rejects_bad_step_lists() {
        assert!(lte_slope(&SchemeSpec::Rk3, &[0.1]).is_err());
        assert!(lte_slope(&SchemeSpec::Rk3, &[0.0, 0.1]).is_err());
        assert!(lte_slope(&SchemeSpec::Rk3, &[0.1, 4.0]).is_err());
    }

    #[test]
    fn solution_diff_is_swap_symmetric() {
        let case = standard_case(CaseSpec::Qlw).unwrap();
        let a = solution_diff(
            &case,
            &SchemeSpec::Rk3,
            100.0,
            &SchemeSpec::Ssprk3,
            125.0,
            1.0e4,
        )
        .unwrap();
        let b = solution_diff(
            &case,
            &SchemeSpec::Ssprk3,
            125.0,
            &SchemeSpec::Rk3,
            100.0,
            1.0e4,
        )
        .unwrap();
        assert_eq!(a.max_abs_vorticity_diff, b.max_abs_vorticity_diff);
        assert_eq!(a.relative_vorticity_diff, b.relative_vorticity_diff);
    }
}
