//! Command-line interface. Exit codes: 0 success, 1 numerical failure
//! (instability, no stable Courant range), 2 usage error (bad flags,
//! malformed configuration, incommensurate steps).

use crate::harness::{
    self, convergence_study, default_cfl_duration, lte_slope, max_stable_dt, reference_self_check,
    run_fixed, CFLReport, ConvergenceReport, HarnessError,
};
use crate::io::{
    atomic_write, write_dispersion_csv, write_json, write_plot_csv, write_spectrum_svg,
};
use crate::optimize::{optimize, CostKind, CostSpec};
use crate::scheme::{FBWeights, SchemeSpec};
use crate::swe::{self, build_case_with, diagnostics, CaseSpec, PhysicsOverrides, SweError};
use crate::vn::{self, LinearWaveParams, NuMaxFlag};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "fbrk32",
    version,
    about = "Forward-backward Runge-Kutta weight analysis and shallow-water verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal stable Courant number of a weight triple.
    Numax(NumaxArgs),
    /// Search the weight box for cost-optimal weights.
    Optimize(OptimizeArgs),
    /// Eigenvalue tracks of the one-dimensional one-step map.
    Spectrum(SpectrumArgs),
    /// Integrate a named case and write the final snapshot.
    Simulate(SimulateArgs),
    /// Bisect the largest stable time step of a scheme on a case.
    Cfl(CflArgs),
    /// Step-size convergence study against a fourth-order reference.
    Converge(ConvergeArgs),
}

#[derive(Args)]
struct NumaxArgs {
    /// The three forward-backward weights.
    #[arg(long, num_args = 3, value_names = ["B1", "B2", "B3"], required = true, allow_negative_numbers = true)]
    beta: Vec<f64>,
    /// Mean-flow magnitude (Froude number), split evenly between x and y.
    #[arg(long, default_value_t = 0.0)]
    froude: f64,
    /// Bisection tolerance on the Courant number.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Write the result as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Cost function: c1 (inverse Courant limit) or c2 (adds dispersion
    /// fidelity; zero mean flow only).
    #[arg(long, default_value = "c1")]
    cost: String,
    #[arg(long, default_value_t = 0.0)]
    froude: f64,
    /// Total cost-evaluation budget (at least 100).
    #[arg(long, default_value_t = 5000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full optimization report as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, num_args = 3, value_names = ["B1", "B2", "B3"], required = true, allow_negative_numbers = true)]
    beta: Vec<f64>,
    /// Number of sampled points across [0, pi].
    #[arg(long, default_value_t = 256)]
    samples: usize,
    /// Wide CSV (ktilde_nu, re/im/abs per branch); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Complex-plane SVG of the two tracks.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Long-format plot table (x, series, value).
    #[arg(long)]
    plot_csv: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// rest, qlw, or jet (may come from --config instead).
    #[arg(long)]
    case: Option<String>,
    /// ssprk3, rk3, rk4, or fbrk32:<b1>,<b2>,<b3>.
    #[arg(long)]
    scheme: Option<String>,
    /// Time step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, conflicts_with = "t_final")]
    steps: Option<u64>,
    /// Integrate to this time (steps = ceil(t_final / dt)).
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Final-state snapshot destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Snapshot format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "bin"])]
    format: String,
    /// JSON run configuration; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CflArgs {
    #[arg(long)]
    case: String,
    #[arg(long)]
    scheme: String,
    /// Comparison scheme ("none" to skip).
    #[arg(long, default_value = "ssprk3")]
    ref_scheme: String,
    /// Integration length per probe; defaults to the per-case standard.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, default_value_t = 50.0)]
    dt_lo: f64,
    #[arg(long, default_value_t = 2000.0)]
    dt_hi: f64,
    #[arg(long, default_value_t = 0.01)]
    rel_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Long-format plot table of the measured limits.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value = "qlw")]
    case: String,
    #[arg(long)]
    scheme: String,
    /// Step counts dividing t-final; dt_i = t_final / n_i.
    #[arg(long, default_value = "478,676,956,1352,1912", value_delimiter = ',')]
    steps_list: Vec<u64>,
    #[arg(long, default_value_t = 1.6e4)]
    t_final: f64,
    /// Step count of the fourth-order reference run.
    #[arg(long, default_value_t = 15296)]
    ref_steps: u64,
    /// Also measure the reference against itself at half the step.
    #[arg(long)]
    self_check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Long-format plot table of the error lines.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o failure: {e}"))
    }
}

impl From<vn::VnError> for CliError {
    fn from(e: vn::VnError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SweError> for CliError {
    fn from(e: SweError) -> Self {
        match e {
            SweError::BadGrid(_) | SweError::ShapeMismatch | SweError::UnknownCase(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::NotCommensurate { .. }
            | HarnessError::BadArgument(_)
            | HarnessError::ReferenceTooCoarse => CliError::Usage(e.to_string()),
            HarnessError::Swe(inner) => inner.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Entry point used by `main` and by tests; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Numax(a) => cmd_numax(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Cfl(a) => cmd_cfl(a),
        Command::Converge(a) => cmd_converge(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn weights_from(beta: &[f64]) -> Result<FBWeights, CliError> {
    let w = FBWeights::new(beta[0], beta[1], beta[2]);
    if !w.is_finite() {
        return Err(CliError::Usage("weights must be finite".into()));
    }
    Ok(w)
}

fn parse_scheme(s: &str) -> Result<SchemeSpec, CliError> {
    s.parse()
        .map_err(|e: crate::scheme::ParseSchemeError| CliError::Usage(e.to_string()))
}

fn parse_case(s: &str) -> Result<CaseSpec, CliError> {
    s.parse()
        .map_err(|e: swe::ParseCaseError| CliError::Usage(e.to_string()))
}

fn flag_name(flag: NuMaxFlag) -> &'static str {
    match flag {
        NuMaxFlag::Bracketed => "bracketed",
        NuMaxFlag::StableToScanLimit => "stable_to_scan_limit",
        NuMaxFlag::UnstableEverywhere => "unstable_everywhere",
    }
}

#[derive(Serialize)]
struct NumaxOutput {
    weights: [f64; 3],
    froude: f64,
    tol: f64,
    nu_max: f64,
    flag: &'static str,
}

fn cmd_numax(a: NumaxArgs) -> Result<(), CliError> {
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let weights = weights_from(&a.beta)?;
    let template = LinearWaveParams::grid_scale(a.froude);
    template.validate()?;
    let result = vn::nu_max(&weights, &template, a.tol)?;
    let output = NumaxOutput {
        weights: weights.as_array(),
        froude: a.froude,
        tol: a.tol,
        nu_max: result.value,
        flag: flag_name(result.flag),
    };
    if let Some(path) = &a.out {
        write_json(path, &output)?;
    }
    match result.flag {
        NuMaxFlag::UnstableEverywhere => {
            return Err(CliError::Numerical(
                "no stable Courant number found for these weights".into(),
            ));
        }
        NuMaxFlag::StableToScanLimit => {
            eprintln!(
                "warning: stable over the whole scanned range; {:.4} is only a lower bound",
                result.value
            );
        }
        NuMaxFlag::Bracketed => {}
    }
    println!("{:.4}", result.value);
    Ok(())
}

fn parse_cost(s: &str) -> Result<CostKind, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "c1" => Ok(CostKind::C1),
        "c2" => Ok(CostKind::C2),
        other => Err(CliError::Usage(format!(
            "unknown cost '{other}' (expected c1 or c2)"
        ))),
    }
}

fn cmd_optimize(a: OptimizeArgs) -> Result<(), CliError> {
    if a.budget < 100 {
        return Err(CliError::Usage("--budget must be at least 100".into()));
    }
    let spec = CostSpec::new(parse_cost(&a.cost)?, a.froude)?;
    let report = optimize(&spec, a.budget, a.seed);
    if let Some(path) = &a.out {
        write_json(path, &report)?;
    }
    if report.unstable_everywhere {
        return Err(CliError::Numerical(
            "no stable weights found anywhere in the search box".into(),
        ));
    }
    println!(
        "weights = {:.4},{:.4},{:.4}",
        report.weights[0], report.weights[1], report.weights[2]
    );
    println!("nu_max = {:.4}", report.nu_max);
    println!("cost = {:.6}", report.cost);
    println!("evaluations = {}", report.evaluations);
    println!("starts = {}", report.starts);
    Ok(())
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<(), CliError> {
    if a.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let weights = weights_from(&a.beta)?;
    let samples = vn::dispersion_curve(&weights, a.samples);
    match &a.out {
        Some(path) => atomic_write(path, |w| write_dispersion_csv(w, &samples))?,
        None => {
            if a.svg.is_none() && a.plot_csv.is_none() {
                let mut stdout = std::io::stdout().lock();
                write_dispersion_csv(&mut stdout, &samples)?;
            }
        }
    }
    if let Some(path) = &a.svg {
        atomic_write(path, |w| write_spectrum_svg(w, &samples))?;
    }
    if let Some(path) = &a.plot_csv {
        atomic_write(path, |w| {
            let rows = samples.iter().flat_map(|s| {
                [
                    (s.ktilde_nu, "abs1", s.lambda1.norm()),
                    (s.ktilde_nu, "abs2", s.lambda2.norm()),
                    (s.ktilde_nu, "arg1", s.lambda1.arg()),
                    (s.ktilde_nu, "arg2", s.lambda2.arg()),
                ]
            });
            write_plot_csv(w, rows)
        })?;
    }
    Ok(())
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    case: Option<String>,
    scheme: Option<String>,
    dt: Option<f64>,
    steps: Option<u64>,
    t_final: Option<f64>,
    grid: Option<GridSection>,
    physics: Option<PhysicsSection>,
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct GridSection {
    nx: Option<usize>,
    ny: Option<usize>,
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct PhysicsSection {
    g: Option<f64>,
    f: Option<f64>,
    h_rest: Option<f64>,
    momentum_advection: Option<bool>,
    zb_constant: Option<f64>,
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed config {}: {e}", path.display())))
}

#[derive(Serialize)]
struct SimulateSummary {
    case: String,
    scheme: String,
    nx: usize,
    ny: usize,
    dt: f64,
    steps: u64,
    t_final: f64,
    stable: bool,
    total_mass: f64,
    total_energy: f64,
    max_abs_vorticity: f64,
    max_abs_u: f64,
    max_h_anomaly: f64,
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let config = match &a.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    let require = |name: &str, flag: Option<String>, file: Option<String>| {
        flag.or(file)
            .ok_or_else(|| CliError::Usage(format!("--{name} is required (flag or config)")))
    };
    let case = parse_case(&require("case", a.case, config.case)?)?;
    let scheme = parse_scheme(&require("scheme", a.scheme, config.scheme)?)?;
    let dt =
        a.dt.or(config.dt)
            .ok_or_else(|| CliError::Usage("--dt is required (flag or config)".into()))?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::Usage("--dt must be positive".into()));
    }
    let steps = match (a.steps.or(config.steps), a.t_final.or(config.t_final)) {
        (Some(n), _) => n,
        (None, Some(t)) if t > 0.0 => (t / dt).ceil().max(1.0) as u64,
        _ => return Err(CliError::Usage("need --steps or --t-final".into())),
    };

    let grid_section = config.grid.unwrap_or_default();
    let nx = a.nx.or(grid_section.nx).unwrap_or(64);
    let ny = a.ny.or(grid_section.ny).unwrap_or(64);
    let phys = config.physics.unwrap_or_default();
    let overrides = PhysicsOverrides {
        g: phys.g,
        f: phys.f,
        h_rest: phys.h_rest,
        momentum_advection: phys.momentum_advection,
        zb_constant: phys.zb_constant,
    };
    let setup = build_case_with(case, nx, ny, &overrides)?;

    let outcome = run_fixed(&setup, &scheme, dt, steps)?;
    let diag = diagnostics(&outcome.state, &setup.config, &setup.grid);
    let summary = SimulateSummary {
        case: case.to_string(),
        scheme: scheme.to_string(),
        nx,
        ny,
        dt,
        steps: outcome.steps_taken,
        t_final: outcome.steps_taken as f64 * dt,
        stable: outcome.stable,
        total_mass: diag.total_mass,
        total_energy: diag.total_energy,
        max_abs_vorticity: diag.max_abs_vorticity,
        max_abs_u: diag.max_abs_u,
        max_h_anomaly: diag.max_h_anomaly,
    };
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    if !outcome.stable {
        return Err(CliError::Numerical(format!(
            "run blew up after {} steps (dt = {dt})",
            outcome.steps_taken
        )));
    }
    if let Some(path) = &a.out {
        atomic_write(path, |w| {
            let res = match a.format.as_str() {
                "bin" => swe::write_binary(w, &outcome.state, &setup.grid),
                _ => swe::write_csv(w, &outcome.state, &setup.grid),
            };
            res.map_err(|e| std::io::Error::other(e.to_string()))
        })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CflOutput {
    case: String,
    duration: f64,
    scheme: CFLReport,
    reference: Option<CFLReport>,
    ratio: Option<f64>,
}

fn cmd_cfl(a: CflArgs) -> Result<(), CliError> {
    let case = parse_case(&a.case)?;
    let scheme = parse_scheme(&a.scheme)?;
    let reference = match a.ref_scheme.as_str() {
        "none" => None,
        s => Some(parse_scheme(s)?),
    };
    let duration = a.duration.unwrap_or_else(|| default_cfl_duration(case));
    let setup = harness::standard_case(case)?;

    let mut jobs = vec![scheme];
    if let Some(r) = &reference {
        jobs.push(*r);
    }
    let mut reports = harness::parallel_map(jobs, |s| {
        max_stable_dt(&setup, &s, duration, a.dt_lo, a.dt_hi, a.rel_tol)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;

    let scheme_report = reports.remove(0);
    let ref_report = if reports.is_empty() {
        None
    } else {
        Some(reports.remove(0))
    };
    let ratio = ref_report.as_ref().map(|r| scheme_report.dt_max / r.dt_max);

    println!("dt_max = {:.4}", scheme_report.dt_max);
    if scheme_report.open_upper_bound {
        eprintln!("warning: upper trial step was still stable; dt_max is a lower bound");
    }
    if let (Some(r), Some(ratio)) = (&ref_report, ratio) {
        println!("dt_max_ref = {:.4}", r.dt_max);
        println!("ratio = {:.4}", ratio);
    }

    let output = CflOutput {
        case: case.to_string(),
        duration,
        scheme: scheme_report,
        reference: ref_report,
        ratio,
    };
    if let Some(path) = &a.out {
        write_json(path, &output)?;
    }
    if let Some(path) = &a.csv {
        let mut rows = vec![(1.0, output.scheme.scheme.as_str(), output.scheme.dt_max)];
        if let Some(r) = &output.reference {
            rows.push((2.0, r.scheme.as_str(), r.dt_max));
        }
        atomic_write(path, |w| write_plot_csv(w, rows.iter().cloned()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ConvergeOutput {
    #[serde(flatten)]
    report: ConvergenceReport,
    reference_self_check: Option<f64>,
    one_step_slope: f64,
}

fn cmd_converge(a: ConvergeArgs) -> Result<(), CliError> {
    let case = parse_case(&a.case)?;
    let scheme = parse_scheme(&a.scheme)?;
    if !(a.t_final > 0.0 && a.t_final.is_finite()) {
        return Err(CliError::Usage("--t-final must be positive".into()));
    }
    if a.steps_list.contains(&0) || a.ref_steps == 0 {
        return Err(CliError::Usage("step counts must be positive".into()));
    }
    let dt_list: Vec<f64> = a.steps_list.iter().map(|&n| a.t_final / n as f64).collect();
    let reference_dt = a.t_final / a.ref_steps as f64;
    let setup = harness::standard_case(case)?;
    let report = convergence_study(&setup, &scheme, &dt_list, reference_dt, a.t_final)?;
    let self_check = if a.self_check {
        Some(reference_self_check(&setup, reference_dt, a.t_final)?)
    } else {
        None
    };
    let thetas: Vec<f64> = (0..8).map(|k| 1e-3 * 2f64.powi(k)).collect();
    let one_step = lte_slope(&scheme, &thetas)?;

    println!("slope_h = {:.4}", report.slope_h);
    println!("slope_u = {:.4}", report.slope_u);
    println!("one_step_slope = {:.4}", one_step);
    if let Some(sc) = self_check {
        println!("reference_self_check = {sc:e}");
    }

    let output = ConvergeOutput {
        report,
        reference_self_check: self_check,
        one_step_slope: one_step,
    };
    if let Some(path) = &a.out {
        write_json(path, &output)?;
    }
    if let Some(path) = &a.csv {
        let report = &output.report;
        let rows = report
            .dt_list
            .iter()
            .zip(&report.errors_h)
            .map(|(&dt, &e)| (dt, "h", e))
            .chain(
                report
                    .dt_list
                    .iter()
                    .zip(&report.errors_u)
                    .map(|(&dt, &e)| (dt, "u", e)),
            )
            .collect::<Vec<_>>();
        atomic_write(path, |w| write_plot_csv(w, rows.iter().cloned()))?;
    }
    Ok(())
}
