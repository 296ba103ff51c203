//! Derivative-free minimization of the Courant-number cost functions over
//! the forward-backward weight box: grid seeding, bounded Nelder-Mead from
//! the best seeds, and a final coordinate polish.

use crate::scheme::FBWeights;
use crate::vn::{self, LinearWaveParams, NuMaxFlag, VnError};
use serde::{Deserialize, Serialize};

/// Which cost function drives the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostKind {
    /// Inverse maximal Courant number.
    C1,
    /// C1 plus the dispersion-fidelity integral (zero mean flow only).
    C2,
}

/// A cost-function specification: kind, mean-flow magnitude, and the
/// wave-parameter template it is evaluated on.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CostSpec {
    pub kind: CostKind,
    /// Mean-flow magnitude |U|; split evenly between x and y components.
    pub froude: f64,
    pub template: LinearWaveParams,
}

impl CostSpec {
    pub fn new(kind: CostKind, froude: f64) -> Result<Self, VnError> {
        if !froude.is_finite() || froude < 0.0 {
            return Err(VnError::OutOfRange("froude must be finite and >= 0"));
        }
        if kind == CostKind::C2 && froude != 0.0 {
            return Err(VnError::MeanFlowNotZero);
        }
        Ok(Self {
            kind,
            froude,
            template: LinearWaveParams::grid_scale(froude),
        })
    }

    fn evaluate(&self, w: &FBWeights, tol: f64) -> f64 {
        let res = match self.kind {
            CostKind::C1 => vn::cost_c1_with_tol(w, &self.template, tol),
            CostKind::C2 => vn::cost_c2_with_tol(w, &self.template, tol),
        };
        res.unwrap_or(vn::UNSTABLE_COST)
    }
}

/// One accepted improvement during the search.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TraceEntry {
    pub weights: [f64; 3],
    pub cost: f64,
}

/// Result of an optimization run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub weights: [f64; 3],
    /// Maximal Courant number of the returned weights, refined to 1e-3.
    pub nu_max: f64,
    /// Cost of the returned weights at the search tolerance.
    pub cost: f64,
    /// Total cost-function evaluations spent.
    pub evaluations: u64,
    /// Number of local searches launched.
    pub starts: u32,
    /// Strictly improving sequence of accepted best points.
    pub trace: Vec<TraceEntry>,
    /// Set when no tested weights had any stable Courant range.
    pub unstable_everywhere: bool,
}

/// Bisection tolerance used for cost evaluations during the search; the
/// final report re-evaluates nu_max at 1e-3.
pub const SEARCH_TOL: f64 = 5e-3;
const FINAL_TOL: f64 = 1e-3;
const SIMPLEX_CONVERGENCE_DIAMETER: f64 = 1e-4;
const SEED_GRID: usize = 5;
const KEPT_SEEDS: usize = 8;

fn clamp_box(x: [f64; 3], lo: &[f64; 3], hi: &[f64; 3]) -> [f64; 3] {
    let mut out = x;
    for k in 0..3 {
        out[k] = out[k].clamp(lo[k], hi[k]);
    }
    out
}

struct Search<'a> {
    spec: &'a CostSpec,
    lo: [f64; 3],
    hi: [f64; 3],
    evaluations: u64,
    budget: u64,
    best: ([f64; 3], f64),
    trace: Vec<TraceEntry>,
}

impl<'a> Search<'a> {
    fn eval(&mut self, x: [f64; 3]) -> f64 {
        self.evaluations += 1;
        let w = FBWeights::new(x[0], x[1], x[2]);
        let c = self.spec.evaluate(&w, SEARCH_TOL);
        if c < self.best.1 {
            self.best = (x, c);
            self.trace.push(TraceEntry {
                weights: x,
                cost: c,
            });
        }
        c
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    /// Bounded Nelder-Mead from `start`, spending at most `allowance`
    /// further evaluations.
    fn nelder_mead(&mut self, start: [f64; 3], step: f64, allowance: u64) {
        let stop_at = (self.evaluations + allowance).min(self.budget);
        let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
        let c0 = self.eval(start);
        simplex.push((start, c0));
        for k in 0..3 {
            let mut p = start;
            // Step into the box when the vertex would leave it.
            p[k] = if p[k] + step <= self.hi[k] {
                p[k] + step
            } else {
                p[k] - step
            };
            let p = clamp_box(p, &self.lo, &self.hi);
            let c = self.eval(p);
            simplex.push((p, c));
        }
        let centroid = |s: &[([f64; 3], f64)]| -> [f64; 3] {
            let mut c = [0.0; 3];
            for (p, _) in &s[..3] {
                for k in 0..3 {
                    c[k] += p[k] / 3.0;
                }
            }
            c
        };
        while self.evaluations < stop_at {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.partial_cmp(&b.0).unwrap()));
            let diam = simplex
                .iter()
                .flat_map(|(p, _)| {
                    simplex.iter().map(move |(q, _)| {
                        p.iter()
                            .zip(q)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt()
                    })
                })
                .fold(0.0, f64::max);
            if diam < SIMPLEX_CONVERGENCE_DIAMETER {
                break;
            }
            let cen = centroid(&simplex);
            let worst = simplex[3];
            let reflect = clamp_box(
                [
                    cen[0] + (cen[0] - worst.0[0]),
                    cen[1] + (cen[1] - worst.0[1]),
                    cen[2] + (cen[2] - worst.0[2]),
                ],
                &self.lo,
                &self.hi,
            );
            let cr = self.eval(reflect);
            if cr < simplex[0].1 {
                let expand = clamp_box(
                    [
                        cen[0] + 2.0 * (cen[0] - worst.0[0]),
                        cen[1] + 2.0 * (cen[1] - worst.0[1]),
                        cen[2] + 2.0 * (cen[2] - worst.0[2]),
                    ],
                    &self.lo,
                    &self.hi,
                );
                if self.exhausted() {
                    simplex[3] = (reflect, cr);
                    continue;
                }
                let ce = self.eval(expand);
                simplex[3] = if ce < cr { (expand, ce) } else { (reflect, cr) };
            } else if cr < simplex[2].1 {
                simplex[3] = (reflect, cr);
            } else {
                let contract = clamp_box(
                    [
                        cen[0] + 0.5 * (worst.0[0] - cen[0]),
                        cen[1] + 0.5 * (worst.0[1] - cen[1]),
                        cen[2] + 0.5 * (worst.0[2] - cen[2]),
                    ],
                    &self.lo,
                    &self.hi,
                );
                if self.exhausted() {
                    break;
                }
                let cc = self.eval(contract);
                if cc < worst.1 {
                    simplex[3] = (contract, cc);
                } else {
                    // Shrink toward the best vertex.
                    let best = simplex[0].0;
                    for v in simplex.iter_mut().skip(1) {
                        let p = clamp_box(
                            [
                                best[0] + 0.5 * (v.0[0] - best[0]),
                                best[1] + 0.5 * (v.0[1] - best[1]),
                                best[2] + 0.5 * (v.0[2] - best[2]),
                            ],
                            &self.lo,
                            &self.hi,
                        );
                        if self.exhausted() {
                            break;
                        }
                        *v = (p, self.eval(p));
                    }
                }
            }
        }
    }

    /// Coordinate descent over +-delta moves from the current best until no
    /// move improves; guarantees coarse local optimality of the result.
    fn coordinate_polish(&mut self, delta: f64) {
        loop {
            if self.exhausted() {
                return;
            }
            let base = self.best;
            let mut improved = false;
            for k in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut p = base.0;
                    p[k] += sign * delta;
                    let p = clamp_box(p, &self.lo, &self.hi);
                    if p == base.0 || self.exhausted() {
                        continue;
                    }
                    if self.eval(p) < base.1 {
                        improved = true;
                    }
                }
            }
            if !improved {
                return;
            }
        }
    }
}

/// Minimize the cost over the full weight box [0, 1]^3.
pub fn optimize(spec: &CostSpec, budget: u64, seed: u64) -> OptimizationReport {
    optimize_in_box(spec, budget, seed, [0.0; 3], [1.0; 3])
}

/// Minimize the cost over an axis-aligned weight box.
///
/// Deterministic given (spec, budget, seed): the seed perturbs the initial
/// Nelder-Mead step sizes slightly but reproducibly.
pub fn optimize_in_box(
    spec: &CostSpec,
    budget: u64,
    seed: u64,
    lo: [f64; 3],
    hi: [f64; 3],
) -> OptimizationReport {
    assert!(budget >= 100, "optimization budget must be at least 100");
    assert!(
        lo.iter().zip(&hi).all(|(a, b)| a <= b),
        "box bounds must satisfy lo <= hi"
    );
    let mut search = Search {
        spec,
        lo,
        hi,
        evaluations: 0,
        budget,
        best: ([f64::NAN; 3], f64::INFINITY),
        trace: Vec::new(),
    };

    // Uniform seeding grid; ties between equal-cost seeds break
    // lexicographically because the scan order is lexicographic.
    let mut seeds: Vec<([f64; 3], f64)> = Vec::new();
    for i in 0..SEED_GRID {
        for j in 0..SEED_GRID {
            for k in 0..SEED_GRID {
                let frac = |n: usize| n as f64 / (SEED_GRID - 1) as f64;
                let p = [
                    lo[0] + frac(i) * (hi[0] - lo[0]),
                    lo[1] + frac(j) * (hi[1] - lo[1]),
                    lo[2] + frac(k) * (hi[2] - lo[2]),
                ];
                let c = search.eval(p);
                seeds.push((p, c));
            }
        }
    }
    seeds.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.partial_cmp(&b.0).unwrap()));
    seeds.truncate(KEPT_SEEDS);
    seeds.dedup_by(|a, b| a.0 == b.0);

    // A tiny reproducible seed-dependent jitter on the initial step keeps
    // distinct seeds meaningful without sacrificing determinism.
    let jitter = 1.0
        + 0.1
            * ((seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40) as f64 / (1u64 << 24) as f64
                - 0.05);
    let base_step = 0.12
        * (hi[0] - lo[0])
            .max(hi[1] - lo[1])
            .max(hi[2] - lo[2])
            .max(1e-9);
    let remaining = budget.saturating_sub(search.evaluations);
    let per_start = (remaining / (seeds.len() as u64 + 1)).max(1);
    for (p, _) in &seeds {
        if search.exhausted() {
            break;
        }
        search.nelder_mead(*p, base_step * jitter, per_start);
    }
    // Refinement pass from the overall best point, then coarse polish.
    if !search.exhausted() && search.best.1 < vn::UNSTABLE_COST {
        let restart = search.best.0;
        search.nelder_mead(restart, 0.03 * jitter, per_start);
        search.coordinate_polish(0.01);
        search.coordinate_polish(0.0033);
    }

    let (bw, bc) = search.best;
    let weights = FBWeights::new(bw[0], bw[1], bw[2]);
    let numax =
        vn::nu_max(&weights, &spec.template, FINAL_TOL).expect("searched weights are finite");
    OptimizationReport {
        weights: bw,
        nu_max: numax.value,
        cost: bc,
        evaluations: search.evaluations,
        starts: seeds.len() as u32 + 1,
        trace: search.trace,
        unstable_everywhere: numax.flag == NuMaxFlag::UnstableEverywhere && bc >= vn::UNSTABLE_COST,
    }
}

/// One verdict row comparing achieved nu_max at published weights against
/// the published value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Table1Row {
    pub label: String,
    pub weights: [f64; 3],
    pub froude: f64,
    pub achieved_numax: f64,
    pub reference_numax: f64,
    pub pass: bool,
}

/// The five published optimized weight sets with their Courant numbers.
pub const TABLE1: [(&str, [f64; 3], f64, f64); 5] = [
    ("C1 |U|=0.00", [0.500, 0.500, 0.344], 0.00, 1.767),
    ("C2 |U|=0.00", [0.516, 0.532, 0.331], 0.00, 1.804),
    ("C1 |U|=0.05", [0.531, 0.531, 0.313], 0.05, 1.319),
    ("C1 |U|=0.15", [0.359, 0.578, 0.234], 0.15, 1.025),
    ("C1 |U|=0.25", [0.656, 0.938, 0.188], 0.25, 0.853),
];

/// Evaluate nu_max at each published weight set and compare within `tol`.
pub fn evaluate_table1(tol: f64) -> Vec<Table1Row> {
    TABLE1
        .iter()
        .map(|(label, w, froude, reference)| {
            let weights = FBWeights::new(w[0], w[1], w[2]);
            let template = LinearWaveParams::grid_scale(*froude);
            let achieved = vn::nu_max(&weights, &template, FINAL_TOL)
                .expect("published weights are finite")
                .value;
            Table1Row {
                label: label.to_string(),
                weights: *w,
                froude: *froude,
                achieved_numax: achieved,
                reference_numax: *reference,
                pass: (achieved - reference).abs() <= tol,
            }
        })
        .collect()
}
