use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::steps::{rceg_step, reg_step, rgda_step, rogda_step, rpeg_step};
use super::{Method, SolverConfig, StepSize};
use crate::error::{Error, Result};
use crate::geometry::{holonomy_defect, GeometryBounds, RESIDUAL_TOL};
use crate::manifold::sample::unit_tangent;
use crate::manifold::{GeodesicAverage, Point, Tangent};
use crate::problems::{duality_gap, hamiltonian, VectorFieldProblem};

/// Absolute slack allowed on every monotone quantity.
pub const INVARIANT_TOL: f64 = 1e-10;

pub const CSV_HEADER: [&str; 9] = [
    "t",
    "dist",
    "op_norm",
    "op_norm_half",
    "hamiltonian",
    "gap_last",
    "gap_avg",
    "phi",
    "violation_flags",
];

const FLAG_NORM: u32 = 1;
const FLAG_LYAPUNOV: u32 = 2;
const FLAG_BOUNDED: u32 = 4;
const FLAG_HOLONOMY: u32 = 8;
const FLAG_HALF_RATIO: u32 = 16;
const FLAG_SANDWICH: u32 = 32;
const FLAG_PROXIMITY: u32 = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateRecord {
    pub t: u64,
    pub dist_to_solution: Option<f64>,
    pub op_norm: f64,
    pub op_norm_half: f64,
    pub hamiltonian: Option<f64>,
    pub gap_last: Option<f64>,
    pub gap_avg: Option<f64>,
    pub lyapunov_phi: Option<f64>,
    /// Bitmask of invariants violated since the previous record.
    pub violation_flags: u32,
}

/// Violation counts per instrumented invariant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Violations {
    pub norm_monotone: u64,
    pub lyapunov: u64,
    pub boundedness: u64,
    pub holonomy: u64,
    pub half_ratio: u64,
    pub sandwich: u64,
    pub proximity: u64,
}

impl Violations {
    pub fn total(&self) -> u64 {
        self.norm_monotone
            + self.lyapunov
            + self.boundedness
            + self.holonomy
            + self.half_ratio
            + self.sandwich
            + self.proximity
    }

    pub fn merge(&mut self, o: &Violations) {
        self.norm_monotone += o.norm_monotone;
        self.lyapunov += o.lyapunov;
        self.boundedness += o.boundedness;
        self.holonomy += o.holonomy;
        self.half_ratio += o.half_ratio;
        self.sandwich += o.sandwich;
        self.proximity += o.proximity;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverState {
    pub z: Point,
    /// Last half-iterate, kept by the methods that reuse it.
    pub z_half_prev: Option<Point>,
    pub t: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunTrace {
    pub problem: String,
    pub config: SolverConfig,
    /// Step size actually used.
    pub eta: f64,
    pub records: Vec<IterateRecord>,
    pub average: GeodesicAverage,
    #[serde(rename = "final")]
    pub final_state: SolverState,
    /// `||F(z_T)||` at the final state.
    pub final_op_norm: f64,
    pub best_op_norm: f64,
    pub violations: Violations,
    pub lyapunov_lambda: Option<f64>,
    pub rho_term: Option<f64>,
    pub gap_approximate: u64,
    pub gap_outside: u64,
    /// Set when a step failed; the trace holds everything before it.
    pub abort: Option<String>,
}

/// Final metrics and counters, without the per-iteration records.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub method: Method,
    pub eta: f64,
    pub iterations: u64,
    pub steps_completed: u64,
    pub seed: u64,
    pub final_dist: Option<f64>,
    pub final_op_norm: f64,
    pub best_op_norm: f64,
    pub final_gap_last: Option<f64>,
    pub final_gap_avg: Option<f64>,
    pub violations: Violations,
    pub lyapunov_lambda: Option<f64>,
    pub rho_term: Option<f64>,
    pub gap_approximate: u64,
    pub gap_outside: u64,
    pub abort: Option<String>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunTrace {
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.t.to_string(),
                opt(r.dist_to_solution),
                r.op_norm.to_string(),
                r.op_norm_half.to_string(),
                opt(r.hamiltonian),
                opt(r.gap_last),
                opt(r.gap_avg),
                opt(r.lyapunov_phi),
                r.violation_flags.to_string(),
            ])?;
        }
        w.flush()
    }

    pub fn summary(&self, final_dist: Option<f64>) -> RunSummary {
        let last = self.records.last();
        RunSummary {
            problem: self.problem.clone(),
            method: self.config.method,
            eta: self.eta,
            iterations: self.config.iterations,
            steps_completed: self.final_state.t,
            seed: self.config.seed,
            final_dist,
            final_op_norm: self.final_op_norm,
            best_op_norm: self.best_op_norm,
            final_gap_last: last.and_then(|r| r.gap_last),
            final_gap_avg: last.and_then(|r| r.gap_avg),
            violations: self.violations,
            lyapunov_lambda: self.lyapunov_lambda,
            rho_term: self.rho_term,
            gap_approximate: self.gap_approximate,
            gap_outside: self.gap_outside,
            abort: self.abort.clone(),
        }
    }
}

fn auto_eta(method: Method, b: &GeometryBounds, saddle: bool) -> Result<f64> {
    Ok(match method {
        Method::Reg | Method::Rgda => b.step_size_reg(),
        Method::Rpeg | Method::Rogda if saddle => b.step_size_rpeg().min(b.step_size_rpeg_saddle()),
        Method::Rpeg | Method::Rogda => b.step_size_rpeg(),
        Method::Rceg => b.step_size_rceg()?,
    })
}

struct GapContext<'a> {
    f: &'a crate::problems::SaddleObjective,
    x: Point,
    y: Point,
    radius: f64,
    lipschitz: f64,
}

/// Runs `config.iterations` steps from `z0`.
///
/// Errors before the first step (bad config, `z0` off the manifold or, with
/// boundedness checks on, farther than `D` from the solution) are returned as
/// `Err`; a failing step ends the run and is reported in `RunTrace::abort`.
pub fn run(prob: &VectorFieldProblem, config: &SolverConfig, z0: &Point) -> Result<RunTrace> {
    config.validate()?;
    let m = &prob.manifold;
    let z0 = m.validate_point(z0)?;
    let ins = config.instrument;
    let method = config.method;
    let solution = prob.solution.as_ref();
    let d_bound = prob.region_radius;
    let (l, _) = prob.constants();
    let bounds = prob.bounds().ok();
    let saddle_mode = ins.gaps && prob.objective.is_some();
    let eta = match config.eta {
        StepSize::Fixed(v) => v,
        StepSize::Auto => {
            let b = bounds.as_ref().ok_or_else(|| {
                Error::Domain(format!("no automatic step size for '{}': {:?}", prob.name, prob.bounds().err()))
            })?;
            auto_eta(method, b, saddle_mode)?
        }
    };
    if ins.boundedness {
        if let Some(s) = solution {
            let d0 = m.distance(&z0, s)?;
            if d0 > d_bound * (1.0 + 1e-9) {
                return Err(Error::Domain(format!(
                    "initial point at distance {d0} exceeds D = {d_bound}"
                )));
            }
        }
    }
    let gap_ctx = match (&prob.objective, solution) {
        (Some(f), Some(s)) if ins.gaps => {
            let (x, y) = f.split(s)?;
            Some(GapContext {
                f,
                x,
                y,
                radius: std::f64::consts::SQRT_2 * d_bound / 2.0,
                lipschitz: l,
            })
        }
        _ => None,
    };
    let lambda = bounds.as_ref().map(GeometryBounds::lyapunov_lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut violations = Violations::default();
    let mut records = Vec::new();
    let mut average = GeodesicAverage::new();
    let mut gap_approximate = 0;
    let mut gap_outside = 0;
    let mut abort = None;

    let mut z = z0;
    let mut fz = prob.field(&z)?;
    let mut best = m.norm(&fz);
    // F(z~_{t-1}), with z~_{-1} = z_0
    let mut prev_half: Option<Tangent> = matches!(method, Method::Rpeg | Method::Rogda).then(|| fz.clone());
    let mut phi_prev: Option<f64> = None;
    let mut prev_half_norm: Option<f64> = None;
    let mut pending = 0u32;
    let mut t = 0;

    while t < config.iterations {
        let norm_z = m.norm(&fz);
        let outcome = (|| -> Result<(Point, Tangent, Point, Tangent)> {
            let (z_half, field_half, z_next) = match method {
                Method::Reg => {
                    let s = reg_step(prob, &z, &fz, eta)?;
                    (s.z_half, s.field_half, s.z_next)
                }
                Method::Rpeg => {
                    let s = rpeg_step(prob, &z, prev_half.as_ref().expect("cached"), eta)?;
                    (s.z_half, s.field_half, s.z_next)
                }
                Method::Rceg => {
                    let s = rceg_step(prob, &z, &fz, eta)?;
                    (s.z_half, s.field_half, s.z_next)
                }
                Method::Rogda => {
                    let next = rogda_step(prob, &z, &fz, prev_half.as_ref().expect("cached"), eta)?;
                    (z.clone(), fz.clone(), next)
                }
                Method::Rgda => (z.clone(), fz.clone(), rgda_step(prob, &z, &fz, eta)?),
            };
            let f_next = prob.field(&z_next)?;
            Ok((z_half, field_half, z_next, f_next))
        })();
        let (z_half, field_half, z_next, f_next) = match outcome {
            Ok(v) => v,
            Err(e) => {
                abort = Some(format!("step {t}: {e}"));
                break;
            }
        };
        let norm_half = m.norm(&field_half);
        let norm_next = m.norm(&f_next);
        let mut flags = 0;

        if ins.norm_monotone && method == Method::Reg && norm_next > norm_z + INVARIANT_TOL {
            violations.norm_monotone += 1;
            flags |= FLAG_NORM;
        }
        let mut phi = None;
        if let (true, Method::Rpeg, Some(s), Some(lam)) = (ins.lyapunov, method, solution, lambda) {
            let carried = m.transport(prev_half.as_ref().expect("cached"), &z)?;
            let lag = m.norm(&fz.sub(&carried)?);
            let d = m.distance(&z, s)?;
            let value = d * d + lam * t as f64 * eta * eta * (norm_z * norm_z + 2.0 * lag * lag);
            if phi_prev.is_some_and(|p| value > p + INVARIANT_TOL) {
                violations.lyapunov += 1;
                flags |= FLAG_LYAPUNOV;
            }
            phi_prev = Some(value);
            phi = Some(value);
        }
        let dist = solution.map(|s| m.distance(&z, s)).transpose()?;
        if let (true, Some(s), Some(d)) = (ins.boundedness, solution, dist) {
            let dh = m.distance(&z_half, s)?;
            if d > d_bound + INVARIANT_TOL || dh > 1.2 * d_bound + INVARIANT_TOL {
                violations.boundedness += 1;
                flags |= FLAG_BOUNDED;
            }
        }
        if method == Method::Reg {
            if ins.sandwich
                && (norm_half < (1.0 - l * eta) * norm_z - INVARIANT_TOL
                    || norm_half > (1.0 + l * eta) * norm_z + INVARIANT_TOL)
            {
                violations.sandwich += 1;
                flags |= FLAG_SANDWICH;
            }
            if ins.proximity && m.distance(&z_half, &z_next)? > 2.0 * l * eta * eta * norm_z + INVARIANT_TOL {
                violations.proximity += 1;
                flags |= FLAG_PROXIMITY;
            }
        }
        if ins.half_ratio && method == Method::Rpeg && l * eta <= 0.125 {
            if let Some(p) = prev_half_norm.filter(|&p| p > 1e-12) {
                let ratio = norm_half / p;
                if !(0.5 - INVARIANT_TOL..=1.5 + INVARIANT_TOL).contains(&ratio) {
                    violations.half_ratio += 1;
                    flags |= FLAG_HALF_RATIO;
                }
            }
        }
        if ins.holonomy_probe {
            let u = unit_tangent(m, &z, &mut rng);
            if let Ok(probe) = holonomy_defect(m, &z, &z_half, &z_next, &u) {
                if probe.valid && probe.defect > probe.bound + RESIDUAL_TOL {
                    violations.holonomy += 1;
                    flags |= FLAG_HOLONOMY;
                }
            }
        }
        if let Err(e) = average.push(m, &z_half) {
            abort = Some(format!("step {t}: {e}"));
            break;
        }

        pending |= flags;
        if t % config.record_every == 0 {
            let mut rec = IterateRecord {
                t,
                dist_to_solution: dist,
                op_norm: norm_z,
                op_norm_half: norm_half,
                hamiltonian: prob.objective.as_ref().map(|f| hamiltonian(f, &z)).transpose()?,
                gap_last: None,
                gap_avg: None,
                lyapunov_phi: phi,
                violation_flags: pending,
            };
            if let Some(g) = &gap_ctx {
                let mean = average.mean().expect("nonempty average");
                for (target, slot) in [(&z, &mut rec.gap_last), (mean, &mut rec.gap_avg)] {
                    let est = duality_gap(g.f, target, (&g.x, &g.y), g.radius, g.lipschitz)?;
                    gap_approximate += u64::from(est.approximate);
                    gap_outside += u64::from(est.outside);
                    *slot = Some(est.value);
                }
            }
            records.push(rec);
            pending = 0;
        }

        if matches!(method, Method::Rpeg | Method::Rogda) {
            prev_half = Some(field_half);
        }
        prev_half_norm = Some(norm_half);
        z = z_next;
        fz = f_next;
        best = best.min(norm_next);
        t += 1;
    }

    Ok(RunTrace {
        problem: prob.name.clone(),
        config: *config,
        eta,
        records,
        average,
        final_op_norm: m.norm(&fz),
        best_op_norm: best,
        final_state: SolverState {
            z,
            z_half_prev: prev_half.map(|f| f.base().clone()),
            t,
        },
        violations,
        lyapunov_lambda: lambda,
        rho_term: bounds.map(|b| b.rho(eta)),
        gap_approximate,
        gap_outside,
        abort,
    })
}
