//! Experiment configuration, the run grid, rate fits and validator sweeps.

mod fit;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::sweep::{run_sweep, write_sweep, LemmaSweep, SweepSpec};
use crate::manifold::Manifold;
use crate::par::{map_slice_workers, Execution};
use crate::problems::{make_problem, ProblemSpec, VectorFieldProblem};
use crate::solvers::{run, Instrument, Method, RunSummary, SolverConfig, StepSize, Violations};

pub use fit::{default_t_min, fit_points, fit_rate, read_trace_csv, Metric, RateFit, MIN_FIT_POINTS};

/// Process exit statuses of the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success = 0,
    ConfigError = 1,
    InvariantViolation = 2,
    SolverAbort = 3,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn status(&self) -> Status {
        Status::ConfigError
    }
}

fn config<E: std::fmt::Display>(e: E) -> HarnessError {
    HarnessError::Config(e.to_string())
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One step size or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Etas {
    One(StepSize),
    Many(Vec<StepSize>),
}

impl Default for Etas {
    fn default() -> Self {
        Etas::One(StepSize::Auto)
    }
}

impl Etas {
    pub fn to_vec(&self) -> Vec<StepSize> {
        match self {
            Etas::One(e) => vec![*e],
            Etas::Many(v) => v.clone(),
        }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn one() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Problem name plus its parameters, e.g. `{ name = "decoupled_saddle", radius = 1.0 }`.
    #[serde(default)]
    pub problem: toml::Table,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub etas: Etas,
    #[serde(default = "one")]
    pub iterations: u64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "one")]
    pub record_every: u64,
    #[serde(default)]
    pub instrument: Instrument,
    /// Upper bound on concurrently executing runs.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default)]
    pub validators: Option<SweepSpec>,
}

impl ExperimentConfig {
    /// Parses TOML text after applying `key.path=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut table: toml::Table = text.parse().map_err(config)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        table.try_into().map_err(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(io(path))?;
        Self::from_toml(&text, overrides)
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, HarnessError> {
        let mut params = self.problem.clone();
        let name = match params.remove("name") {
            Some(toml::Value::String(s)) => s,
            _ => return Err(HarnessError::Config("problem.name is required".into())),
        };
        let json = serde_json::to_value(params).map_err(config)?;
        ProblemSpec::parse(&name, json).map_err(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.methods.is_empty() {
            return Err(HarnessError::Config("methods must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seeds must not be empty".into()));
        }
        if self.etas.to_vec().is_empty() {
            return Err(HarnessError::Config("etas must not be empty".into()));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        for eta in self.etas.to_vec() {
            self.solver_config(Method::Reg, eta, 0).validate().map_err(config)?;
        }
        Ok(())
    }

    fn solver_config(&self, method: Method, eta: StepSize, seed: u64) -> SolverConfig {
        SolverConfig {
            method,
            eta,
            iterations: self.iterations,
            record_every: self.record_every,
            instrument: self.instrument,
            seed,
        }
    }
}

/// Sets `a.b.c = value` in a TOML table; `value` is read as TOML, falling
/// back to a bare string.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), HarnessError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override '{assignment}' is not key=value")))?;
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut parts: Vec<&str> = key.trim().split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| HarnessError::Config(format!("empty key in '{assignment}'")))?;
    let mut cur = table;
    for p in parts {
        cur = cur
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| HarnessError::Config(format!("'{p}' in '{key}' is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunEntry {
    pub csv: String,
    #[serde(flatten)]
    pub summary: RunSummary,
    pub fits: BTreeMap<Metric, Option<RateFit>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub problem: ProblemSpec,
    pub manifold: Manifold,
    pub iterations: u64,
    pub record_every: u64,
    pub runs: Vec<RunEntry>,
    pub violations: Violations,
    pub aborted: usize,
    pub status: Status,
}

/// Metrics fitted for every run.
pub const SUMMARY_METRICS: [Metric; 4] = [Metric::OpNorm, Metric::OpNormBest, Metric::GapLast, Metric::GapAvg];

fn eta_label(eta: StepSize) -> String {
    match eta {
        StepSize::Auto => "auto".into(),
        StepSize::Fixed(v) => format!("{v}"),
    }
}

/// Runs every `(method, eta, seed)` combination, writing one CSV per run and
/// `summary.json` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let spec = cfg.problem_spec()?;
    let prob = make_problem(&spec).map_err(config)?;
    fs::create_dir_all(&cfg.output_dir).map_err(io(&cfg.output_dir))?;

    let mut jobs = Vec::new();
    for &method in &cfg.methods {
        for eta in cfg.etas.to_vec() {
            for &seed in &cfg.seeds {
                jobs.push((method, eta, seed));
            }
        }
    }
    let results = map_slice_workers(cfg.execution, cfg.workers, &jobs, |&(method, eta, seed)| {
        run_one(cfg, &prob, method, eta, seed)
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut violations = Violations::default();
    let mut aborted = 0;
    for r in &runs {
        violations.merge(&r.summary.violations);
        aborted += usize::from(r.summary.abort.is_some());
    }
    let status = if aborted > 0 {
        Status::SolverAbort
    } else if violations.total() > 0 {
        Status::InvariantViolation
    } else {
        Status::Success
    };
    let report = ExperimentReport {
        problem: spec,
        manifold: prob.manifold.clone(),
        iterations: cfg.iterations,
        record_every: cfg.record_every,
        runs,
        violations,
        aborted,
        status,
    };
    let path = cfg.output_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&report).map_err(config)?;
    text.push('\n');
    fs::write(&path, text).map_err(io(&path))?;
    Ok(report)
}

fn run_one(
    cfg: &ExperimentConfig,
    prob: &VectorFieldProblem,
    method: Method,
    eta: StepSize,
    seed: u64,
) -> Result<RunEntry, HarnessError> {
    let sc = cfg.solver_config(method, eta, seed);
    let z0 = prob.initial_point(seed);
    let trace = run(prob, &sc, &z0).map_err(|e| HarnessError::Config(format!("{method} eta={}: {e}", eta_label(eta))))?;
    let name = format!("{}_{}_eta-{}_seed-{}.csv", prob.name, method, eta_label(eta), seed);
    let path = cfg.output_dir.join(&name);
    let file = fs::File::create(&path).map_err(io(&path))?;
    trace.write_csv(std::io::BufWriter::new(file)).map_err(io(&path))?;
    let final_dist = prob
        .solution
        .as_ref()
        .and_then(|s| prob.manifold.distance(&trace.final_state.z, s).ok());
    let t_min = default_t_min(cfg.iterations);
    let fits = SUMMARY_METRICS
        .iter()
        .map(|&m| (m, fit_rate(&trace.records, m, t_min, cfg.iterations as f64).ok()))
        .collect();
    Ok(RunEntry {
        csv: name,
        summary: trace.summary(final_dist),
        fits,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub sweeps: Vec<LemmaSweep>,
    pub failures: usize,
    pub status: Status,
}

/// Runs the probe sweeps, writing per-lemma CSVs and a summary into `out`.
pub fn run_validators(spec: &SweepSpec, out: &Path) -> Result<ValidationReport, HarnessError> {
    let sweeps = if spec.probes == 0 { Vec::new() } else { run_sweep(spec) };
    write_sweep(out, &sweeps).map_err(io(out))?;
    let failures = sweeps.iter().map(|s| s.failures).sum();
    Ok(ValidationReport {
        sweeps,
        failures,
        status: if failures > 0 { Status::InvariantViolation } else { Status::Success },
    })
}
