//! Extragradient-type update rules and the instrumented run driver.

mod run;
mod steps;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use run::{run, IterateRecord, RunSummary, RunTrace, SolverState, Violations, CSV_HEADER, INVARIANT_TOL};
pub use steps::{rceg_step, reg_step, rgda_step, rogda_step, rpeg_step, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Extragradient: two fresh field evaluations per step.
    Reg,
    /// Past extragradient: reuses the transported previous half-step field.
    Rpeg,
    /// Extragradient with the full step taken from the half-iterate.
    Rceg,
    /// Optimistic gradient descent ascent.
    Rogda,
    /// Plain gradient step.
    Rgda,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Reg, Method::Rpeg, Method::Rceg, Method::Rogda, Method::Rgda];

    pub fn name(self) -> &'static str {
        match self {
            Method::Reg => "REG",
            Method::Rpeg => "RPEG",
            Method::Rceg => "RCEG",
            Method::Rogda => "ROGDA",
            Method::Rgda => "RGDA",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Method::Reg => "extragradient, two field evaluations per step",
            Method::Rpeg => "past extragradient, one fresh evaluation per step",
            Method::Rceg => "corrected extragradient, full step taken from the half-iterate",
            Method::Rogda => "optimistic gradient descent ascent",
            Method::Rgda => "gradient descent ascent baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Domain(format!("unknown method '{s}'; valid methods: {}", names.join(", ")))
            })
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Step size: a fixed value or `"auto"` for the method's curvature-aware formula.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StepSize {
    #[default]
    Auto,
    Fixed(f64),
}

impl fmt::Display for StepSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSize::Auto => f.write_str("auto"),
            StepSize::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for StepSize {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StepSize::Auto => s.serialize_str("auto"),
            StepSize::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for StepSize {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(StepSize::Fixed(v)),
            Repr::Text(t) if t == "auto" => Ok(StepSize::Auto),
            Repr::Text(t) => t
                .parse()
                .map(StepSize::Fixed)
                .map_err(|_| serde::de::Error::custom(format!("step size must be a number or \"auto\", got '{t}'"))),
        }
    }
}

/// Which invariants `run` checks at every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Instrument {
    /// `||F(z_{t+1})|| <= ||F(z_t)||` (REG).
    pub norm_monotone: bool,
    /// `Phi_{t+1} <= Phi_t` (RPEG).
    pub lyapunov: bool,
    /// `d(z_t, z*) <= D` and `d(z~_t, z*) <= 6D/5`.
    pub boundedness: bool,
    /// Holonomy bound on the triangle `(z_t, z~_t, z_{t+1})`.
    pub holonomy_probe: bool,
    /// `1/2 <= ||F(z~_{t+1})|| / ||F(z~_t)|| <= 3/2` (RPEG, only when `L eta <= 1/8`).
    pub half_ratio: bool,
    /// `(1 - L eta) ||F(z_t)|| <= ||F(z~_t)|| <= (1 + L eta) ||F(z_t)||` (REG).
    pub sandwich: bool,
    /// `d(z~_t, z_{t+1}) <= 2 L eta^2 ||F(z_t)||` (REG).
    pub proximity: bool,
    /// Record duality gaps of the last and averaged iterates.
    pub gaps: bool,
}

impl Default for Instrument {
    fn default() -> Self {
        Instrument {
            norm_monotone: true,
            lyapunov: true,
            boundedness: true,
            holonomy_probe: false,
            half_ratio: false,
            sandwich: false,
            proximity: false,
            gaps: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    #[serde(default)]
    pub eta: StepSize,
    pub iterations: u64,
    #[serde(default = "one")]
    pub record_every: u64,
    #[serde(default)]
    pub instrument: Instrument,
    /// Seeds the holonomy probe directions.
    #[serde(default)]
    pub seed: u64,
}

fn one() -> u64 {
    1
}

impl SolverConfig {
    pub fn new(method: Method, iterations: u64) -> Self {
        SolverConfig {
            method,
            eta: StepSize::Auto,
            iterations,
            record_every: 1,
            instrument: Instrument::default(),
            seed: 0,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = StepSize::Fixed(eta);
        self
    }

    pub fn with_record_every(mut self, r: u64) -> Self {
        self.record_every = r;
        self
    }

    pub fn with_instrument(mut self, instrument: Instrument) -> Self {
        self.instrument = instrument;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Domain("iterations must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Domain("record_every must be at least 1".into()));
        }
        if let StepSize::Fixed(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::Domain(format!("eta must be positive, got {eta}")));
            }
        }
        Ok(())
    }
}
