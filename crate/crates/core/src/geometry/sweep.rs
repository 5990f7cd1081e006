//! Randomized probe sweeps of the comparison inequalities.
//!
//! Every probe draws from its own generator, keyed by the sweep seed, the
//! lemma, the manifold and the probe index, so sequential and parallel runs
//! produce identical records.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::validators::{
    cosine_law_lower_check, cosine_law_upper_check, distance_comparison_check,
    hessian_comparison_check, holonomy_defect, CheckReport,
};
use super::{jacobi_ratio, RESIDUAL_TOL};
use crate::manifold::sample::{point_in_ball, unit_tangent};
use crate::manifold::Manifold;
use crate::par::{map_range, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma {
    Holonomy,
    CosineLower,
    CosineUpper,
    HessianFirst,
    HessianSecond,
    DistanceComparison,
    JacobiRatio,
}

impl Lemma {
    pub const ALL: [Lemma; 7] = [
        Lemma::Holonomy,
        Lemma::CosineLower,
        Lemma::CosineUpper,
        Lemma::HessianFirst,
        Lemma::HessianSecond,
        Lemma::DistanceComparison,
        Lemma::JacobiRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Holonomy => "holonomy",
            Lemma::CosineLower => "cosine_lower",
            Lemma::CosineUpper => "cosine_upper",
            Lemma::HessianFirst => "hessian_first",
            Lemma::HessianSecond => "hessian_second",
            Lemma::DistanceComparison => "distance_comparison",
            Lemma::JacobiRatio => "jacobi_ratio",
        }
    }

    /// Radius of the ball the triangle vertices are drawn from.
    pub fn default_radius(self) -> f64 {
        match self {
            Lemma::Holonomy => 0.25,
            Lemma::CosineLower => 1.0,
            Lemma::HessianFirst | Lemma::HessianSecond => 0.75,
            Lemma::CosineUpper | Lemma::DistanceComparison | Lemma::JacobiRatio => 0.5,
        }
    }

    fn index(self) -> u64 {
        Lemma::ALL.iter().position(|&l| l == self).unwrap() as u64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub manifolds: Vec<Manifold>,
    pub lemmas: Vec<Lemma>,
    /// Number of valid probes wanted per (lemma, manifold) pair.
    pub probes: usize,
    /// Vertex ball radius; `None` uses each lemma's default.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeRecord {
    pub probe_id: u64,
    pub residual: f64,
    pub bound: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaSweep {
    pub lemma: Lemma,
    pub manifold: String,
    pub valid: usize,
    pub invalid: usize,
    pub failures: usize,
    /// Smallest residual over valid probes.
    pub worst_residual: f64,
    #[serde(skip)]
    pub records: Vec<ProbeRecord>,
}

impl LemmaSweep {
    pub fn passed(&self, target: usize) -> bool {
        self.failures == 0 && self.valid >= target
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["probe_id", "manifold", "residual", "bound", "valid_flag"])?;
        for r in &self.records {
            w.write_record([
                r.probe_id.to_string(),
                self.manifold.clone(),
                r.residual.to_string(),
                r.bound.to_string(),
                u8::from(r.valid).to_string(),
            ])?;
        }
        w.flush()
    }
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn probe_rng(seed: u64, lemma: Lemma, manifold: usize, probe: u64) -> ChaCha8Rng {
    let key = mix(mix(mix(seed) ^ lemma.index()) ^ manifold as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(probe);
    rng
}

/// Evaluates one probe of `lemma` on `m`.
pub fn probe(m: &Manifold, lemma: Lemma, radius: f64, rng: &mut ChaCha8Rng) -> CheckReport {
    if lemma == Lemma::JacobiRatio {
        let (kappa, k_upper) = m.curvature_bounds();
        let k_m = kappa.abs().max(k_upper.abs());
        let t_max = if k_m > 0.0 { 1.0 / k_m.sqrt() } else { 10.0 };
        let t = t_max * rng.random::<f64>();
        return match jacobi_ratio(kappa, k_upper, t) {
            Ok(r) => CheckReport {
                lhs: r,
                bound: 3.0,
                residual: 3.0 - r,
                valid: true,
            },
            Err(_) => CheckReport::invalid(),
        };
    }
    let center = point_in_ball(m, &m.origin(), 1.0, rng);
    let x = point_in_ball(m, &center, radius, rng);
    let y = point_in_ball(m, &center, radius, rng);
    let z = point_in_ball(m, &center, radius, rng);
    match lemma {
        Lemma::Holonomy => {
            let u = unit_tangent(m, &x, rng).scale(0.5 + 1.5 * rng.random::<f64>());
            holonomy_defect(m, &x, &y, &z, &u).expect("u is based at x").report()
        }
        Lemma::CosineLower => cosine_law_lower_check(m, &x, &y, &z),
        Lemma::CosineUpper => cosine_law_upper_check(m, &x, &y, &z),
        Lemma::HessianFirst => hessian_comparison_check(m, &x, &y, &z)[0],
        Lemma::HessianSecond => hessian_comparison_check(m, &x, &y, &z)[1],
        Lemma::DistanceComparison => distance_comparison_check(m, &x, &y, &z),
        Lemma::JacobiRatio => unreachable!(),
    }
}

/// Runs probes until `target` are valid or `20 * target` have been drawn.
pub fn sweep_one(
    m: &Manifold,
    manifold_index: usize,
    lemma: Lemma,
    target: usize,
    radius: f64,
    seed: u64,
    exec: Execution,
) -> LemmaSweep {
    let cap = 20 * target.max(1);
    let mut records = Vec::with_capacity(target);
    let mut valid = 0;
    while valid < target && records.len() < cap {
        let start = records.len();
        let batch = (target - valid).max(64).min(cap - start);
        let fresh = map_range(exec, batch, |i| {
            let id = (start + i) as u64;
            let mut rng = probe_rng(seed, lemma, manifold_index, id);
            let r = probe(m, lemma, radius, &mut rng);
            ProbeRecord {
                probe_id: id,
                residual: r.residual,
                bound: r.bound,
                valid: r.valid,
            }
        });
        for r in fresh {
            if valid == target {
                break;
            }
            valid += usize::from(r.valid);
            records.push(r);
        }
    }
    let valid_records = records.iter().filter(|r| r.valid);
    let failures = valid_records.clone().filter(|r| !(r.residual >= -RESIDUAL_TOL)).count();
    let worst_residual = valid_records.map(|r| r.residual).fold(f64::INFINITY, f64::min);
    LemmaSweep {
        lemma,
        manifold: m.name(),
        valid,
        invalid: records.len() - valid,
        failures,
        worst_residual,
        records,
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Vec<LemmaSweep> {
    let mut out = Vec::new();
    for &lemma in &spec.lemmas {
        for (i, m) in spec.manifolds.iter().enumerate() {
            let radius = spec.radius.unwrap_or_else(|| lemma.default_radius());
            out.push(sweep_one(m, i, lemma, spec.probes, radius, spec.seed, spec.execution));
        }
    }
    out
}

/// Writes one CSV per (lemma, manifold) into `dir` plus a `validate_summary.json`.
pub fn write_sweep(dir: &Path, sweeps: &[LemmaSweep]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for s in sweeps {
        s.write_csv(&dir.join(format!("validate_{}_{}.csv", s.lemma.name(), s.manifold)))?;
    }
    let mut f = std::fs::File::create(dir.join("validate_summary.json"))?;
    serde_json::to_writer_pretty(&mut f, sweeps)?;
    writeln!(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let m = Manifold::sphere(2);
        let a = sweep_one(&m, 0, Lemma::CosineUpper, 300, 0.5, 3, Execution::Sequential);
        let b = sweep_one(&m, 0, Lemma::CosineUpper, 300, 0.5, 3, Execution::Parallel);
        assert_eq!(a.records, b.records);
        assert_eq!(a.valid, 300);
    }

    #[test]
    fn all_lemmas_hold_on_small_sweeps() {
        let spec = SweepSpec {
            manifolds: vec![Manifold::sphere(2), Manifold::hyperboloid(2), Manifold::spd(2)],
            lemmas: Lemma::ALL.to_vec(),
            probes: 200,
            radius: None,
            seed: 1,
            execution: Execution::Parallel,
        };
        for s in run_sweep(&spec) {
            assert!(s.passed(200), "{:?} on {}: {s:?}", s.lemma, s.manifold);
        }
    }

    #[test]
    fn csv_layout() {
        let m = Manifold::hyperboloid(2);
        let s = sweep_one(&m, 0, Lemma::Holonomy, 5, 0.25, 0, Execution::Sequential);
        let dir = tempfile::tempdir().unwrap();
        write_sweep(dir.path(), &[s]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("validate_holonomy_H2.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("probe_id,manifold,residual,bound,valid_flag"));
        assert_eq!(lines.count(), 5);
    }
}
