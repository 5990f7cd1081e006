use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::IterateRecord;

/// Minimum number of usable points for a fit.
pub const MIN_FIT_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Dist,
    OpNorm,
    OpNormHalf,
    /// Running minimum of `op_norm` over the recorded rows.
    OpNormBest,
    Hamiltonian,
    GapLast,
    GapAvg,
    Phi,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Dist,
        Metric::OpNorm,
        Metric::OpNormHalf,
        Metric::OpNormBest,
        Metric::Hamiltonian,
        Metric::GapLast,
        Metric::GapAvg,
        Metric::Phi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Dist => "dist",
            Metric::OpNorm => "op_norm",
            Metric::OpNormHalf => "op_norm_half",
            Metric::OpNormBest => "op_norm_best",
            Metric::Hamiltonian => "hamiltonian",
            Metric::GapLast => "gap_last",
            Metric::GapAvg => "gap_avg",
            Metric::Phi => "phi",
        }
    }

    /// `(t, value)` pairs for the rows where the metric was recorded.
    pub fn series(self, records: &[IterateRecord]) -> Vec<(f64, f64)> {
        let mut best = f64::INFINITY;
        records
            .iter()
            .filter_map(|r| {
                let v = match self {
                    Metric::Dist => r.dist_to_solution,
                    Metric::OpNorm => Some(r.op_norm),
                    Metric::OpNormHalf => Some(r.op_norm_half),
                    Metric::OpNormBest => {
                        best = best.min(r.op_norm);
                        Some(best)
                    }
                    Metric::Hamiltonian => r.hamiltonian,
                    Metric::GapLast => r.gap_last,
                    Metric::GapAvg => r.gap_avg,
                    Metric::Phi => r.lyapunov_phi,
                };
                v.map(|v| (r.t as f64, v))
            })
            .collect()
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<_> = Metric::ALL.iter().map(|m| m.name()).collect();
            Error::Domain(format!("unknown metric '{s}'; valid metrics: {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub metric: Metric,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub t_range: (f64, f64),
    pub points: usize,
}

/// Default burn-in `max(10, T/100)`.
pub fn default_t_min(iterations: u64) -> f64 {
    (iterations as f64 / 100.0).max(10.0)
}

/// Least-squares fit of `log(value) = intercept + slope log(t)` over
/// `t_min <= t <= t_max`, using only positive values and `t > 0`.
pub fn fit_points(metric: Metric, points: &[(f64, f64)], t_min: f64, t_max: f64) -> Result<RateFit> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(t, v)| t > 0.0 && t >= t_min && t <= t_max && v > 0.0 && v.is_finite())
        .collect();
    if kept.len() < MIN_FIT_POINTS {
        return Err(Error::Domain(format!(
            "{metric}: {} usable points in [{t_min}, {t_max}], need {MIN_FIT_POINTS}",
            kept.len()
        )));
    }
    // log values shifted by the first one, so a constant series fits exactly
    let y0 = kept[0].1.ln();
    let logs: Vec<(f64, f64)> = kept.iter().map(|&(t, v)| (t.ln(), v.ln() - y0)).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain(format!("{metric}: all usable points share one t")));
    }
    let slope = sxy / sxx;
    let shifted = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - shifted - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    let intercept = shifted + y0;
    let lo = kept.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = kept.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        metric,
        slope,
        intercept,
        r_squared,
        t_range: (lo, hi),
        points: kept.len(),
    })
}

pub fn fit_rate(records: &[IterateRecord], metric: Metric, t_min: f64, t_max: f64) -> Result<RateFit> {
    fit_points(metric, &metric.series(records), t_min, t_max)
}

/// Reads a trace CSV written by `RunTrace::write_csv`.
pub fn read_trace_csv(path: &Path) -> Result<Vec<IterateRecord>> {
    let io = |e: csv::Error| Error::Domain(format!("{}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(io)?;
    let headers = rdr.headers().map_err(io)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Domain(format!("{}: missing column '{name}'", path.display())))
    };
    let cols = [
        col("t")?,
        col("dist")?,
        col("op_norm")?,
        col("op_norm_half")?,
        col("hamiltonian")?,
        col("gap_last")?,
        col("gap_avg")?,
        col("phi")?,
        col("violation_flags")?,
    ];
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(io)?;
        let num = |i: usize| -> Result<Option<f64>> {
            let s = &row[cols[i]];
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| Error::Domain(format!("{}: bad number '{s}'", path.display())))
            }
        };
        out.push(IterateRecord {
            t: num(0)?.unwrap_or(0.0) as u64,
            dist_to_solution: num(1)?,
            op_norm: num(2)?.unwrap_or(f64::NAN),
            op_norm_half: num(3)?.unwrap_or(f64::NAN),
            hamiltonian: num(4)?,
            gap_last: num(5)?,
            gap_avg: num(6)?,
            lyapunov_phi: num(7)?,
            violation_flags: num(8)?.unwrap_or(0.0) as u32,
        });
    }
    Ok(out)
}
