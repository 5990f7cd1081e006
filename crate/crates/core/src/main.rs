use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use riemvi::harness::{
    default_t_min, fit_rate, read_trace_csv, run_experiment, run_validators, ExperimentConfig, Metric, Status,
};
use riemvi::problems::PROBLEM_NAMES;
use riemvi::solvers::Method;

#[derive(Parser)]
#[command(name = "riemvi", version, about = "Riemannian variational inequality solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver grid described by a TOML config.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set iterations=1000` or `--set problem.radius=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the geometry validator sweeps from a config's `[validators]` table.
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Fit a log-log convergence slope to a trace CSV.
    Fit {
        trace: PathBuf,
        #[arg(long)]
        metric: String,
        /// Burn-in; defaults to max(10, T/100) with T the last recorded t.
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
    },
    ListProblems,
    ListMethods,
}

fn load(config: &PathBuf, overrides: &[String], output_dir: Option<PathBuf>) -> Result<ExperimentConfig, ExitCode> {
    match ExperimentConfig::load(config, overrides) {
        Ok(mut c) => {
            if let Some(d) = output_dir {
                c.output_dir = d;
            }
            Ok(c)
        }
        Err(e) => {
            eprintln!("{e}");
            Err(exit(Status::ConfigError))
        }
    }
}

fn exit(status: Status) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides, output_dir } => {
            let cfg = match load(&config, &overrides, output_dir) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match run_experiment(&cfg) {
                Ok(report) => {
                    for r in &report.runs {
                        let s = &r.summary;
                        println!(
                            "{:<6} eta={:<12.6e} seed={:<4} final_op_norm={:.3e} violations={}{}",
                            s.method.name(),
                            s.eta,
                            s.seed,
                            s.final_op_norm,
                            s.violations.total(),
                            s.abort.as_deref().map(|a| format!(" aborted: {a}")).unwrap_or_default()
                        );
                    }
                    println!("summary: {}", cfg.output_dir.join("summary.json").display());
                    exit(report.status)
                }
                Err(e) => {
                    eprintln!("{e}");
                    exit(e.status())
                }
            }
        }
        Command::Validate { config, overrides, output_dir } => {
            let cfg = match load(&config, &overrides, output_dir) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let Some(spec) = &cfg.validators else {
                eprintln!("config error: no [validators] table in {}", config.display());
                return exit(Status::ConfigError);
            };
            match run_validators(spec, &cfg.output_dir) {
                Ok(report) => {
                    for s in &report.sweeps {
                        println!(
                            "{:<20} {:<8} valid={:<6} invalid={:<6} failures={:<4} worst_residual={:.3e}",
                            s.lemma.name(),
                            s.manifold,
                            s.valid,
                            s.invalid,
                            s.failures,
                            s.worst_residual
                        );
                    }
                    exit(report.status)
                }
                Err(e) => {
                    eprintln!("{e}");
                    exit(e.status())
                }
            }
        }
        Command::Fit { trace, metric, t_min, t_max } => {
            let metric: Metric = match metric.parse() {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("{e}");
                    return exit(Status::ConfigError);
                }
            };
            let records = match read_trace_csv(&trace) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return exit(Status::ConfigError);
                }
            };
            let last = records.last().map(|r| r.t).unwrap_or(0);
            let t_min = t_min.unwrap_or_else(|| default_t_min(last + 1));
            let t_max = t_max.unwrap_or(f64::INFINITY);
            match fit_rate(&records, metric, t_min, t_max) {
                Ok(fit) => {
                    println!("{}", serde_json::to_string_pretty(&fit).expect("serializable"));
                    exit(Status::Success)
                }
                Err(e) => {
                    eprintln!("fit unavailable: {e}");
                    exit(Status::ConfigError)
                }
            }
        }
        Command::ListProblems => {
            for p in PROBLEM_NAMES {
                println!("{p}");
            }
            exit(Status::Success)
        }
        Command::ListMethods => {
            for m in Method::ALL {
                println!("{:<6} {}", m.name(), m.description());
            }
            exit(Status::Success)
        }
    }
}
