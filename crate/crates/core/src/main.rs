use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cascade_lab::branching::SolverOptions;
use cascade_lab::io::{load_model_file, LoadError, BUNDLED_MODELS};
use cascade_lab::model::SystemModel;
use cascade_lab::orders::{LpOptions, DEFAULT_GRID_LIMIT};
use cascade_lab::report::{
    branching_sim_summary, compare_report, epidemic_summary, orders_report, solve_report,
};
use cascade_lab::simulate::{estimate_epidemic_probability, simulate_branching, BranchingSimConfig, EpidemicConfig};

#[derive(Parser)]
#[command(name = "cascade-lab", version, about = "Cascading-failure probabilities of interdependent systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and list every violation.
    Validate {
        /// Model file, or the name of a bundled model.
        model: String,
    },
    /// Extinction probabilities, PoCF, mean matrix and spectral radius.
    Solve {
        model: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Order verdicts between two models and the PoE inequalities they imply.
    Compare {
        left: String,
        right: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = DEFAULT_GRID_LIMIT)]
        grid_limit: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Every stochastic order between corresponding laws, with witnesses.
    Orders {
        left: String,
        right: String,
        #[arg(long, default_value_t = DEFAULT_GRID_LIMIT)]
        grid_limit: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo extinction frequency of the branching process.
    SimulateBp {
        model: String,
        /// Type of the initial individual (0-based; `i + N` is type i+).
        #[arg(long, default_value_t = 0)]
        seed_type: usize,
        #[arg(long, default_value = "1e5", value_parser = parse_count)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        generation_cap: usize,
        #[arg(long, default_value_t = 1000)]
        population_cap: u64,
        /// Number of leading trials whose generation counts are reported.
        #[arg(long, default_value_t = 5)]
        traces: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Epidemic frequency of cascades on generated finite systems.
    SimulateGraph {
        #[arg(default_value = "graph_analog")]
        model: String,
        /// Agents per CS, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "50000,50000")]
        sizes: Vec<usize>,
        /// Epidemic threshold as a fraction of all agents.
        #[arg(long, default_value_t = 0.005)]
        gamma: f64,
        #[arg(long, default_value = "1000", value_parser = parse_count)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CS of the initial failure (0-based).
        #[arg(long, default_value_t = 0)]
        seed_cs: usize,
        /// Also write one tab-separated row per trial to this file.
        #[arg(long)]
        rows: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// List the bundled model names.
    Models,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iterations: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            ..SolverOptions::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Positive integer count, also accepted in float notation such as `1e5`.
fn parse_count(s: &str) -> Result<u64, String> {
    let n = match s.parse::<u64>() {
        Ok(n) => n,
        Err(_) => {
            let x: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
            if !(x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64) {
                return Err(format!("not a whole count: {s}"));
            }
            x as u64
        }
    };
    if n == 0 {
        return Err("must be at least 1".to_owned());
    }
    Ok(n)
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn load(source: &str) -> Result<SystemModel, Failure> {
    let file = load_model_file(source)?;
    file.to_model().map_err(|r| Failure::Invalid(format!("{source}: {r}")))
}

fn emit<T: Serialize>(out: &OutputArgs, value: &T, human: impl FnOnce(&T) -> String) -> Result<(), Failure> {
    let text = match out.format {
        Format::Human => human(value),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(runtime)?;
            s.push('\n');
            s
        }
    };
    match &out.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { model } => {
            if let Err(report) = load_model_file(&model)?.to_model() {
                for v in &report.violations {
                    println!("{} at {}: {}", v.kind.code(), v.path, v.message);
                }
                return Err(Failure::Invalid(format!("{model}: {} violation(s)", report.violations.len())));
            }
            println!("{model}: valid");
        }
        Command::Solve { model, solver, out } => {
            let m = load(&model)?;
            let report = solve_report(&model, &m, &solver.options()).map_err(runtime)?;
            emit(&out, &report, |r| r.render_human())?;
        }
        Command::Compare {
            left,
            right,
            solver,
            grid_limit,
            out,
        } => {
            let (l, r) = (load(&left)?, load(&right)?);
            let report = compare_report((&left, &right), &l, &r, &solver.options(), &LpOptions { grid_limit })
                .map_err(runtime)?;
            emit(&out, &report, |r| r.render_human())?;
        }
        Command::Orders {
            left,
            right,
            grid_limit,
            out,
        } => {
            let (l, r) = (load(&left)?, load(&right)?);
            let report = orders_report((&left, &right), &l, &r, &LpOptions { grid_limit }).map_err(runtime)?;
            emit(&out, &report, |r| r.render_human())?;
        }
        Command::SimulateBp {
            model,
            seed_type,
            trials,
            seed,
            generation_cap,
            population_cap,
            traces,
            out,
        } => {
            let m = load(&model)?;
            let cfg = BranchingSimConfig {
                seed_type,
                generation_cap,
                population_cap,
                trials,
                rng_seed: seed,
                keep_traces: traces,
            };
            let sim = simulate_branching(&m, &cfg).map_err(runtime)?;
            let report = branching_sim_summary(&model, &m, sim).map_err(runtime)?;
            emit(&out, &report, |r| r.render_human())?;
        }
        Command::SimulateGraph {
            model,
            sizes,
            gamma,
            trials,
            seed,
            seed_cs,
            rows,
            out,
        } => {
            let m = load(&model)?;
            let cfg = EpidemicConfig {
                sizes,
                gamma,
                trials,
                rng_seed: seed,
                seed_cs,
            };
            let sim = estimate_epidemic_probability(&m, &cfg).map_err(runtime)?;
            if let Some(path) = rows {
                std::fs::write(&path, sim.to_tsv())
                    .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            }
            let report = epidemic_summary(&model, &m, sim).map_err(runtime)?;
            emit(&out, &report, |r| r.render_human())?;
        }
        Command::Models => {
            for (name, _) in BUNDLED_MODELS {
                println!("{name}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
