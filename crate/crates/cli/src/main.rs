//! `hawkvlc`: solve single scenarios and run the experiment suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hawkvlc::experiment::bench::BENCH_COLUMNS;
use hawkvlc::experiment::convergence::CONVERGENCE_COLUMNS;
use hawkvlc::experiment::sweep::{write_summary, SWEEP_COLUMNS};
use hawkvlc::experiment::trainer::{TRAINER_SUMMARY_COLUMNS, TRAINER_TRACE_COLUMNS};
use hawkvlc::experiment::{
    run_convergence, run_function_benchmark, run_sweep, run_trainer_benchmark, solve_with, BenchPlan, ExperimentConfig,
    SweepParameter,
};
use hawkvlc::fnn::train::{Algorithm, LossKind};
use hawkvlc::hho::benchmarks::TestFunction;
use hawkvlc::hho::HhoParams;
use hawkvlc::planner::Scheme;
use hawkvlc::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_DATASET: u8 = 4;

const EXIT_CODES: &str = "Exit codes: 0 success, 1 other failure, 2 invalid arguments or configuration, \
3 file read/write failure (partial outputs are left in place), 4 missing or malformed dataset.";

#[derive(Parser)]
#[command(
    name = "hawkvlc",
    version,
    about = "UAV placement and NOMA power allocation for visible light downlinks"
)]
#[command(after_help = EXIT_CODES)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML file of configuration keys; unset keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Scenario realizations per sweep point.
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Comma-separated schemes (HHOPAP, GRPA, RandP, OFDMA).
    #[arg(long, global = true, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    /// Worker threads; 0 uses every core. Never changes results.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Override any configuration key, e.g. `--set p_max_mw=40`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true, value_parser = parse_key_value)]
    overrides: Vec<(String, String)>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario realization and write solution.json.
    #[command(
        after_long_help = "Writes <out>/solution.json: scheme, seed, placement {x, y} in m, powers in W by \
user id, per_user_rates_bps, sum_rate_bps, residuals (budget W, optical, sic, qos bit/s, disc m², \
nonnegativity W; positive means violated), feasible, fitness (penalized objective in bit/s/Hz)."
    )]
    Solve {
        /// Realization index of the generated scenario.
        #[arg(long, default_value_t = 0)]
        realization: usize,
        #[arg(long, default_value = "HHOPAP")]
        scheme: Scheme,
    },
    /// Sweep one scenario parameter for every scheme and realization.
    #[command(after_long_help = sweep_help())]
    Sweep {
        /// p_max (mW), fov (deg), disc_radius (m), altitude (m) or n_users.
        #[arg(long)]
        parameter: Option<SweepParameter>,
        /// Comma-separated grid; defaults to the parameter's standard grid.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Record best-so-far traces of the joint planner.
    #[command(after_long_help = convergence_help())]
    Converge {
        /// Comma-separated user counts.
        #[arg(long, value_delimiter = ',')]
        users: Option<Vec<usize>>,
        /// Realizations per user count.
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Compare the HHO, PSO, ES and GA network trainers.
    #[command(after_long_help = trainer_help())]
    Train {
        /// dataset_mse (Iris and Cancer), sum_rate or rate_gap.
        #[arg(long)]
        loss: Option<LossKind>,
        /// Comma-separated trainers.
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<Algorithm>>,
        /// Seeds per trainer.
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Run the optimizer on classic test functions.
    #[command(after_long_help = bench_help())]
    BenchFunctions {
        /// Comma-separated functions (sphere, rastrigin, ackley, griewank, schwefel_2_22).
        #[arg(long, value_delimiter = ',')]
        functions: Option<Vec<TestFunction>>,
        #[arg(long, default_value_t = 30)]
        dim: usize,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Iterations per run; the population comes from the configuration.
        #[arg(long, default_value_t = 500)]
        iterations: usize,
    },
}

fn sweep_help() -> String {
    format!(
        "Writes <out>/sweep.csv and <out>/sweep_summary.csv. Both start with a '#' line naming the tool version, \
schema, master_seed and a configuration fingerprint. Rerunning into the same directory resumes an interrupted sweep.\n\n\
sweep.csv columns: {SWEEP_COLUMNS}\n  parameter: swept key; value: its value in the unit named by the key; \
scheme; realization: scenario index; seed: solver seed; sum_rate_bps; feasible: every constraint holds; \
wall_time_s: empty unless record_timing = true; x_u_m, y_u_m: placement; powers_w: ';'-separated watts by user id.\n\n\
sweep_summary.csv columns: value,scheme,realizations,mean_sum_rate_bps,feasible_fraction"
    )
}

fn convergence_help() -> String {
    format!(
        "Writes <out>/convergence.csv, one row per iteration.\n\ncolumns: {CONVERGENCE_COLUMNS}\n  \
best_fitness: penalized objective of the best solution so far (bit/s/Hz); sum_rate_bps and feasible describe \
that solution."
    )
}

fn trainer_help() -> String {
    format!(
        "Writes <out>/trainer.csv (best-so-far loss per iteration) and <out>/trainer_summary.csv (one row per run).\n\n\
trainer.csv columns: {TRAINER_TRACE_COLUMNS}\n\ntrainer_summary.csv columns: {TRAINER_SUMMARY_COLUMNS}\n  \
task: iris, cancer, sum_rate or rate_gap; final_loss: MSE for datasets, bit/s/Hz (sum_rate, negated) or its square \
(rate_gap) for scenarios; accuracy: dataset tasks only; eval_*: held-out scenarios only; hhopap_sum_rate_bps: \
joint planner on the same held-out scenarios."
    )
}

fn bench_help() -> String {
    format!(
        "Writes <out>/bench_functions.csv.\n\ncolumns: {BENCH_COLUMNS}\n  best_fitness: best -f(x) found (0 is optimal)."
    )
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn load_config(common: &Common, extra: &[(&str, String)]) -> hawkvlc::Result<ExperimentConfig> {
    let mut overrides = common.overrides.clone();
    overrides.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    let mut cfg = ExperimentConfig::load_with_overrides(common.config.as_deref(), &overrides)?;
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    if let Some(r) = common.realizations {
        cfg.realizations = r;
    }
    if let Some(s) = &common.schemes {
        cfg.schemes = s.clone();
    }
    if let Some(p) = common.parallel {
        cfg.parallel = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn toml_list<T: std::fmt::Display>(items: &[T], quote: bool) -> String {
    let parts: Vec<String> = items
        .iter()
        .map(|i| if quote { format!("\"{i}\"") } else { i.to_string() })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn create_out(dir: &Path) -> hawkvlc::Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::from)
}

fn run(cli: Cli, common: Common) -> anyhow::Result<()> {
    let out = &common.out;
    match cli.command {
        Command::Solve { realization, scheme } => {
            let cfg = load_config(&common, &[])?;
            let scenario = cfg.generate_scenario(realization);
            let sol = solve_with(&cfg, scheme, &scenario, cfg.solver_seed(realization, scheme))?;
            create_out(out)?;
            let path = out.join("solution.json");
            std::fs::write(&path, sol.to_json()? + "\n").map_err(Error::from)?;
            println!(
                "{scheme}: sum rate {:.3} Mbit/s, feasible {}, written to {}",
                sol.sum_rate_bps / 1e6,
                sol.feasible,
                path.display()
            );
        }
        Command::Sweep { parameter, values } => {
            let mut extra = Vec::new();
            if let Some(p) = parameter {
                extra.push(("sweep_parameter", format!("\"{}\"", p.name())));
            }
            if let Some(v) = values {
                extra.push(("sweep_values", toml_list(&v, false)));
            }
            let cfg = load_config(&common, &extra)?;
            create_out(out)?;
            let res = run_sweep(&cfg, &out.join("sweep.csv"))?;
            let summary = res.summary();
            write_summary(&cfg, &out.join("sweep_summary.csv"), &summary)?;
            for p in &summary {
                println!(
                    "{}={} {:>6}: {:9.3} Mbit/s, feasible {:.2}",
                    cfg.sweep_parameter.name(),
                    p.value,
                    p.scheme,
                    p.mean_sum_rate_bps / 1e6,
                    p.feasible_fraction
                );
            }
        }
        Command::Converge { users, runs } => {
            let mut extra = Vec::new();
            if let Some(u) = users {
                extra.push(("convergence_users", toml_list(&u, false)));
            }
            if let Some(r) = runs {
                extra.push(("convergence_runs", r.to_string()));
            }
            let cfg = load_config(&common, &extra)?;
            create_out(out)?;
            let rows = run_convergence(&cfg, &out.join("convergence.csv"))?;
            for (n, mean) in hawkvlc::experiment::convergence::converged_means(&rows) {
                println!("N={n}: converged sum rate {:.3} Mbit/s", mean / 1e6);
            }
        }
        Command::Train { loss, algorithms, runs } => {
            let mut extra = Vec::new();
            if let Some(l) = loss {
                extra.push(("trainer_loss", format!("\"{}\"", l.name())));
            }
            if let Some(a) = algorithms {
                extra.push(("trainer_algorithms", toml_list(&a, true)));
            }
            if let Some(r) = runs {
                extra.push(("trainer_runs", r.to_string()));
            }
            let cfg = load_config(&common, &extra)?;
            let bench = run_trainer_benchmark(&cfg, out)?;
            for r in &bench.summary {
                println!(
                    "{} {} run {}: final loss {:.6}",
                    r.task, r.algorithm, r.run, r.final_loss
                );
            }
        }
        Command::BenchFunctions {
            functions,
            dim,
            runs,
            iterations,
        } => {
            let cfg = load_config(&common, &[])?;
            let plan = BenchPlan {
                functions: functions.unwrap_or_else(|| TestFunction::ALL.to_vec()),
                dim,
                runs,
                params: HhoParams::new(cfg.population, iterations),
            };
            create_out(out)?;
            for r in run_function_benchmark(&cfg, &plan, &out.join("bench_functions.csv"))? {
                println!("{} run {}: best {:.3e}", r.function.name(), r.run, r.best_fitness);
            }
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::InvalidArgument(_) | Error::Toml(_)) => EXIT_CONFIG,
        Some(Error::Io(_)) => EXIT_IO,
        Some(Error::Csv(e)) if e.is_io_error() => EXIT_IO,
        Some(Error::MissingDataset { .. } | Error::Dataset { .. }) => EXIT_DATASET,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.common.clone();
    match run(cli, common).context("hawkvlc failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
