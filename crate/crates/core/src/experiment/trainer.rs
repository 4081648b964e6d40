//! Trainer comparison: HHO, PSO, ES and GA on labelled datasets or on the
//! placement network.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_header_comment, thread_pool, write_csv, ExperimentConfig};
use crate::error::Result;
use crate::fnn::train::{train, Algorithm, LossKind, TrainerConfig};
use crate::fnn::{loss_rate_gap, loss_sum_rate, network_decision, network_sum_rate, Dataset, Topology};
use crate::planner::{self, Scheme};
use crate::seed::derive;
use crate::vlc::Scenario;

/// Hidden width of the classifier networks.
pub const DATASET_HIDDEN: usize = 5;
pub const DATASETS: [&str; 2] = ["iris", "cancer"];

const TRAINER_STREAM: u64 = 0x7472_6169_6e65_72;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerTraceRow {
    pub task: String,
    pub algorithm: Algorithm,
    pub run: usize,
    /// 1-based.
    pub iteration: usize,
    pub loss: f64,
}

pub const TRAINER_TRACE_COLUMNS: &str = "task,algorithm,run,iteration,loss";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerSummaryRow {
    pub task: String,
    pub algorithm: Algorithm,
    pub run: usize,
    pub seed: u64,
    pub iterations: usize,
    pub evaluations: u64,
    pub final_loss: f64,
    /// Training-set accuracy, dataset tasks only.
    pub accuracy: Option<f64>,
    /// Mean network sum rate on the held-out scenarios.
    pub eval_sum_rate_bps: Option<f64>,
    /// Fraction of held-out decisions meeting every constraint.
    pub eval_feasible_fraction: Option<f64>,
    /// Mean HHOPAP sum rate on the same held-out scenarios.
    pub hhopap_sum_rate_bps: Option<f64>,
}

pub const TRAINER_SUMMARY_COLUMNS: &str = "task,algorithm,run,seed,iterations,evaluations,final_loss,accuracy,\
eval_sum_rate_bps,eval_feasible_fraction,hhopap_sum_rate_bps";

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerBenchmark {
    pub traces: Vec<TrainerTraceRow>,
    pub summary: Vec<TrainerSummaryRow>,
}

impl TrainerBenchmark {
    pub fn runs_of(&self, task: &str, algorithm: Algorithm) -> Vec<&TrainerSummaryRow> {
        self.summary
            .iter()
            .filter(|r| r.task == task && r.algorithm == algorithm)
            .collect()
    }
}

/// Seed of trainer run `run`, shared by every algorithm.
pub fn trainer_seed(config: &ExperimentConfig, run: usize) -> u64 {
    derive(derive(config.master_seed, TRAINER_STREAM), run as u64)
}

fn trainer_config(config: &ExperimentConfig, algorithm: Algorithm) -> TrainerConfig {
    TrainerConfig {
        tolerance: config.trainer_tolerance,
        patience: config.trainer_patience,
        weight_bound: config.weight_bound,
        ..TrainerConfig::new(algorithm, config.trainer_population, config.trainer_iterations)
    }
}

struct ScenarioTask {
    topology: Topology,
    train: Vec<Scenario>,
    /// HHOPAP sum rate of each training scenario, bit/s/Hz.
    train_reference: Vec<f64>,
    eval: Vec<Scenario>,
    eval_reference_bps: f64,
}

fn hhopap_rates(config: &ExperimentConfig, first: usize, scenarios: &[Scenario]) -> Result<Vec<f64>> {
    scenarios
        .par_iter()
        .enumerate()
        .map(|(k, s)| planner::solve(s, &config.hho_params(), config.solver_seed(first + k, Scheme::Hhopap)))
        .map(|r| r.map(|sol| sol.sum_rate_bps))
        .collect()
}

impl ScenarioTask {
    fn build(config: &ExperimentConfig) -> Result<Self> {
        let train: Vec<Scenario> = (0..config.train_batch).map(|i| config.generate_scenario(i)).collect();
        let first_eval = config.train_batch;
        let eval: Vec<Scenario> = (first_eval..first_eval + config.eval_batch)
            .map(|i| config.generate_scenario(i))
            .collect();
        let train_reference = if config.trainer_loss == LossKind::RateGap {
            hhopap_rates(config, 0, &train)?
                .into_iter()
                .zip(&train)
                .map(|(r, s)| r / s.bandwidth_hz)
                .collect()
        } else {
            Vec::new()
        };
        let eval_reference = hhopap_rates(config, first_eval, &eval)?;
        Ok(Self {
            topology: Topology::for_users(config.n_users),
            train,
            train_reference,
            eval,
            eval_reference_bps: eval_reference.iter().sum::<f64>() / config.eval_batch as f64,
        })
    }

    fn loss(&self, kind: LossKind, flat: &[f64]) -> f64 {
        let n = self.train.len() as f64;
        let total: Result<f64> = match kind {
            LossKind::RateGap => self
                .train
                .iter()
                .zip(&self.train_reference)
                .map(|(s, &r)| loss_rate_gap(flat, &self.topology, s, r))
                .sum(),
            _ => self.train.iter().map(|s| loss_sum_rate(flat, &self.topology, s)).sum(),
        };
        total.map_or(f64::INFINITY, |t| t / n)
    }

    /// Mean sum rate (bit/s) and feasible fraction on the held-out scenarios.
    fn evaluate(&self, flat: &[f64]) -> Result<(f64, f64)> {
        let mut rate = 0.0;
        let mut feasible = 0usize;
        for s in &self.eval {
            rate += network_sum_rate(flat, &self.topology, s)? * s.bandwidth_hz;
            let (p, w) = network_decision(flat, &self.topology, s)?;
            if planner::reverify(Scheme::Hhopap, p, w.watts(), s) {
                feasible += 1;
            }
        }
        let n = self.eval.len() as f64;
        Ok((rate / n, feasible as f64 / n))
    }
}

/// Bundled copy when `dataset_dir` is empty, otherwise `<dataset_dir>/<name>.csv`.
pub fn load_dataset(config: &ExperimentConfig, name: &str) -> Result<Dataset> {
    if config.dataset_dir.as_os_str().is_empty() {
        Dataset::bundled(name)
    } else {
        Dataset::load_csv(&config.dataset_dir.join(format!("{name}.csv")))
    }
}

type JobOutput = (Vec<TrainerTraceRow>, TrainerSummaryRow);

fn dataset_job(config: &ExperimentConfig, name: &str, data: &Dataset, alg: Algorithm, run: usize) -> Result<JobOutput> {
    let topology = data.topology(DATASET_HIDDEN);
    let seed = trainer_seed(config, run);
    let loss = |x: &[f64]| data.mse(x, &topology).unwrap_or(f64::INFINITY);
    let out = train(&trainer_config(config, alg), topology.genome_length(), &loss, seed)?;
    let summary = TrainerSummaryRow {
        task: name.to_string(),
        algorithm: alg,
        run,
        seed,
        iterations: out.trace.len(),
        evaluations: out.evaluations,
        final_loss: out.best_loss,
        accuracy: Some(data.accuracy(&out.genome, &topology)?),
        eval_sum_rate_bps: None,
        eval_feasible_fraction: None,
        hhopap_sum_rate_bps: None,
    };
    Ok((trace_rows(name, alg, run, &out.trace), summary))
}

fn scenario_job(config: &ExperimentConfig, task: &ScenarioTask, alg: Algorithm, run: usize) -> Result<JobOutput> {
    let name = scenario_task_name(config.trainer_loss);
    let seed = trainer_seed(config, run);
    let loss = |x: &[f64]| task.loss(config.trainer_loss, x);
    let out = train(&trainer_config(config, alg), task.topology.genome_length(), &loss, seed)?;
    let (rate, feasible) = task.evaluate(&out.genome)?;
    let summary = TrainerSummaryRow {
        task: name.to_string(),
        algorithm: alg,
        run,
        seed,
        iterations: out.trace.len(),
        evaluations: out.evaluations,
        final_loss: out.best_loss,
        accuracy: None,
        eval_sum_rate_bps: Some(rate),
        eval_feasible_fraction: Some(feasible),
        hhopap_sum_rate_bps: Some(task.eval_reference_bps),
    };
    Ok((trace_rows(name, alg, run, &out.trace), summary))
}

pub fn scenario_task_name(kind: LossKind) -> &'static str {
    match kind {
        LossKind::RateGap => "rate_gap",
        _ => "sum_rate",
    }
}

fn trace_rows(task: &str, algorithm: Algorithm, run: usize, trace: &[f64]) -> Vec<TrainerTraceRow> {
    trace
        .iter()
        .enumerate()
        .map(|(i, &loss)| TrainerTraceRow {
            task: task.to_string(),
            algorithm,
            run,
            iteration: i + 1,
            loss,
        })
        .collect()
}

/// Runs every configured trainer `trainer_runs` times and writes
/// `trainer.csv` and `trainer_summary.csv` into `out_dir`.
pub fn run_trainer_benchmark(config: &ExperimentConfig, out_dir: &Path) -> Result<TrainerBenchmark> {
    config.validate()?;
    let pool = thread_pool(config.parallel)?;
    let algs = &config.trainer_algorithms;
    let outputs: Vec<JobOutput> = pool.install(|| -> Result<Vec<JobOutput>> {
        if config.trainer_loss == LossKind::DatasetMse {
            let data: Vec<(&str, Dataset)> = DATASETS
                .iter()
                .map(|&n| Ok((n, load_dataset(config, n)?)))
                .collect::<Result<_>>()?;
            let jobs: Vec<(usize, Algorithm, usize)> = (0..data.len())
                .flat_map(|d| {
                    algs.iter()
                        .flat_map(move |&a| (0..config.trainer_runs).map(move |r| (d, a, r)))
                })
                .collect();
            jobs.par_iter()
                .map(|&(d, a, r)| dataset_job(config, data[d].0, &data[d].1, a, r))
                .collect()
        } else {
            let task = ScenarioTask::build(config)?;
            let jobs: Vec<(Algorithm, usize)> = algs
                .iter()
                .flat_map(|&a| (0..config.trainer_runs).map(move |r| (a, r)))
                .collect();
            jobs.par_iter()
                .map(|&(a, r)| scenario_job(config, &task, a, r))
                .collect()
        }
    })?;
    let (traces, summary): (Vec<_>, Vec<_>) = outputs.into_iter().unzip();
    let bench = TrainerBenchmark {
        traces: traces.into_iter().flatten().collect(),
        summary,
    };
    std::fs::create_dir_all(out_dir)?;
    write_csv(
        &out_dir.join("trainer.csv"),
        &csv_header_comment("trainer", config),
        &bench.traces,
    )?;
    write_csv(
        &out_dir.join("trainer_summary.csv"),
        &csv_header_comment("trainer_summary", config),
        &bench.summary,
    )?;
    Ok(bench)
}
