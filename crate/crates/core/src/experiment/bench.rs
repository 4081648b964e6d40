//! HHO on the classic test functions.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_header_comment, thread_pool, write_csv, ExperimentConfig};
use crate::error::Result;
use crate::hho::benchmarks::TestFunction;
use crate::hho::{optimize, HhoParams, SearchSpace};
use crate::seed::derive;

const BENCH_STREAM: u64 = 0x6265_6e63_68;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub function: TestFunction,
    pub dim: usize,
    pub run: usize,
    pub seed: u64,
    /// Best `−f` found; 0 is the global optimum.
    pub best_fitness: f64,
    pub evaluations: u64,
}

pub const BENCH_COLUMNS: &str = "function,dim,run,seed,best_fitness,evaluations";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub functions: Vec<TestFunction>,
    pub dim: usize,
    pub runs: usize,
    pub params: HhoParams,
}

pub fn bench_seed(config: &ExperimentConfig, run: usize) -> u64 {
    derive(derive(config.master_seed, BENCH_STREAM), run as u64)
}

/// Maximizes `−f` over `[−b, b]^dim` for every function and run and writes
/// the rows to `path`.
pub fn run_function_benchmark(config: &ExperimentConfig, plan: &BenchPlan, path: &Path) -> Result<Vec<BenchRow>> {
    let jobs: Vec<(TestFunction, usize)> = plan
        .functions
        .iter()
        .flat_map(|&f| (0..plan.runs).map(move |r| (f, r)))
        .collect();
    let pool = thread_pool(config.parallel)?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(f, run)| {
                let space = SearchSpace::uniform(plan.dim, -f.bound(), f.bound())?;
                let seed = bench_seed(config, run);
                let out = optimize(&space, &|x: &[f64]| f.fitness(x), &plan.params, seed)?;
                Ok(BenchRow {
                    function: f,
                    dim: plan.dim,
                    run,
                    seed,
                    best_fitness: out.best_fitness,
                    evaluations: out.evaluations,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let comment = format!(
        "{} dim={} runs={}",
        csv_header_comment("bench_functions", config),
        plan.dim,
        plan.runs
    );
    write_csv(path, &comment, &rows)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_per_function_and_run() {
        let dir = tempfile::tempdir().unwrap();
        let plan = BenchPlan {
            functions: vec![TestFunction::Sphere, TestFunction::Ackley],
            dim: 4,
            runs: 3,
            params: HhoParams::new(10, 50),
        };
        let rows = run_function_benchmark(&ExperimentConfig::default(), &plan, &dir.path().join("b.csv")).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.best_fitness <= 0.0 && r.best_fitness > -1.0));
        let text = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), BENCH_COLUMNS);
    }
}
