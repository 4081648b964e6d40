//! Best-so-far traces of the joint planner for several user counts.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_header_comment, thread_pool, write_csv, ExperimentConfig};
use crate::error::Result;
use crate::hho::HhoState;
use crate::planner::{decision_space, split_decision, Problem, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_users: usize,
    pub run: usize,
    /// 1-based.
    pub iteration: usize,
    /// Penalized objective of the prey, bit/s/Hz.
    pub best_fitness: f64,
    /// Sum rate of the prey.
    pub sum_rate_bps: f64,
    pub feasible: bool,
}

pub const CONVERGENCE_COLUMNS: &str = "n_users,run,iteration,best_fitness,sum_rate_bps,feasible";

fn trace_one(config: &ExperimentConfig, n_users: usize, run: usize) -> Result<Vec<ConvergenceRow>> {
    let scenario = config.scenario_with_users(run, n_users);
    let problem = Problem::with_default_penalty(&scenario, Scheme::Hhopap)?;
    let seed = config.solver_seed(run, Scheme::Hhopap);
    let f = |x: &[f64]| {
        let (p, w) = split_decision(x);
        problem.score(p, w)
    };
    let mut state = HhoState::new(decision_space(&scenario)?, config.hho_params(), seed, &f)?;
    let mut rows = Vec::with_capacity(config.iterations);
    while state.step(&f) {
        let prey = state.prey();
        let (p, w) = split_decision(&prey.position);
        let sol = problem.solution(p, w.to_vec(), seed);
        rows.push(ConvergenceRow {
            n_users,
            run,
            iteration: state.iteration(),
            best_fitness: prey.fitness.value(),
            sum_rate_bps: sol.sum_rate_bps,
            feasible: sol.feasible,
        });
    }
    Ok(rows)
}

/// Runs `convergence_runs` realizations for every entry of
/// `convergence_users` and writes the traces to `path`.
pub fn run_convergence(config: &ExperimentConfig, path: &Path) -> Result<Vec<ConvergenceRow>> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = config
        .convergence_users
        .iter()
        .flat_map(|&n| (0..config.convergence_runs).map(move |r| (n, r)))
        .collect();
    let pool = thread_pool(config.parallel)?;
    let traces: Vec<Vec<ConvergenceRow>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(n, r)| trace_one(config, n, r))
            .collect::<Result<_>>()
    })?;
    let rows: Vec<ConvergenceRow> = traces.into_iter().flatten().collect();
    write_csv(path, &csv_header_comment("convergence", config), &rows)?;
    Ok(rows)
}

/// Final sum rate averaged over runs, per user count.
pub fn converged_means(rows: &[ConvergenceRow]) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64, usize)> = Vec::new();
    let last = rows.iter().map(|r| r.iteration).max().unwrap_or(0);
    for r in rows.iter().filter(|r| r.iteration == last) {
        match out.iter_mut().find(|o| o.0 == r.n_users) {
            Some(o) => {
                o.1 += r.sum_rate_bps;
                o.2 += 1;
            }
            None => out.push((r.n_users, r.sum_rate_bps, 1)),
        }
    }
    out.into_iter().map(|(n, s, k)| (n, s / k as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_per_iteration_and_monotone() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            population: 8,
            iterations: 25,
            convergence_users: vec![3, 5],
            convergence_runs: 2,
            ..ExperimentConfig::default()
        };
        let rows = run_convergence(&cfg, &dir.path().join("c.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), CONVERGENCE_COLUMNS);
        assert_eq!(rows.len(), 2 * 2 * 25);
        for t in rows.chunks(25) {
            assert_eq!(t[0].iteration, 1);
            assert!(t.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness));
        }
        assert_eq!(converged_means(&rows).len(), 2);
    }
}
