//! Parameter sweeps over every (value, scheme, realization) triple.
//!
//! Rows are appended in batches, each batch in sorted order, so an
//! interrupted run leaves a sorted prefix that a rerun completes.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{csv_header_comment, thread_pool, write_csv, ExperimentConfig};
use crate::baselines::{grpa_solve, ofdma_solve, randp_solve};
use crate::error::{Error, Result};
use crate::planner::{self, Scheme, Solution};
use crate::vlc::{Placement, Scenario};

/// One solved (value, scheme, realization) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub scheme: Scheme,
    pub realization: usize,
    pub seed: u64,
    pub sum_rate_bps: f64,
    pub feasible: bool,
    /// Empty unless timing is enabled, which keeps files reproducible.
    pub wall_time_s: Option<f64>,
    pub x_u_m: f64,
    pub y_u_m: f64,
    /// Per-user powers in watts, `;`-separated, by user id.
    pub powers_w: String,
}

impl SweepRow {
    pub fn powers(&self) -> Result<Vec<f64>> {
        self.powers_w
            .split(';')
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|e| Error::invalid(format!("bad power {p:?}: {e}")))
            })
            .collect()
    }

    pub fn placement(&self) -> Placement {
        Placement::new(self.x_u_m, self.y_u_m)
    }
}

pub const SWEEP_COLUMNS: &str =
    "parameter,value,scheme,realization,seed,sum_rate_bps,feasible,wall_time_s,x_u_m,y_u_m,powers_w";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Mean over realizations at one (value, scheme).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub scheme: Scheme,
    pub realizations: usize,
    pub mean_sum_rate_bps: f64,
    pub feasible_fraction: f64,
}

impl SweepResult {
    /// Points ordered by value then scheme, in first-appearance order.
    pub fn summary(&self) -> Vec<SweepPoint> {
        let mut points: Vec<(f64, Scheme, Vec<&SweepRow>)> = Vec::new();
        for row in &self.rows {
            match points.iter_mut().find(|(v, s, _)| *v == row.value && *s == row.scheme) {
                Some(p) => p.2.push(row),
                None => points.push((row.value, row.scheme, vec![row])),
            }
        }
        points
            .into_iter()
            .map(|(value, scheme, rows)| {
                let n = rows.len() as f64;
                SweepPoint {
                    value,
                    scheme,
                    realizations: rows.len(),
                    mean_sum_rate_bps: rows.iter().map(|r| r.sum_rate_bps).sum::<f64>() / n,
                    feasible_fraction: rows.iter().filter(|r| r.feasible).count() as f64 / n,
                }
            })
            .collect()
    }

    /// Mean sum rate of `scheme` at each grid value.
    pub fn curve(&self, scheme: Scheme) -> Vec<(f64, f64)> {
        self.summary()
            .into_iter()
            .filter(|p| p.scheme == scheme)
            .map(|p| (p.value, p.mean_sum_rate_bps))
            .collect()
    }

    /// Rows reported feasible that fail an independent recheck.
    pub fn failed_reverification(&self, config: &ExperimentConfig) -> Result<Vec<&SweepRow>> {
        let mut bad = Vec::new();
        for row in self.rows.iter().filter(|r| r.feasible) {
            let cfg = config.with_parameter(config.sweep_parameter, row.value)?;
            let scenario = cfg.generate_scenario(row.realization);
            if !planner::reverify(row.scheme, row.placement(), &row.powers()?, &scenario) {
                bad.push(row);
            }
        }
        Ok(bad)
    }
}

/// Solves `scenario` with `scheme`, using the configured GRPA factor.
pub fn solve_with(config: &ExperimentConfig, scheme: Scheme, scenario: &Scenario, seed: u64) -> Result<Solution> {
    let params = config.hho_params();
    match scheme {
        Scheme::Hhopap => planner::solve(scenario, &params, seed),
        Scheme::Grpa => grpa_solve(scenario, &params, config.grpa_alpha, seed),
        Scheme::RandP => randp_solve(scenario, &params, seed),
        Scheme::Ofdma => ofdma_solve(scenario, &params, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Key {
    value_idx: usize,
    scheme_idx: usize,
    realization: usize,
}

fn format_powers(p: &[f64]) -> String {
    p.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(";")
}

fn solve_row(config: &ExperimentConfig, grid: &[f64], schemes: &[Scheme], key: Key) -> Result<SweepRow> {
    let value = grid[key.value_idx];
    let scheme = schemes[key.scheme_idx];
    let cfg = config.with_parameter(config.sweep_parameter, value)?;
    let scenario = cfg.generate_scenario(key.realization);
    let seed = cfg.solver_seed(key.realization, scheme);
    let started = Instant::now();
    let sol = solve_with(&cfg, scheme, &scenario, seed)?;
    let elapsed = started.elapsed().as_secs_f64();
    Ok(SweepRow {
        parameter: config.sweep_parameter.name().to_string(),
        value,
        scheme,
        realization: key.realization,
        seed,
        sum_rate_bps: sol.sum_rate_bps,
        feasible: sol.feasible,
        wall_time_s: config.record_timing.then_some(elapsed),
        x_u_m: sol.placement.x,
        y_u_m: sol.placement.y,
        powers_w: format_powers(sol.powers.watts()),
    })
}

fn read_rows(path: &Path, comment: &str) -> Result<Vec<SweepRow>> {
    let mut text = std::fs::read_to_string(path)?;
    // a torn final line from an interrupted write is dropped and recomputed
    if !text.ends_with('\n') {
        text.truncate(text.rfind('\n').map_or(0, |i| i + 1));
    }
    let first = text.lines().next().unwrap_or("");
    if first != comment {
        return Err(Error::Config(format!(
            "{} was written by a different configuration ({first}); remove it or choose another output directory",
            path.display()
        )));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    Ok(rdr.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?)
}

fn write_all(path: &Path, comment: &str, rows: &[SweepRow]) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut f = File::create(&tmp)?;
        writeln!(f, "{comment}")?;
        let mut w = csv::Writer::from_writer(f);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs the configured sweep, resuming from `path` if it holds a partial run
/// of the same configuration.
pub fn run_sweep(config: &ExperimentConfig, path: &Path) -> Result<SweepResult> {
    config.validate()?;
    let grid = config.sweep_grid();
    let schemes = config.schemes.clone();
    let comment = csv_header_comment("sweep", config);

    let mut done: Vec<SweepRow> = if path.exists() {
        read_rows(path, &comment)?
    } else {
        Vec::new()
    };
    let key_of = |r: &SweepRow| -> Option<Key> {
        Some(Key {
            value_idx: grid.iter().position(|&v| v == r.value)?,
            scheme_idx: schemes.iter().position(|&s| s == r.scheme)?,
            realization: r.realization,
        })
    };
    done.retain(|r| key_of(r).is_some_and(|k| k.realization < config.realizations));
    let completed: HashSet<Key> = done.iter().filter_map(key_of).collect();
    // rewrite so the file holds exactly the kept rows before appending
    write_all(path, &comment, &done)?;

    let mut todo = Vec::new();
    for value_idx in 0..grid.len() {
        for scheme_idx in 0..schemes.len() {
            for realization in 0..config.realizations {
                let k = Key {
                    value_idx,
                    scheme_idx,
                    realization,
                };
                if !completed.contains(&k) {
                    todo.push(k);
                }
            }
        }
    }

    let pool = thread_pool(config.parallel)?;
    let batch = (pool.current_num_threads() * 4).max(1);
    let file = OpenOptions::new().append(true).open(path)?;
    let mut writer = csv::WriterBuilder::new().has_headers(done.is_empty()).from_writer(file);
    for chunk in todo.chunks(batch) {
        let rows: Vec<SweepRow> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&k| solve_row(config, &grid, &schemes, k))
                .collect::<Result<_>>()
        })?;
        for r in &rows {
            writer.serialize(r)?;
        }
        writer.flush()?;
        done.extend(rows);
    }
    drop(writer);

    let sorted_before = done.windows(2).all(|w| key_of(&w[0]) <= key_of(&w[1]));
    if !sorted_before {
        done.sort_by_key(|r| key_of(r));
        write_all(path, &comment, &done)?;
    }
    Ok(SweepResult { rows: done })
}

/// Writes [`SweepResult::summary`] points behind the header comment.
pub fn write_summary(config: &ExperimentConfig, path: &Path, summary: &[SweepPoint]) -> Result<()> {
    write_csv(path, &csv_header_comment("sweep_summary", config), summary)
}

/// Reads a completed sweep file back.
pub fn load_sweep(path: &Path) -> Result<SweepResult> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?;
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_users: 3,
            population: 6,
            iterations: 8,
            realizations: 2,
            sweep_values: vec![20.0, 60.0],
            parallel: 2,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn cardinality_and_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let cfg = small();
        let res = run_sweep(&cfg, &path).unwrap();
        assert_eq!(res.rows.len(), 2 * 4 * 2);
        assert_eq!(res.rows[0].scheme, Scheme::Hhopap);
        assert_eq!(res.rows[1].realization, 1);
        assert_eq!(res.rows.last().unwrap().value, 60.0);
        assert_eq!(load_sweep(&path).unwrap(), res);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), SWEEP_COLUMNS);
        assert!(res.failed_reverification(&cfg).unwrap().is_empty());
        assert_eq!(res.summary().len(), 8);
    }

    #[test]
    fn resume_matches_fresh_run() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small();
        let fresh = dir.path().join("fresh.csv");
        run_sweep(&cfg, &fresh).unwrap();
        let want = std::fs::read(&fresh).unwrap();

        // keep the header comment, column row and five data rows, and tear the sixth
        let text = String::from_utf8(want.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let mut partial = lines[..7].join("\n");
        partial.push('\n');
        partial.push_str(&lines[7][..10]);
        let resumed = dir.path().join("resumed.csv");
        std::fs::write(&resumed, partial).unwrap();
        run_sweep(&cfg, &resumed).unwrap();
        assert_eq!(std::fs::read(&resumed).unwrap(), want);
    }

    #[test]
    fn refuses_foreign_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let mut cfg = small();
        cfg.realizations = 1;
        run_sweep(&cfg, &path).unwrap();
        cfg.master_seed += 1;
        assert!(matches!(run_sweep(&cfg, &path), Err(Error::Config(_))));
    }

    #[test]
    fn parallelism_does_not_change_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small();
        let a = dir.path().join("a.csv");
        run_sweep(&cfg, &a).unwrap();
        cfg.parallel = 1;
        let b = dir.path().join("b.csv");
        run_sweep(&cfg, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}
