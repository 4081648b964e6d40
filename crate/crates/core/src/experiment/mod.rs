//! Scenario generation, parameter sweeps, convergence runs and trainer
//! benchmarks, persisted as CSV.

pub mod bench;
pub mod config;
pub mod convergence;
pub mod sweep;
pub mod trainer;

pub use bench::{run_function_benchmark, BenchPlan, BenchRow};
pub use config::{dbm_to_watts, ExperimentConfig, SweepParameter, UserSquare};
pub use convergence::{run_convergence, ConvergenceRow};
pub use sweep::{load_sweep, run_sweep, solve_with, SweepPoint, SweepResult, SweepRow};
pub use trainer::{run_trainer_benchmark, TrainerBenchmark, TrainerSummaryRow, TrainerTraceRow};

use crate::error::{Error, Result};

/// Version of every CSV layout written by this crate.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// FNV-1a over the configuration with run-shape knobs (thread count, timing,
/// realization count, scheme list) reset, so that a file can only be resumed
/// by a run that would have produced the same rows.
pub fn config_fingerprint(config: &ExperimentConfig) -> Result<u64> {
    let base = ExperimentConfig::default();
    let mut c = config.clone();
    c.parallel = base.parallel;
    c.record_timing = base.record_timing;
    c.realizations = base.realizations;
    c.schemes = base.schemes;
    let text = c.to_toml_string()?;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    Ok(h)
}

/// First line of every CSV written by the experiment runners.
pub fn csv_header_comment(kind: &str, config: &ExperimentConfig) -> String {
    let fp = config_fingerprint(config)
        .map(|h| format!("{h:016x}"))
        .unwrap_or_default();
    format!(
        "# hawkvlc {} {kind} schema={CSV_SCHEMA_VERSION} master_seed={} config={fp}",
        env!("CARGO_PKG_VERSION"),
        config.master_seed
    )
}

/// Worker pool with `threads` workers, or one per core when 0.
pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))
}

/// Writes `rows` to `path` behind the header comment.
pub(crate) fn write_csv<T: serde::Serialize>(path: &std::path::Path, comment: &str, rows: &[T]) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{comment}")?;
    let mut w = csv::Writer::from_writer(f);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
