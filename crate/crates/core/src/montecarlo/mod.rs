//! Replicated-trial simulation: coverage tables and Wald-type diagnostics.
//!
//! Replicate `r` of a scenario draws its observations from
//! `RngStream::new(seed, r)`, so a report depends only on the scenario and
//! never on thread count or scheduling. Per-replicate outcomes are collected
//! in replicate order and reduced sequentially.

mod diagnostics;
mod scenario;
mod tables;

pub use diagnostics::{
    fixed_sample_ks, fixed_sample_pivots, ks_statistic, wald_diagnostics, DiagnosticCheck,
    DiagnosticReport, KsResult,
};
pub use scenario::{
    simulate_scenario, LevelTally, PivotKind, PivotSummary, Scenario, ScenarioReport,
};
pub use tables::{reproduce_table, table_scenarios, TableId, TableReport};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Environment variable bounding the worker threads; `0` or unset means
/// rayon's default.
pub const THREADS_ENV: &str = "SEQCORRECT_THREADS";

fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse::<usize>().map_err(|_| {
            Error::param("SEQCORRECT_THREADS", format!("expected a non-negative integer, got {v:?}"))
        }),
        _ => Ok(0),
    }
}

/// Evaluate `f(0..reps)` in parallel, returning results in index order.
pub(crate) fn par_replicates<T, F>(reps: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let run = || (0..reps).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match threads_from_env()? {
        0 => run(),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::param("SEQCORRECT_THREADS", e.to_string()))?
            .install(run),
    }
}

/// Mean and standard error of the mean, summed in slice order.
pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

/// Binomial standard error `sqrt(p (1 - p) / R)`.
pub(crate) fn binomial_se(p: f64, reps: u64) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}
