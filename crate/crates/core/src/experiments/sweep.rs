use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{ExperimentKind, ResolvedSetup, SweepPlan};
use super::trial::{run_trial, SweepContext, TrialOutcome};
use crate::error::{Error, Result};

/// Environment variable holding the worker count of a sweep.
pub const WORKERS_ENV: &str = "MWC_WORKERS";

/// One line of the success-rate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub experiment_id: String,
    pub m: usize,
    /// SNR in dB, `inf` for noiseless runs.
    pub snr_db: String,
    /// Bit depth, `none` when samples are not quantized.
    pub bits: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Simulated observation window.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedTrial {
    pub experiment_id: String,
    pub m: usize,
    pub snr_db: String,
    pub bits: String,
    pub trial: usize,
    pub seed: u64,
}

/// Run metadata written next to the table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub plan: SweepPlan,
    pub setup: ResolvedSetup,
    pub workers: usize,
    pub wall_seconds: f64,
    /// Seed of every trial, by trial index.
    pub trial_seeds: Vec<u64>,
    pub failures: Vec<FailedTrial>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<CsvRow>,
    pub trials: Vec<TrialOutcome>,
    pub manifest: Manifest,
}

impl SweepResult {
    /// Success rate of the row with this id and channel count, first match.
    pub fn rate(&self, experiment_id: &str, m: usize, snr_db: Option<f64>) -> Option<f64> {
        let snr = snr_label(snr_db);
        self.rows.iter().find(|r| r.experiment_id == experiment_id && r.m == m && r.snr_db == snr).map(|r| r.success_rate)
    }
}

pub fn snr_label(snr_db: Option<f64>) -> String {
    snr_db.map_or_else(|| "inf".to_string(), |s| format!("{s}"))
}

pub fn bits_label(bits: Option<u32>) -> String {
    bits.map_or_else(|| "none".to_string(), |b| b.to_string())
}

/// Worker count from `MWC_WORKERS`, else the available parallelism.
pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::InvalidArgument(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs every trial of `plan`; rows come out in plan order regardless of
/// the worker count.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    run_sweep_with_workers(plan, worker_count()?)
}

pub fn run_sweep_with_workers(plan: &SweepPlan, workers: usize) -> Result<SweepResult> {
    if plan.experiment_id == ExperimentKind::Timevary {
        return Err(Error::InvalidArgument("the time-varying experiment streams; run it with `stream`".into()));
    }
    let started = Instant::now();
    let ctx = SweepContext::new(plan)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let trials: Vec<TrialOutcome> =
        pool.install(|| (0..plan.trials).into_par_iter().map(|t| run_trial(&ctx, ctx.trial_seed(t))).collect::<Result<_>>())?;

    let cells = ctx.cells();
    let mut rows = Vec::with_capacity(cells.len());
    let mut failures = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        let id = ctx.variants[cell.variant].id.clone();
        let (snr_db, bits) = (snr_label(cell.snr_db), bits_label(cell.bits));
        let mut successes = 0;
        for (t, outcome) in trials.iter().enumerate() {
            if outcome.cells[c].success {
                successes += 1;
            } else {
                failures.push(FailedTrial {
                    experiment_id: id.clone(),
                    m: cell.m,
                    snr_db: snr_db.clone(),
                    bits: bits.clone(),
                    trial: t,
                    seed: outcome.seed,
                });
            }
        }
        rows.push(CsvRow {
            experiment_id: id,
            m: cell.m,
            snr_db,
            bits,
            trials: plan.trials,
            successes,
            success_rate: successes as f64 / plan.trials as f64,
            seconds: ctx.setup.window,
        });
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        plan: plan.clone(),
        setup: ctx.setup.clone(),
        workers,
        wall_seconds: started.elapsed().as_secs_f64(),
        trial_seeds: trials.iter().map(|t| t.seed).collect(),
        failures,
    };
    Ok(SweepResult { rows, trials, manifest })
}

/// Reruns one trial from its seed.
pub fn replay_trial(plan: &SweepPlan, seed: u64) -> Result<(SweepContext, TrialOutcome)> {
    let ctx = SweepContext::new(plan)?;
    let outcome = run_trial(&ctx, crate::seed::SeedTree::new(seed))?;
    Ok((ctx, outcome))
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Error::from)).collect()
}
