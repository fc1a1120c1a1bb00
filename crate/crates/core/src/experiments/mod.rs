//! Monte-Carlo harness: sweep plans, per-trial pipelines, aggregation into
//! success-rate tables and the streaming replay with a changing support.

mod plan;
mod report;
mod sweep;
mod timevary;
mod trial;

pub use plan::{ExperimentKind, ResolvedSetup, Setup, SignalKind, SuccessRule, SweepPlan};
pub use report::{params_report, ParamsReport};
pub use sweep::{
    bits_label, read_csv, replay_trial, run_sweep, run_sweep_with_workers, snr_label, worker_count, write_csv, CsvRow,
    FailedTrial, Manifest, SweepResult, WORKERS_ENV,
};
pub use timevary::{run_timevary, TimevaryResult, TraceRow};
pub use trial::{draw_signal, run_trial, Cell, CellOutcome, SweepContext, TrialOutcome, TrialSignal, Variant};
