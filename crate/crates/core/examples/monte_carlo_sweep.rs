//! A small success-rate table over channel counts and noise levels, written
//! as CSV to stdout. The full grid is the default of `SweepPlan::new`.

use mwc_lab::experiments::{run_sweep, write_csv, ExperimentKind, SweepPlan};

fn main() -> mwc_lab::Result<()> {
    let mut plan = SweepPlan::new(ExperimentKind::Fig7, 10, 1);
    plan.channel_grid = vec![10, 20, 30, 40];
    plan.snr_grid = vec![Some(25.0), Some(10.0)];
    let result = run_sweep(&plan)?;
    write_csv(&result.rows, std::io::stdout())?;
    eprintln!("{} failed trials; wall time {:.1} s", result.manifest.failures.len(), result.manifest.wall_seconds);
    if let Some(f) = result.manifest.failures.first() {
        eprintln!("replay one with: mwc replay {} --plan <plan.json>", f.seed);
    }
    Ok(())
}
