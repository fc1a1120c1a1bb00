//! Support recovery from coarsely quantized samples: QPSK transmissions,
//! noiseless, at several bit depths.

use mwc_lab::experiments::{run_sweep, ExperimentKind, SweepPlan};

fn main() -> mwc_lab::Result<()> {
    let mut plan = SweepPlan::new(ExperimentKind::Fig11, 10, 4);
    plan.channel_grid = vec![40];
    plan.snr_grid = vec![None];
    plan.bits_grid = vec![Some(1), Some(2), Some(4), Some(8), None];
    let result = run_sweep(&plan)?;
    for row in &result.rows {
        println!("bits {:>4}: {}/{} recovered", row.bits, row.successes, row.trials);
    }
    Ok(())
}
