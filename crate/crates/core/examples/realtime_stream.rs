//! Streaming recovery while the occupied bands change: the sentinel slice
//! triggers a new support search and outputs recovered in the meantime are
//! flagged.

use mwc_lab::experiments::{run_timevary, ExperimentKind, SweepPlan};

fn main() -> mwc_lab::Result<()> {
    let mut plan = SweepPlan::new(ExperimentKind::Timevary, 1, 3);
    plan.snr_grid = vec![Some(30.0)];
    plan.setup.epochs = Some(3);
    let result = run_timevary(&plan)?;

    println!("support changes at samples {:?}", result.boundaries);
    for event in &result.events {
        println!("step {:>5}  {:<10} {:?}", event.step, format!("{:?}", event.event), event.support.offsets(result.params.l_zero));
    }
    for (start, len) in result.invalid_runs() {
        println!("invalid outputs: {len} starting at sample {start}");
    }
    println!("noise floor {:.2e}", result.noise_floor().unwrap_or(f64::NAN));
    result.write_trace(std::io::sink())?;
    Ok(())
}
