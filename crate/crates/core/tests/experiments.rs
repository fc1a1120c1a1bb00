use std::process::{Command, Output};

use mwc_lab::experiments::{
    read_csv, replay_trial, run_sweep, run_sweep_with_workers, run_timevary, write_csv, ExperimentKind, SweepPlan,
};

fn mwc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwc")).args(args).output().expect("binary runs")
}

fn field(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in report:\n{report}"))
        .to_string()
}

#[test]
fn params_reports_the_wideband_design() {
    let out = mwc(&["params"]);
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();
    assert_eq!(field(&report, "L"), "195");
    assert_eq!(field(&report, "M_min"), "195");
    let rate: f64 = field(&report, "min_total_rate").trim_end_matches(" MHz").parse().unwrap();
    assert!((rate - 615.0).abs() < 1.0, "{rate}");
}

#[test]
fn params_refuses_sampling_below_mixing_rate() {
    let out = mwc(&["params", "--sampling-rate", "40e6"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("condition.fs_ge_fp"), "{err}");
}

fn small_plan(kind: ExperimentKind, trials: usize, seed: u64) -> SweepPlan {
    let mut plan = SweepPlan::new(kind, trials, seed);
    plan.channel_grid = vec![30, 40];
    plan.snr_grid = vec![Some(25.0), Some(10.0)];
    plan
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let plan_path = dir.path().join("plan.json");
    std::fs::write(&plan_path, small_plan(ExperimentKind::Fig7, 5, 3).to_json()).unwrap();
    let out_dir = dir.path().join("out");
    let out = mwc(&["sweep", plan_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.lines().next().unwrap(), "experiment_id,m,snr_db,bits,trials,successes,success_rate,seconds");
    let rows = read_csv(text.as_bytes()).unwrap();
    assert!(rows.iter().all(|r| r.trials == 5 && r.successes <= 5));
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn malformed_plan_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let plan_path = dir.path().join("plan.json");
    std::fs::write(&plan_path, "{\"experiment_id\": \"fig7\", \"trials\":").unwrap();
    let out = mwc(&["sweep", plan_path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("input.malformed"));
    assert_eq!(mwc(&["sweep", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn recorded_seeds_replay_their_outcome() {
    let plan = small_plan(ExperimentKind::Fig7, 6, 21);
    let result = run_sweep(&plan).unwrap();
    assert_eq!(result.manifest.trial_seeds.len(), 6);
    for outcome in &result.trials {
        let (_, again) = replay_trial(&plan, outcome.seed).unwrap();
        assert_eq!(&again, outcome);
    }
    for failure in &result.manifest.failures {
        assert_eq!(result.manifest.trial_seeds[failure.trial], failure.seed);
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let plan = small_plan(ExperimentKind::Fig7, 8, 5);
    let csv = |workers| {
        let mut bytes = Vec::new();
        write_csv(&run_sweep_with_workers(&plan, workers).unwrap().rows, &mut bytes).unwrap();
        bytes
    };
    assert_eq!(csv(1), csv(4));
}

/// Shared-register signs with 20 registers against independent signs, 50
/// trials per cell at m = 100.
#[test]
fn shared_registers_match_independent_signs() {
    let mut plan = SweepPlan::new(ExperimentKind::Fig8, 50, 8);
    plan.channel_grid = vec![40, 50];
    plan.snr_grid = vec![Some(25.0), Some(10.0)];
    let result = run_sweep(&plan).unwrap();
    // One register per channel is the independent design.
    let (independent, shared) = ("fig8_r100", "fig8_r20");
    for &m in &plan.channel_grid {
        for &snr in &plan.snr_grid {
            let a = result.rate(independent, m, snr).unwrap();
            let b = result.rate(shared, m, snr).unwrap();
            assert!((a - b).abs() <= 0.05 + 1e-12, "m = {m}, snr = {snr:?}: {a} vs {b}");
        }
    }
}

#[test]
fn noise_floor_follows_the_snr() {
    let floor = |snr: f64| {
        let mut plan = SweepPlan::new(ExperimentKind::Timevary, 1, 4);
        plan.snr_grid = vec![Some(snr)];
        run_timevary(&plan).unwrap().noise_floor().unwrap()
    };
    let (at30, at40) = (floor(30.0), floor(40.0));
    assert!((1e-5..=1e-2).contains(&at30), "{at30}");
    let ratio = at30 / at40;
    assert!((5.0..=20.0).contains(&ratio), "floor {at30:.2e} at 30 dB, {at40:.2e} at 40 dB");
}
