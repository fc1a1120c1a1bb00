use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use mwc_lab::experiments::{
    params_report, replay_trial, run_sweep, run_timevary, write_csv, ExperimentKind, SweepContext, SweepPlan,
};
use mwc_lab::expander::virtual_rows;
use mwc_lab::frontend::{build_sensing_matrix, derive_params, MwcConfig, SignalClass};
use mwc_lab::io::{load_config, save_config, save_matrix, save_row_map, save_signs, RowMap};
use mwc_lab::Error;

#[derive(Parser)]
#[command(name = "mwc", version, about = "Modulated wideband converter lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct ClassArgs {
    /// Number of bands N (counting mirrors).
    #[arg(long, default_value_t = 6)]
    bands: usize,
    /// Largest band width B in Hz.
    #[arg(long, default_value_t = 50e6)]
    band_width: f64,
    /// Nyquist rate in Hz.
    #[arg(long, default_value_t = 10e9)]
    nyquist: f64,
}

impl ClassArgs {
    fn class(self) -> SignalClass {
        SignalClass { n_bands: self.bands, band_width: self.band_width, nyquist_rate: self.nyquist }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Derived design parameters for a signal class and front-end rates.
    Params {
        #[command(flatten)]
        class: ClassArgs,
        /// Sign alternations per period M.
        #[arg(long, default_value_t = 195)]
        alternations: usize,
        /// Mixing rate f_p in Hz; defaults to f_NYQ / M.
        #[arg(long)]
        mixing_rate: Option<f64>,
        /// Sampling rate f_s in Hz; defaults to q f_p.
        #[arg(long)]
        sampling_rate: Option<f64>,
        /// Ratio q = f_s / f_p, used when no sampling rate is given.
        #[arg(long, default_value_t = 1)]
        rate_ratio: usize,
        /// Print JSON instead of the line report.
        #[arg(long)]
        json: bool,
        /// Also write params.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo sweep over a plan's grid.
    Sweep {
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-runs a single trial of a plan from its seed.
    Replay {
        seed: u64,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Streaming recovery with a support that changes over time.
    Stream {
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Writes the sign grid, configuration and sensing matrix of a setup.
    DumpMatrix {
        /// Take the setup (first variant) from a plan file.
        #[arg(long, conflicts_with = "config")]
        plan: Option<PathBuf>,
        /// Take the setup from a configuration document.
        #[arg(long, required_unless_present = "plan")]
        config: Option<PathBuf>,
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "usage", "message": e.to_string().trim() }));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.code(), "message": e.to_string() }));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Parse(_) | Error::Json(_) | Error::Csv(_) => 4,
        _ => 3,
    }
}

fn out_dir(dir: &Path) -> mwc_lab::Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> mwc_lab::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn run(command: Command) -> mwc_lab::Result<()> {
    match command {
        Command::Params { class, alternations, mixing_rate, sampling_rate, rate_ratio, json, out } => {
            let fp = mixing_rate.unwrap_or(class.nyquist / alternations as f64);
            let fs = sampling_rate.unwrap_or(fp * rate_ratio as f64);
            let report = params_report(&class.class(), fp, fs, alternations)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("{report}");
            }
            if let Some(dir) = out {
                out_dir(&dir)?;
                write_json(&dir.join("params.json"), &report)?;
            }
        }
        Command::Sweep { plan, out } => {
            let plan = SweepPlan::load(&plan)?;
            let result = run_sweep(&plan)?;
            out_dir(&out)?;
            write_csv(&result.rows, fs::File::create(out.join("results.csv"))?)?;
            write_json(&out.join("manifest.json"), &result.manifest)?;
            eprintln!("{} rows written to {}", result.rows.len(), out.join("results.csv").display());
        }
        Command::Replay { seed, plan, out } => {
            let plan = SweepPlan::load(&plan)?;
            if plan.experiment_id == ExperimentKind::Timevary {
                return Err(Error::InvalidArgument("timevary runs are replayed with `stream`".into()));
            }
            let (ctx, outcome) = replay_trial(&plan, seed)?;
            let cells: Vec<_> = outcome
                .cells
                .iter()
                .map(|c| {
                    json!({
                        "experiment_id": ctx.variants[c.cell.variant].id,
                        "m": c.cell.m,
                        "snr_db": c.cell.snr_db,
                        "bits": c.cell.bits,
                        "success": c.success,
                        "estimate": c.estimate,
                    })
                })
                .collect();
            let report = json!({ "seed": seed, "truth": outcome.truth, "cells": cells });
            println!("{}", serde_json::to_string_pretty(&report)?);
            if let Some(dir) = out {
                out_dir(&dir)?;
                write_json(&dir.join(format!("replay_{seed}.json")), &report)?;
            }
        }
        Command::Stream { plan, out } => {
            let plan = SweepPlan::load(&plan)?;
            let result = run_timevary(&plan)?;
            out_dir(&out)?;
            result.write_events(fs::File::create(out.join("events.jsonl"))?)?;
            result.write_trace(fs::File::create(out.join("errors.csv"))?)?;
            let summary = json!({
                "boundaries": result.boundaries,
                "truths": result.truths,
                "acquired": result.acquired_supports(),
                "invalid_runs": result.invalid_runs(),
                "noise_floor": result.noise_floor(),
            });
            write_json(&out.join("summary.json"), &summary)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::DumpMatrix { plan, config, class, out } => {
            let (config, matrix, q) = match (plan, config) {
                (Some(plan), _) => {
                    let ctx = SweepContext::new(&SweepPlan::load(&plan)?)?;
                    let v = &ctx.variants[0];
                    (v.config.clone(), v.matrix.clone(), ctx.setup.rate_ratio)
                }
                (None, Some(path)) => {
                    let config: MwcConfig = load_config(&path)?;
                    let params = derive_params(&class.class(), config.mixing_rate, config.sampling_rate)?;
                    let a = build_sensing_matrix(&config, &params)?;
                    let q = config.rate_ratio;
                    let matrix = if q > 1 { mwc_lab::expander::expanded_row_coeffs(&a, q) } else { a.a };
                    (config, matrix, q)
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            out_dir(&out)?;
            save_signs(&config.sign_matrix, &out.join("signs.txt"))?;
            save_config(&config, &out.join("config.json"))?;
            save_matrix(&matrix, &out.join("matrix.bin"))?;
            if q > 1 {
                save_row_map(&RowMap { rate_ratio: q, rows: virtual_rows(config.n_channels, q) }, &out.join("rowmap.json"))?;
            }
            eprintln!("{} x {} matrix written to {}", matrix.nrows(), matrix.ncols(), out.join("matrix.bin").display());
        }
    }
    Ok(())
}
