use std::io::Write;

use serde::{Deserialize, Serialize};

use super::plan::{ExperimentKind, ResolvedSetup, SweepPlan};
use super::trial::draw_signal;
use crate::ctf::{SompOptions, SupportSet};
use crate::error::{Error, Result};
use crate::frontend::{
    build_sensing_matrix, derive_grid, derive_params, gen_sign_matrix, DerivedParams, FrontEnd, FrontEndOptions,
    MwcConfig, SignMode, SignalClass,
};
use crate::linalg::CVector;
use crate::realtime::{stream_step, Event, RealtimeConfig, StreamState, Validity};
use crate::reconstruct::{reference_slices, vector_error};
use crate::seed::SeedTree;
use crate::signal::{add_awgn, DenseSignal, TimeGrid};

/// Per-step record of a streaming run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub index: u64,
    /// `‖ẑ - z‖² / ‖z‖²`; empty before the first support or where `z = 0`.
    pub error: Option<f64>,
    pub validity: Validity,
}

#[derive(Debug, Clone)]
pub struct TimevaryResult {
    pub setup: ResolvedSetup,
    pub params: DerivedParams,
    pub trace: Vec<TraceRow>,
    pub events: Vec<Event>,
    /// Stream index of the first sample of every epoch after the first.
    pub boundaries: Vec<u64>,
    /// True support of every epoch.
    pub truths: Vec<SupportSet>,
}

impl TimevaryResult {
    /// Median error over samples reported valid.
    pub fn noise_floor(&self) -> Option<f64> {
        let mut v: Vec<f64> =
            self.trace.iter().filter(|r| r.validity == Validity::Valid).filter_map(|r| r.error).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(v[v.len() / 2])
    }

    /// Lengths of the runs of consecutive invalid steps that begin after
    /// start-up, in stream order.
    pub fn invalid_runs(&self) -> Vec<(u64, usize)> {
        let mut runs = Vec::new();
        let mut current: Option<(u64, usize)> = None;
        let mut seen_valid = false;
        for row in &self.trace {
            if row.validity == Validity::Invalid {
                current = Some(current.map_or((row.index, 1), |(s, n)| (s, n + 1)));
            } else {
                if let Some(run) = current.take() {
                    if seen_valid {
                        runs.push(run);
                    }
                }
                seen_valid |= row.validity == Validity::Valid;
            }
        }
        if let (Some(run), true) = (current, seen_valid) {
            runs.push(run);
        }
        runs
    }

    /// Runs of consecutive steps whose error exceeds `level`, as
    /// `(first index, length)`.
    pub fn error_runs(&self, level: f64) -> Vec<(u64, usize)> {
        let mut runs: Vec<(u64, usize)> = Vec::new();
        let mut prev: Option<u64> = None;
        for row in &self.trace {
            if row.error.is_some_and(|e| e > level) {
                match runs.last_mut() {
                    Some((_, n)) if prev == Some(row.index.wrapping_sub(1)) => *n += 1,
                    _ => runs.push((row.index, 1)),
                }
                prev = Some(row.index);
            }
        }
        runs
    }

    /// Support reported after each epoch event, in order.
    pub fn acquired_supports(&self) -> Vec<SupportSet> {
        self.events.iter().filter(|e| e.event == crate::realtime::EventKind::Epoch).map(|e| e.support.clone()).collect()
    }

    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.trace {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_events<W: Write>(&self, mut out: W) -> Result<()> {
        for event in &self.events {
            serde_json::to_writer(&mut out, event)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Streams a signal whose support is redrawn at every epoch through the
/// real-time recovery loop and scores each output against the noiseless
/// slices.
pub fn run_timevary(plan: &SweepPlan) -> Result<TimevaryResult> {
    plan.validate()?;
    if plan.experiment_id != ExperimentKind::Timevary {
        return Err(Error::InvalidArgument(format!("plan is for {}, not timevary", plan.experiment_id)));
    }
    let setup = plan.resolved();
    if setup.epochs == 0 || !(setup.epoch_duration > 0.0) {
        return Err(Error::InvalidArgument("need at least one epoch of positive duration".into()));
    }
    let class = SignalClass { n_bands: setup.n_bands, band_width: setup.band_width, nyquist_rate: setup.nyquist_rate };
    let params = derive_params(&class, setup.mixing_rate, setup.mixing_rate)?;
    let step = derive_grid(setup.nyquist_rate, setup.alternations, setup.mixing_rate, 1);
    let root = SeedTree::new(plan.seed);
    let signs = gen_sign_matrix(setup.channels, setup.alternations, &mut root.named("signs").rng(), SignMode::Independent)?;
    let config = MwcConfig::new(signs, setup.mixing_rate, 1)?;
    let frontend = FrontEnd::new(&config, step, FrontEndOptions { fir_periods: setup.fir_periods, ..Default::default() })?;
    let a = build_sensing_matrix(&config, &params)?;

    // Each epoch is synthesized on its own stretch of the grid, so content
    // switches abruptly at the boundaries.
    let epoch_samples = (setup.epoch_duration / step).round() as usize;
    let grid = TimeGrid { step, start: 0.0, len: epoch_samples * setup.epochs };
    let mut clean = DenseSignal::zeros(grid);
    let mut truths = Vec::with_capacity(setup.epochs);
    for e in 0..setup.epochs {
        let sub = TimeGrid { step, start: (e * epoch_samples) as f64 * step, len: epoch_samples };
        let drawn = draw_signal(&setup, &params, sub, root.named("epochs").child(e as u64))?;
        clean.accumulate(&drawn.signal)?;
        truths.push(drawn.truth);
    }
    let noisy = match plan.snr_grid[0] {
        Some(snr) => add_awgn(&clean, snr, &mut root.named("noise").rng())?,
        None => clean.clone(),
    };
    let y = frontend.sample(&noisy)?;

    let mut union: Vec<usize> = truths.iter().flat_map(|t| t.indices().iter().copied()).collect();
    union.sort_unstable();
    union.dedup();
    let offsets: Vec<i64> = union.iter().map(|&j| j as i64 - params.l_zero as i64).collect();
    let z_ref = reference_slices(&clean, &frontend, &offsets)?;
    let reference = |n: usize| {
        let mut z = CVector::zeros(a.n_slices());
        for (r, &j) in union.iter().enumerate() {
            z[j] = z_ref[(r, n)];
        }
        z
    };

    let mut rt = RealtimeConfig::new(setup.n_ctf, setup.n_mem, setup.max_pairs);
    rt.eigen_threshold = setup.eigen_threshold;
    rt.somp = SompOptions { residual_tol: setup.residual_tol, ..rt.somp };
    let mut state = StreamState::new(a.a.clone(), rt)?;
    let mut trace = Vec::with_capacity(y.len());
    let mut events = Vec::new();
    for n in 0..y.len() {
        let (emitted, ev) = stream_step(&mut state, y.vector(n));
        events.extend(ev);
        if let Some(out) = emitted {
            let error = out.z.as_ref().and_then(|z| vector_error(z, &reference(out.index as usize)));
            trace.push(TraceRow { index: out.index, error, validity: out.validity });
        }
    }

    let fs = config.sampling_rate;
    let boundaries = (1..setup.epochs)
        .map(|e| {
            let t = (e * epoch_samples) as f64 * step;
            ((t * fs).ceil() as i64 - y.first_index).max(0) as u64
        })
        .collect();
    Ok(TimevaryResult { setup, params, trace, events, boundaries, truths })
}
