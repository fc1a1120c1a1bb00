//! Streaming recovery: per-sample slice estimates from a cached
//! pseudo-inverse, a sentinel slice watching for support changes, and CTF
//! re-acquisition over a bounded window.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::ctf::{build_frame, somp_support_with, SompOptions, SupportSet, DEFAULT_EIGEN_THRESHOLD};
use crate::error::{Error, Result};
use crate::frontend::SampleStream;
use crate::linalg::{pinv, select_columns, CMatrix, CVector};
use crate::reconstruct::SliceRecovery;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealtimeConfig {
    /// Vectors collected for one CTF run.
    pub n_ctf: usize,
    /// Output delay line length; output lags the input by this many steps.
    pub n_mem: usize,
    pub run_length: usize,
    /// Threshold as a multiple of the running median sentinel magnitude.
    pub threshold_factor: f64,
    /// Lower bound on the threshold relative to the running median `‖y‖`.
    pub floor_rel: f64,
    pub median_window: usize,
    /// Sentinel values observed after an epoch starts before detection arms.
    pub warmup: usize,
    pub eigen_threshold: f64,
    pub somp: SompOptions,
}

impl RealtimeConfig {
    pub fn new(n_ctf: usize, n_mem: usize, max_pairs: usize) -> Self {
        RealtimeConfig {
            n_ctf,
            n_mem,
            run_length: 4,
            threshold_factor: 5.0,
            floor_rel: 1e-3,
            median_window: 64,
            warmup: 16,
            eigen_threshold: DEFAULT_EIGEN_THRESHOLD,
            somp: SompOptions::pairs(max_pairs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    Valid,
    /// Emitted from the previous support while a re-acquisition runs; the
    /// sample predates the detected change.
    Stale,
    /// Emitted from the previous support for a sample at or after the
    /// detected change.
    Invalid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    /// Index of the input vector this estimate belongs to.
    pub index: u64,
    /// Full slice vector, `None` before the first support is known.
    pub z: Option<CVector>,
    pub validity: Validity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Trigger,
    Epoch,
    CtfFailed,
    Stale,
    Invalid,
    Valid,
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub step: u64,
    pub event: EventKind,
    pub support: SupportSet,
}

#[derive(Debug, Clone)]
struct Epoch {
    recovery: SliceRecovery,
    sentinel: usize,
    sentinel_row: CVector,
}

#[derive(Debug, Clone)]
enum Mode {
    Tracking,
    /// Collecting CTF vectors; `started` is the index of the first one.
    Acquiring { started: u64, frame: Vec<CVector> },
}

#[derive(Debug, Clone)]
pub struct StreamState {
    config: RealtimeConfig,
    a: CMatrix,
    memory: VecDeque<(u64, CVector)>,
    mode: Mode,
    epoch: Option<Epoch>,
    epoch_counter: u64,
    sentinel_history: VecDeque<f64>,
    norm_history: VecDeque<f64>,
    crossings: VecDeque<f64>,
    since_epoch: usize,
    step: u64,
    last_validity: Option<Validity>,
}

impl StreamState {
    /// Starts in acquiring mode: the first `n_ctf` vectors form the first frame.
    pub fn new(a: CMatrix, config: RealtimeConfig) -> Result<Self> {
        if config.n_ctf == 0 || config.run_length == 0 || config.median_window == 0 {
            return Err(Error::InvalidArgument("n_ctf, run_length and median_window must be positive".into()));
        }
        Ok(StreamState {
            config,
            a,
            memory: VecDeque::with_capacity(config.n_mem + 1),
            mode: Mode::Acquiring { started: 0, frame: Vec::with_capacity(config.n_ctf) },
            epoch: None,
            epoch_counter: 0,
            sentinel_history: VecDeque::with_capacity(config.median_window),
            norm_history: VecDeque::with_capacity(config.median_window),
            crossings: VecDeque::with_capacity(config.run_length),
            since_epoch: 0,
            step: 0,
            last_validity: None,
        })
    }

    /// Starts tracking with a known support.
    pub fn with_support(a: CMatrix, config: RealtimeConfig, support: &SupportSet) -> Result<Self> {
        let mut state = Self::new(a, config)?;
        state.install(support)?;
        state.mode = Mode::Tracking;
        Ok(state)
    }

    pub fn current_support(&self) -> Option<&SupportSet> {
        self.epoch.as_ref().map(|e| &e.recovery.support)
    }

    pub fn sentinel_index(&self) -> Option<usize> {
        self.epoch.as_ref().map(|e| e.sentinel)
    }

    pub fn epoch_counter(&self) -> u64 {
        self.epoch_counter
    }

    pub fn is_acquiring(&self) -> bool {
        matches!(self.mode, Mode::Acquiring { .. })
    }

    pub fn memory_len(&self) -> usize {
        self.memory.len()
    }

    fn install(&mut self, support: &SupportSet) -> Result<()> {
        let recovery = SliceRecovery::new(&self.a, support)?;
        let outside: Vec<usize> = (0..self.a.ncols()).filter(|j| !support.contains(*j)).collect();
        let Some(&sentinel) = outside.get((self.epoch_counter as usize) % outside.len().max(1)) else {
            return Err(Error::InvalidArgument("support covers every slice; no sentinel available".into()));
        };
        let mut augmented = support.indices().to_vec();
        augmented.push(sentinel);
        let p = pinv(&select_columns(&self.a, &augmented));
        let sentinel_row = p.row(augmented.len() - 1).transpose();
        self.epoch = Some(Epoch { recovery, sentinel, sentinel_row });
        self.epoch_counter += 1;
        self.sentinel_history.clear();
        self.crossings.clear();
        self.since_epoch = 0;
        Ok(())
    }

    fn threshold(&self) -> f64 {
        let median_sentinel = median(&self.sentinel_history);
        let median_norm = median(&self.norm_history);
        (self.config.threshold_factor * median_sentinel).max(self.config.floor_rel * median_norm)
    }

    fn emit_validity(&self, index: u64) -> Validity {
        match &self.mode {
            Mode::Tracking => Validity::Valid,
            Mode::Acquiring { started, .. } => {
                if self.epoch.is_none() || index >= *started {
                    Validity::Invalid
                } else {
                    Validity::Stale
                }
            }
        }
    }
}

fn median(values: &VecDeque<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v: Vec<f64> = values.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn push_bounded(buf: &mut VecDeque<f64>, value: f64, cap: usize) {
    if buf.len() == cap {
        buf.pop_front();
    }
    buf.push_back(value);
}

/// True iff the last `run_length` magnitudes all exceed `threshold`.
pub fn detect_change(sentinel: &[f64], threshold: f64, run_length: usize) -> bool {
    assert!(run_length >= 1, "run length must be positive");
    sentinel.len() >= run_length && sentinel[sentinel.len() - run_length..].iter().all(|&v| v > threshold)
}

/// Feeds one measurement vector. Returns the estimate leaving the delay
/// line (if any) and the events raised by this step.
pub fn stream_step(state: &mut StreamState, y: CVector) -> (Option<Emitted>, Vec<Event>) {
    let step = state.step;
    state.step += 1;
    let mut events = Vec::new();
    push_bounded(&mut state.norm_history, y.norm(), state.config.median_window);

    // Sentinel watch on the newest vector.
    if let (Mode::Tracking, Some(epoch)) = (&state.mode, &state.epoch) {
        let magnitude = (epoch.sentinel_row.transpose() * &y)[(0, 0)].norm();
        let threshold = state.threshold();
        let armed = state.since_epoch >= state.config.warmup;
        push_bounded(&mut state.crossings, magnitude, state.config.run_length);
        let crossings: Vec<f64> = state.crossings.iter().copied().collect();
        if armed && detect_change(&crossings, threshold, state.config.run_length) {
            let started = step + 1 - state.config.run_length as u64;
            // The frame starts at the first crossing; those vectors are still
            // held in the delay line or are the current one.
            let mut frame: Vec<CVector> =
                state.memory.iter().filter(|(i, _)| *i >= started).map(|(_, v)| v.clone()).collect();
            frame.push(y.clone());
            events.push(Event { step, event: EventKind::Trigger, support: epoch.recovery.support.clone() });
            state.mode = Mode::Acquiring { started, frame };
        } else {
            push_bounded(&mut state.sentinel_history, magnitude, state.config.median_window);
            state.since_epoch += 1;
        }
    } else if let Mode::Acquiring { frame, .. } = &mut state.mode {
        frame.push(y.clone());
    }

    // Emit the oldest vector once the delay line is full.
    state.memory.push_back((step, y));
    let emitted = if state.memory.len() > state.config.n_mem {
        let (index, vector) = state.memory.pop_front().expect("nonempty");
        let validity = state.emit_validity(index);
        let z = state.epoch.as_ref().map(|e| e.recovery.recover_full(&vector));
        if state.last_validity != Some(validity) {
            let kind = match validity {
                Validity::Valid => EventKind::Valid,
                Validity::Stale => EventKind::Stale,
                Validity::Invalid => EventKind::Invalid,
            };
            events.push(Event { step, event: kind, support: state_support(state) });
            state.last_validity = Some(validity);
        }
        Some(Emitted { index, z, validity })
    } else {
        None
    };

    // Finish a CTF run once its window is complete; the new support serves
    // from the next step.
    if let Mode::Acquiring { frame, .. } = &state.mode {
        if frame.len() >= state.config.n_ctf {
            let stream = SampleStream {
                data: CMatrix::from_columns(frame),
                rate: 1.0,
                first_index: 0,
            };
            let outcome = build_frame(&stream, 0..stream.len(), state.config.eigen_threshold)
                .and_then(|f| somp_support_with(&state.a, &f.v_matrix, state.config.somp))
                .and_then(|s| state.install(&s).map(|_| s));
            match outcome {
                Ok(support) => {
                    events.push(Event { step, event: EventKind::Epoch, support });
                    state.mode = Mode::Tracking;
                }
                Err(_) => {
                    events.push(Event { step, event: EventKind::CtfFailed, support: state_support(state) });
                    state.mode = Mode::Acquiring { started: step + 1, frame: Vec::new() };
                }
            }
        }
    }
    (emitted, events)
}

fn state_support(state: &StreamState) -> SupportSet {
    state.current_support().cloned().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detect_change_examples() {
        assert!(!detect_change(&[0.0; 10], 0.0, 3));
        assert!(detect_change(&[0.0, 0.0, 2.0, 2.0, 2.0], 1.0, 3));
        assert!(!detect_change(&[0.0, 2.0, 0.5, 2.0, 2.0], 1.0, 3));
        assert!(!detect_change(&[2.0, 2.0], 1.0, 3));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&VecDeque::from(vec![3.0, 1.0, 2.0])), 2.0);
        assert_eq!(median(&VecDeque::from(vec![4.0, 1.0, 2.0, 3.0])), 2.5);
        assert_eq!(median(&VecDeque::new()), 0.0);
    }
}
