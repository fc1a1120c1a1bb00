//! Test-signal synthesis on a dense time grid: sinc-shaped multiband
//! transmissions, QPSK transmissions and calibrated white Gaussian noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dsp::sinc;
use crate::error::{Condition, Error, Result};

/// Generative description of a real multiband signal with `n_bands / 2`
/// sinc-shaped band pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultibandSpec {
    pub n_bands: usize,
    pub band_width: f64,
    pub nyquist_rate: f64,
    pub carriers: Vec<f64>,
    pub energies: Vec<f64>,
    pub offsets: Vec<f64>,
}

impl MultibandSpec {
    /// Three band pairs with the energies `{1, 2, 3}` and offsets
    /// `{0.4, 0.7, 0.2}` us used throughout the wideband design example.
    pub fn three_pairs(band_width: f64, nyquist_rate: f64, carriers: Vec<f64>) -> Self {
        MultibandSpec {
            n_bands: 6,
            band_width,
            nyquist_rate,
            carriers,
            energies: vec![1.0, 2.0, 3.0],
            offsets: vec![0.4e-6, 0.7e-6, 0.2e-6],
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.n_bands / 2
    }

    /// All `N` band intervals, positive and mirrored.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let half = self.band_width / 2.0;
        self.carriers
            .iter()
            .flat_map(|&f| {
                let f = f.abs();
                [(f - half, f + half), (-f - half, -f + half)]
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bands == 0 || self.n_bands % 2 != 0 {
            return Err(Error::ModelViolation(format!("band count {} must be even and positive", self.n_bands)));
        }
        let pairs = self.n_pairs();
        if self.carriers.len() != pairs || self.energies.len() != pairs || self.offsets.len() != pairs {
            return Err(Error::ModelViolation(format!(
                "expected {pairs} carriers, energies and offsets; got {}, {}, {}",
                self.carriers.len(),
                self.energies.len(),
                self.offsets.len()
            )));
        }
        if !(self.band_width > 0.0) || !(self.nyquist_rate > 0.0) {
            return Err(Error::ModelViolation("band width and Nyquist rate must be positive".into()));
        }
        if 2.0 * self.n_bands as f64 * self.band_width >= self.nyquist_rate {
            return Err(Error::condition(
                Condition::SparseModel,
                format!("2NB = {:.4e} Hz is not below f_NYQ = {:.4e} Hz", 2.0 * self.n_bands as f64 * self.band_width, self.nyquist_rate),
            ));
        }
        let limit = self.nyquist_rate / 2.0 - self.band_width / 2.0;
        if let Some(f) = self.carriers.iter().find(|f| f.abs() > limit * (1.0 + 1e-12)) {
            return Err(Error::ModelViolation(format!("carrier {f:.6e} Hz places its band outside [-f_NYQ/2, f_NYQ/2)")));
        }
        if !intervals_disjoint(&self.bands()) {
            return Err(Error::ModelViolation("band intervals overlap".into()));
        }
        Ok(())
    }
}

fn intervals_disjoint(bands: &[(f64, f64)]) -> bool {
    let mut sorted = bands.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted.windows(2).all(|w| w[1].0 > w[0].1)
}

/// One QPSK transmission with sinc pulse shaping `s(t) = sinc(t / T_sym)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpskSpec {
    pub symbol_energy: f64,
    pub symbol_period: f64,
    pub carrier: f64,
    pub in_phase_bits: Vec<i8>,
    pub quadrature_bits: Vec<i8>,
    /// Center time of symbol 0.
    #[serde(default)]
    pub symbol_origin: f64,
}

/// Pulses are evaluated only within this many symbol periods of their center.
pub const PULSE_SPAN_SYMBOLS: f64 = 8.0;

impl QpskSpec {
    /// Random bit streams covering `[start, end)` with `T_sym = 2 / band_width`.
    pub fn random<R: Rng + ?Sized>(
        symbol_energy: f64,
        band_width: f64,
        carrier: f64,
        start: f64,
        end: f64,
        rng: &mut R,
    ) -> Self {
        let symbol_period = 2.0 / band_width;
        let count = ((end - start) / symbol_period).ceil().max(1.0) as usize;
        let mut draw = || (0..count).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect::<Vec<i8>>();
        let in_phase_bits = draw();
        let quadrature_bits = draw();
        QpskSpec {
            symbol_energy,
            symbol_period,
            carrier,
            in_phase_bits,
            quadrature_bits,
            symbol_origin: start + symbol_period / 2.0,
        }
    }

    /// Occupied spectrum of the sinc-shaped pulse train around the carrier.
    pub fn occupied_band(&self) -> (f64, f64) {
        let half = 0.5 / self.symbol_period;
        (self.carrier.abs() - half, self.carrier.abs() + half)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.symbol_period > 0.0) {
            return Err(Error::InvalidArgument("symbol period must be positive".into()));
        }
        if self.in_phase_bits.is_empty() || self.quadrature_bits.is_empty() {
            return Err(Error::Empty("QPSK bit streams must be nonempty"));
        }
        if self.in_phase_bits.len() != self.quadrature_bits.len() {
            return Err(Error::InvalidArgument("in-phase and quadrature streams differ in length".into()));
        }
        if self.in_phase_bits.iter().chain(&self.quadrature_bits).any(|&b| b != 1 && b != -1) {
            return Err(Error::InvalidArgument("QPSK bits must be +1 or -1".into()));
        }
        Ok(())
    }
}

/// Uniform sampling instants `start + n * step` for `n < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub step: f64,
    pub start: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Grid over the closed window `[start, start + duration]`.
    pub fn window(start: f64, duration: f64, step: f64) -> Self {
        let len = (duration / step + 1e-9).floor() as usize + 1;
        TimeGrid { step, start, len }
    }

    pub fn time(&self, n: usize) -> f64 {
        self.start + n as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.time(self.len.saturating_sub(1))
    }
}

/// An "analog" signal represented on a dense grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSignal {
    pub samples: Vec<f64>,
    pub grid_step: f64,
    pub start_time: f64,
}

impl DenseSignal {
    pub fn zeros(grid: TimeGrid) -> Self {
        DenseSignal { samples: vec![0.0; grid.len], grid_step: grid.step, start_time: grid.start }
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid { step: self.grid_step, start: self.start_time, len: self.samples.len() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }

    /// Integer index of the first sample on the absolute grid `k * grid_step`.
    pub fn start_index(&self) -> Result<i64> {
        crate::dsp::as_integer(self.start_time / self.grid_step)
            .ok_or_else(|| Error::GridIncompatible("start time is not a multiple of the grid step".into()))
    }

    /// Adds `other` in place; `other` must lie on the same grid inside `self`.
    pub fn accumulate(&mut self, other: &DenseSignal) -> Result<()> {
        if (other.grid_step - self.grid_step).abs() > 1e-12 * self.grid_step {
            return Err(Error::GridIncompatible("grid steps differ".into()));
        }
        let offset = crate::dsp::as_integer((other.start_time - self.start_time) / self.grid_step)
            .filter(|&o| o >= 0 && o as usize + other.len() <= self.len())
            .ok_or_else(|| Error::GridIncompatible("signal does not fit inside the target grid".into()))?;
        for (dst, src) in self.samples[offset as usize..].iter_mut().zip(&other.samples) {
            *dst += src;
        }
        Ok(())
    }
}

/// Sum of sinc-shaped band pairs, `sqrt(E_i B) sinc(B(t - tau_i)) cos(2 pi f_i (t - tau_i))`.
pub fn synth_multiband(spec: &MultibandSpec, grid: TimeGrid) -> Result<DenseSignal> {
    spec.validate()?;
    let b = spec.band_width;
    let samples = (0..grid.len)
        .map(|n| {
            let t = grid.time(n);
            spec.carriers
                .iter()
                .zip(&spec.energies)
                .zip(&spec.offsets)
                .map(|((&f, &e), &tau)| {
                    let dt = t - tau;
                    (e * b).sqrt() * sinc(b * dt) * (2.0 * PI * f * dt).cos()
                })
                .sum()
        })
        .collect();
    Ok(DenseSignal { samples, grid_step: grid.step, start_time: grid.start })
}

/// QPSK waveform; only symbols within `PULSE_SPAN_SYMBOLS` periods of a grid
/// point contribute to it.
pub fn synth_qpsk(spec: &QpskSpec, grid: TimeGrid) -> Result<DenseSignal> {
    spec.validate()?;
    let period = spec.symbol_period;
    let amplitude = (2.0 * spec.symbol_energy / period).sqrt();
    let count = spec.in_phase_bits.len() as i64;
    let samples = (0..grid.len)
        .map(|n| {
            let t = grid.time(n);
            let pos = (t - spec.symbol_origin) / period;
            let lo = ((pos - PULSE_SPAN_SYMBOLS).ceil() as i64).max(0);
            let hi = ((pos + PULSE_SPAN_SYMBOLS).floor() as i64).min(count - 1);
            let (mut i_sum, mut q_sum) = (0.0, 0.0);
            for k in lo..=hi {
                let s = sinc(pos - k as f64);
                i_sum += spec.in_phase_bits[k as usize] as f64 * s;
                q_sum += spec.quadrature_bits[k as usize] as f64 * s;
            }
            let phase = 2.0 * PI * spec.carrier * t;
            amplitude * (i_sum * phase.cos() + q_sum * phase.sin())
        })
        .collect();
    Ok(DenseSignal { samples, grid_step: grid.step, start_time: grid.start })
}

/// Adds white Gaussian noise scaled so that the realized `‖x‖² / ‖w‖²`
/// equals `snr_db` exactly. `f64::INFINITY` returns the input unchanged.
pub fn add_awgn<R: Rng + ?Sized>(signal: &DenseSignal, snr_db: f64, rng: &mut R) -> Result<DenseSignal> {
    let energy = signal.energy();
    if !(energy > 0.0) {
        return Err(Error::Empty("cannot calibrate noise against a zero-energy signal"));
    }
    if snr_db == f64::INFINITY {
        return Ok(signal.clone());
    }
    let noise: Vec<f64> = (0..signal.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let noise_energy: f64 = noise.iter().map(|w| w * w).sum();
    let scale = (energy / 10f64.powf(snr_db / 10.0) / noise_energy).sqrt();
    let samples = signal.samples.iter().zip(&noise).map(|(x, w)| x + scale * w).collect();
    Ok(DenseSignal { samples, ..signal.clone() })
}

const CARRIER_RETRIES: usize = 10_000;

/// Draws `n_pairs` carriers uniformly on `(B/2, f_NYQ/2 - B/2]`, redrawing
/// until all bands and their mirrors are pairwise disjoint.
pub fn draw_carriers<R: Rng + ?Sized>(n_pairs: usize, band_width: f64, nyquist: f64, rng: &mut R) -> Result<Vec<f64>> {
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("at least one band pair is required".into()));
    }
    if 2.0 * n_pairs as f64 * band_width >= nyquist {
        return Err(Error::condition(Condition::SparseModel, format!("{n_pairs} pairs of width {band_width:.3e} Hz do not fit")));
    }
    let (lo, hi) = (band_width / 2.0, nyquist / 2.0 - band_width / 2.0);
    for _ in 0..CARRIER_RETRIES {
        // (lo, hi]: flip the half-open [0, 1) draw.
        let carriers: Vec<f64> = (0..n_pairs).map(|_| hi - (hi - lo) * rng.random::<f64>()).collect();
        let half = band_width / 2.0;
        let bands: Vec<(f64, f64)> = carriers.iter().flat_map(|&f| [(f - half, f + half), (-f - half, -f + half)]).collect();
        if intervals_disjoint(&bands) {
            return Ok(carriers);
        }
    }
    Err(Error::RetryBudget { attempts: CARRIER_RETRIES })
}
