use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{as_integer, lowpass_fir};
use crate::error::{Error, Result};
use crate::signal::DenseSignal;

use super::waveform::{dense_period, MixingModel};
use super::MwcConfig;

/// Low-rate samples of `m` channels; channel `i` is row `i`. Column `n` is
/// taken at time `(first_index + n) / rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub data: DMatrix<Complex64>,
    pub rate: f64,
    pub first_index: i64,
}

impl SampleStream {
    pub fn from_rows(rows: &[Vec<Complex64>], rate: f64, first_index: i64) -> Result<Self> {
        let len = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != len) {
            return Err(Error::InvalidArgument("channel sequences differ in length".into()));
        }
        if !(rate > 0.0) {
            return Err(Error::InvalidArgument("stream rate must be positive".into()));
        }
        Ok(SampleStream { data: DMatrix::from_fn(rows.len(), len, |i, n| rows[i][n]), rate, first_index })
    }

    pub fn channel_count(&self) -> usize {
        self.data.nrows()
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn time(&self, n: usize) -> f64 {
        (self.first_index + n as i64) as f64 / self.rate
    }

    /// The measurement vector `y[n]`.
    pub fn vector(&self, n: usize) -> DVector<Complex64> {
        self.data.column(n).into_owned()
    }

    pub fn channel(&self, i: usize) -> Vec<Complex64> {
        self.data.row(i).iter().copied().collect()
    }

    pub fn with_channels(&self, count: usize) -> SampleStream {
        let count = count.min(self.channel_count());
        SampleStream { data: self.data.rows(0, count).into_owned(), ..self.clone() }
    }

    /// Columns `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> SampleStream {
        SampleStream {
            data: self.data.columns(start, len).into_owned(),
            rate: self.rate,
            first_index: self.first_index + start as i64,
        }
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|c| c.im == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontEndOptions {
    /// Anti-aliasing filter span in sampling periods.
    pub fir_periods: usize,
    pub mixing: MixingModel,
}

impl Default for FrontEndOptions {
    fn default() -> Self {
        FrontEndOptions { fir_periods: 12, mixing: MixingModel::BandLimited }
    }
}

pub const MIN_FRONTEND_TAPS: usize = 401;

/// A front-end bound to a dense grid: waveforms and the lowpass filter are
/// tabulated once and reused for every input.
#[derive(Debug, Clone)]
pub struct FrontEnd {
    config: MwcConfig,
    grid_step: f64,
    period_samples: usize,
    decimation: usize,
    taps: Vec<f64>,
    waveforms: Vec<Vec<f64>>,
}

impl FrontEnd {
    pub fn new(config: &MwcConfig, grid_step: f64, options: FrontEndOptions) -> Result<Self> {
        config.validate()?;
        let chip = config.period() / config.alternations as f64;
        let chip_samples = as_integer(chip / grid_step).filter(|&c| c >= 1);
        let decimation = as_integer(1.0 / (config.sampling_rate * grid_step)).filter(|&d| d >= 2);
        let (Some(chip_samples), Some(decimation)) = (chip_samples, decimation) else {
            return Err(Error::GridIncompatible(format!(
                "grid step {grid_step:.6e} s must divide the chip duration {chip:.6e} s and the sampling period {:.6e} s \
                 (at least twice); use frontend::derive_grid",
                1.0 / config.sampling_rate
            )));
        };
        let period_samples = chip_samples as usize * config.alternations;
        let decimation = decimation as usize;
        let mut n_taps = (options.fir_periods * decimation + 1).max(MIN_FRONTEND_TAPS);
        if n_taps % 2 == 0 {
            n_taps += 1;
        }
        let taps = lowpass_fir(n_taps, 0.5 / decimation as f64);
        let waveforms = (0..config.n_channels)
            .map(|i| dense_period(&config.waveform(i), period_samples, options.mixing))
            .collect();
        Ok(FrontEnd { config: config.clone(), grid_step, period_samples, decimation, taps, waveforms })
    }

    pub fn config(&self) -> &MwcConfig {
        &self.config
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    /// Dense samples per mixing period.
    pub fn period_samples(&self) -> usize {
        self.period_samples
    }

    /// Dense samples per output sample.
    pub fn decimation(&self) -> usize {
        self.decimation
    }

    /// Tabulated waveform of channel `i` over one period.
    pub fn waveform(&self, channel: usize) -> &[f64] {
        &self.waveforms[channel]
    }

    /// First absolute output index and output count for `signal`, keeping
    /// only outputs whose filter support lies inside the signal.
    pub fn output_range(&self, signal: &DenseSignal) -> Result<(i64, usize)> {
        self.check_grid(signal)?;
        let g0 = signal.start_index()?;
        let half = (self.taps.len() / 2) as i64;
        let d = self.decimation as i64;
        let first = (g0 + half).div_euclid(d) + i64::from((g0 + half).rem_euclid(d) != 0);
        let last = (g0 + signal.len() as i64 - 1 - half).div_euclid(d);
        Ok((first, (last - first + 1).max(0) as usize))
    }

    fn check_grid(&self, signal: &DenseSignal) -> Result<()> {
        if (signal.grid_step - self.grid_step).abs() > 1e-9 * self.grid_step {
            return Err(Error::GridIncompatible(format!(
                "signal grid {:.6e} s differs from front-end grid {:.6e} s",
                signal.grid_step, self.grid_step
            )));
        }
        Ok(())
    }

    /// Mix, filter and sample every channel.
    pub fn sample(&self, signal: &DenseSignal) -> Result<SampleStream> {
        let (first, count) = self.output_range(signal)?;
        let g0 = signal.start_index()?;
        let rows: Vec<Vec<Complex64>> = self
            .waveforms
            .par_iter()
            .map(|w| {
                let p = self.period_samples as i64;
                let mixed: Vec<f64> = signal
                    .samples
                    .iter()
                    .enumerate()
                    .map(|(n, &x)| x * w[(g0 + n as i64).rem_euclid(p) as usize])
                    .collect();
                self.filter_real(&mixed, g0, first, count).into_iter().map(|v| Complex64::new(v, 0.0)).collect()
            })
            .collect();
        SampleStream::from_rows(&rows, self.config.sampling_rate, first)
    }

    /// Filters `x(t) w(t)` for a complex `T_p`-periodic weight tabulated over
    /// one period, on the same output instants as [`FrontEnd::sample`].
    pub fn sample_weighted(&self, signal: &DenseSignal, weight: &[Complex64]) -> Result<Vec<Complex64>> {
        if weight.len() != self.period_samples {
            return Err(Error::InvalidArgument(format!(
                "weight has {} samples per period, expected {}",
                weight.len(),
                self.period_samples
            )));
        }
        let (first, count) = self.output_range(signal)?;
        let g0 = signal.start_index()?;
        let p = self.period_samples as i64;
        let (re, im): (Vec<f64>, Vec<f64>) = signal
            .samples
            .iter()
            .enumerate()
            .map(|(n, &x)| {
                let c = x * weight[(g0 + n as i64).rem_euclid(p) as usize];
                (c.re, c.im)
            })
            .unzip();
        let (yr, yi) = rayon::join(|| self.filter_real(&re, g0, first, count), || self.filter_real(&im, g0, first, count));
        Ok(yr.into_iter().zip(yi).map(|(a, b)| Complex64::new(a, b)).collect())
    }

    fn filter_real(&self, mixed: &[f64], g0: i64, first: i64, count: usize) -> Vec<f64> {
        let half = (self.taps.len() / 2) as i64;
        (0..count as i64)
            .map(|s| {
                let start = ((first + s) * self.decimation as i64 - half - g0) as usize;
                dot(&self.taps, &mixed[start..start + self.taps.len()])
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// One-shot simulation with default options on the signal's own grid.
pub fn simulate_sampling(signal: &DenseSignal, config: &MwcConfig) -> Result<SampleStream> {
    FrontEnd::new(config, signal.grid_step, FrontEndOptions::default())?.sample(signal)
}

/// Uniform mid-rise quantizer with `2^bits` levels over `[-A_max, A_max]`,
/// `A_max` being the largest real or imaginary magnitude in the stream.
/// `None` passes the stream through.
pub fn quantize(stream: &SampleStream, bits: Option<u32>) -> SampleStream {
    let Some(bits) = bits else {
        return stream.clone();
    };
    assert!(bits >= 1, "quantizer needs at least one bit");
    let a_max = stream.data.iter().map(|c| c.re.abs().max(c.im.abs())).fold(0.0, f64::max);
    if a_max == 0.0 {
        return stream.clone();
    }
    let step = 2.0 * a_max / 2f64.powi(bits as i32);
    let top = a_max - step / 2.0;
    let q = |v: f64| (step * ((v / step).floor() + 0.5)).clamp(-top, top);
    let real = stream.is_real();
    SampleStream {
        data: stream.data.map(|c| Complex64::new(q(c.re), if real { 0.0 } else { q(c.im) })),
        ..stream.clone()
    }
}
