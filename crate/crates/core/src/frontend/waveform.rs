//! Periodic sign-alternating mixing waveforms: sign-pattern generation,
//! Fourier coefficients and the dense-grid representation used by the
//! front-end simulation.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};

/// `m x M` matrix of `±1` entries; row `i` initializes the shift register of
/// channel `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i8>,
}

/// How rows beyond the first `r` are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SignMode {
    Independent,
    /// Row `i > r` is row `i - r` rotated right by `shift` positions.
    SharedRegister { registers: usize, shift: usize },
}

impl SignMatrix {
    pub fn from_rows(rows: Vec<Vec<i8>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::Empty("sign matrix must have at least one entry"));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("sign matrix rows differ in length".into()));
        }
        if rows.iter().flatten().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidArgument("sign matrix entries must be +1 or -1".into()));
        }
        Ok(SignMatrix { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        self.data.chunks(self.cols)
    }

    /// First `count` rows.
    pub fn truncated(&self, count: usize) -> SignMatrix {
        let count = count.min(self.rows);
        SignMatrix { rows: count, cols: self.cols, data: self.data[..count * self.cols].to_vec() }
    }

    /// One row per line, entries written as `+1` / `-1`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let line: Vec<&str> = row.iter().map(|&v| if v > 0 { "+1" } else { "-1" }).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| match tok {
                        "+1" | "1" | "+" => Ok(1),
                        "-1" | "-" => Ok(-1),
                        other => Err(Error::Parse(format!("sign entry {other:?} is not ±1"))),
                    })
                    .collect::<Result<Vec<i8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

/// Random sign matrix. Shared-register mode with `registers == m` is the
/// independent mode.
pub fn gen_sign_matrix<R: Rng + ?Sized>(m: usize, alternations: usize, rng: &mut R, mode: SignMode) -> Result<SignMatrix> {
    if m == 0 || alternations == 0 {
        return Err(Error::InvalidArgument("sign matrix needs m >= 1 and M >= 1".into()));
    }
    let (fresh, shift) = match mode {
        SignMode::Independent => (m, 0),
        SignMode::SharedRegister { registers, shift } => {
            if registers == 0 || registers > m {
                return Err(Error::InvalidArgument(format!("shared register count {registers} must lie in 1..={m}")));
            }
            (registers, shift)
        }
    };
    let mut data: Vec<i8> = (0..fresh * alternations).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    for i in fresh..m {
        let src = (i - fresh) * alternations;
        let mut row = data[src..src + alternations].to_vec();
        row.rotate_right(shift % alternations);
        data.extend(row);
    }
    Ok(SignMatrix { rows: m, cols: alternations, data })
}

/// `d_l` of one sign chip: `1/M` at `l = 0`, otherwise `(1 - θ^l) / (2jπl)`
/// with `θ = exp(-2jπ/M)`.
pub fn chip_coefficient(l: i64, alternations: usize) -> Complex64 {
    let m = alternations as f64;
    if l == 0 {
        return Complex64::new(1.0 / m, 0.0);
    }
    let theta_l = Complex64::from_polar(1.0, -2.0 * PI * l as f64 / m);
    (Complex64::new(1.0, 0.0) - theta_l) / Complex64::new(0.0, 2.0 * PI * l as f64)
}

/// Fourier coefficient `c_l = d_l Σ_k α_k θ^{lk}` of the waveform with sign
/// pattern `pattern`.
pub fn fourier_coeff(pattern: &[i8], l: i64) -> Complex64 {
    let m = pattern.len();
    let sum: Complex64 = pattern
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            // Reduce l*k mod M before forming the phase to keep it accurate.
            let phase = ((l * k as i64).rem_euclid(m as i64)) as f64;
            Complex64::from_polar(a as f64, -2.0 * PI * phase / m as f64)
        })
        .sum();
    chip_coefficient(l, m) * sum
}

/// Coefficients `c_l` for every `l` in `range`.
pub fn fourier_coeffs(pattern: &[i8], range: std::ops::RangeInclusive<i64>) -> Vec<Complex64> {
    range.map(|l| fourier_coeff(pattern, l)).collect()
}

/// A `T_p`-periodic piecewise-constant waveform with arbitrary transition
/// instants, given as fractions of the period. Level `k` holds on
/// `[starts[k], starts[k + 1])`, the last level wrapping to `starts[0] + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicWaveform {
    starts: Vec<f64>,
    levels: Vec<f64>,
}

impl PeriodicWaveform {
    /// Ideal edges at `k/M`.
    pub fn ideal(pattern: &[i8]) -> Self {
        let m = pattern.len() as f64;
        PeriodicWaveform {
            starts: (0..pattern.len()).map(|k| k as f64 / m).collect(),
            levels: pattern.iter().map(|&a| a as f64).collect(),
        }
    }

    /// Edges at `(k + jitter[k]) / M`; `jitter` is in chip units and must
    /// keep the edges ordered.
    pub fn jittered(pattern: &[i8], jitter: &[f64]) -> Result<Self> {
        let m = pattern.len();
        if jitter.len() != m {
            return Err(Error::InvalidArgument(format!("jitter has {} entries, expected {m}", jitter.len())));
        }
        if jitter.iter().any(|j| !(j.abs() < 0.5)) {
            return Err(Error::InvalidArgument("edge jitter must stay within half a chip".into()));
        }
        Ok(PeriodicWaveform {
            starts: (0..m).map(|k| (k as f64 + jitter[k]) / m as f64).collect(),
            levels: pattern.iter().map(|&a| a as f64).collect(),
        })
    }

    /// `c_l = (1/T_p) ∫ p(t) exp(-j2πlt/T_p) dt` in closed form.
    pub fn coefficient(&self, l: i64) -> Complex64 {
        let n = self.starts.len();
        let end = |k: usize| if k + 1 < n { self.starts[k + 1] } else { self.starts[0] + 1.0 };
        if l == 0 {
            return Complex64::new((0..n).map(|k| self.levels[k] * (end(k) - self.starts[k])).sum(), 0.0);
        }
        let w = -2.0 * PI * l as f64;
        let sum: Complex64 = (0..n)
            .map(|k| {
                let a = Complex64::from_polar(1.0, w * self.starts[k]);
                let b = Complex64::from_polar(1.0, w * end(k));
                (a - b) * self.levels[k]
            })
            .sum();
        sum / Complex64::new(0.0, 2.0 * PI * l as f64)
    }

    /// Value at time `u` measured in periods.
    pub fn value_at(&self, u: f64) -> f64 {
        let u = u.rem_euclid(1.0);
        let n = self.starts.len();
        let u = if u < self.starts[0] { u + 1.0 } else { u };
        let k = self.starts.partition_point(|&s| s <= u).saturating_sub(1);
        self.levels[k.min(n - 1)]
    }
}

/// How the mixing waveform is represented on the dense simulation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingModel {
    /// Project the waveform onto the harmonics the grid can carry
    /// (`|l| < P/2` for `P` samples per period). The simulated channel then
    /// obeys `y = A z` with the exact continuous coefficients.
    #[default]
    BandLimited,
    /// Take the waveform value at each grid instant.
    SampleAndHold,
}

/// One period of the waveform on a grid with `period_samples` points per
/// `T_p`, starting at `t = 0`.
pub fn dense_period(waveform: &PeriodicWaveform, period_samples: usize, model: MixingModel) -> Vec<f64> {
    match model {
        MixingModel::SampleAndHold => {
            (0..period_samples).map(|n| waveform.value_at(n as f64 / period_samples as f64)).collect()
        }
        MixingModel::BandLimited => {
            let p = period_samples;
            let mut spectrum = vec![Complex64::new(0.0, 0.0); p];
            let top = (p as i64 - 1) / 2;
            for l in -top..=top {
                spectrum[l.rem_euclid(p as i64) as usize] = waveform.coefficient(l);
            }
            if p % 2 == 0 {
                // Nyquist harmonic: split cos between ±P/2, drop the sine part.
                let half = p as i64 / 2;
                spectrum[half as usize] = Complex64::new(waveform.coefficient(half).re, 0.0);
            }
            // Σ_l c_l e^{+j2πln/P} = P * idft(c).
            dsp::idft(&spectrum).iter().map(|c| c.re * p as f64).collect()
        }
    }
}
