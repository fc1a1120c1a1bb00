//! Digital channel expansion: one physical channel sampled at `f_s = q f_p`
//! is split into `q` virtual channels at rate `f_p`, each seeing the
//! spectrum shifted by a different multiple of `f_p`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{as_integer, lowpass_fir};
use crate::error::{Error, Result};
use crate::frontend::{dense_period, MixingModel, MwcConfig, SampleStream, SensingMatrix};

/// Filter order used when none is given (the filter has `order + 1` taps).
pub const DEFAULT_EXPANDER_ORDER: usize = 100;

/// Physical channel and spectral shift behind one virtual row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualRow {
    pub channel: usize,
    pub shift: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedStream {
    pub stream: SampleStream,
    pub row_map: Vec<VirtualRow>,
    pub filter_taps: Vec<f64>,
}

/// Row order: channel-major, shift ascending from `-q'` to `q'`.
pub fn virtual_rows(channels: usize, q: usize) -> Vec<VirtualRow> {
    let half = (q / 2) as i64;
    (0..channels).flat_map(|channel| (-half..=half).map(move |shift| VirtualRow { channel, shift })).collect()
}

/// Splits every channel of `stream` into `q` virtual channels at
/// `stream.rate / q`. `order` is the lowpass filter order (even).
pub fn expand_channel(stream: &SampleStream, q: usize, mixing_rate: f64, order: usize) -> Result<ExpandedStream> {
    if q == 0 || q % 2 == 0 {
        return Err(Error::InvalidArgument(format!("expansion factor q = {q} must be odd")));
    }
    if as_integer(stream.rate / mixing_rate) != Some(q as i64) {
        return Err(Error::InvalidArgument(format!(
            "stream rate {:.6e} Hz is not {q} x f_p = {:.6e} Hz",
            stream.rate,
            q as f64 * mixing_rate
        )));
    }
    let rows = virtual_rows(stream.channel_count(), q);
    if q == 1 {
        return Ok(ExpandedStream { stream: stream.clone(), row_map: rows, filter_taps: vec![1.0] });
    }
    if order % 2 != 0 {
        return Err(Error::InvalidArgument(format!("expander filter order {order} must be even")));
    }
    let taps = lowpass_fir(order + 1, 0.5 / q as f64);
    let half = (order / 2) as i64;
    let qi = q as i64;
    let first_in = stream.first_index;
    let last_in = first_in + stream.len() as i64 - 1;
    let first = (first_in + half).div_euclid(qi) + i64::from((first_in + half).rem_euclid(qi) != 0);
    let last = (last_in - half).div_euclid(qi);
    let count = (last - first + 1).max(0) as usize;

    let sequences: Vec<Vec<Complex64>> = rows
        .par_iter()
        .map(|row| {
            let y = stream.data.row(row.channel);
            (0..count as i64)
                .map(|s| {
                    let center = (first + s) * qi;
                    (0..taps.len() as i64)
                        .map(|t| {
                            let n = center - half + t;
                            let phase = -2.0 * PI * (row.shift * n).rem_euclid(qi) as f64 / q as f64;
                            y[(n - first_in) as usize] * Complex64::from_polar(taps[t as usize], phase)
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(ExpandedStream {
        stream: SampleStream::from_rows(&sequences, mixing_rate, first)?,
        row_map: rows,
        filter_taps: taps,
    })
}

/// Sensing rows of the expanded system: row `(i, k)` holds `c_{i, l + k}` in
/// the column whose entry in `A` is `c_{i, l}`.
pub fn expanded_row_coeffs(matrix: &SensingMatrix, q: usize) -> DMatrix<Complex64> {
    let rows = virtual_rows(matrix.n_rows(), q);
    let l0 = matrix.l_zero as i64;
    DMatrix::from_fn(rows.len(), matrix.n_slices(), |r, j| {
        let VirtualRow { channel, shift } = rows[r];
        matrix.coefficient(channel, l0 - j as i64 + shift)
    })
}

/// Tabulated `p_i(t) exp(-2jπ k f_p t)` over one period: the mixing weight
/// of a directly built virtual channel, used to cross-check expansion.
pub fn virtual_channel_weight(
    config: &MwcConfig,
    row: VirtualRow,
    period_samples: usize,
    mixing: MixingModel,
) -> Vec<Complex64> {
    let p = period_samples as i64;
    dense_period(&config.waveform(row.channel), period_samples, mixing)
        .into_iter()
        .enumerate()
        .map(|(n, v)| {
            let phase = -2.0 * PI * (row.shift * n as i64).rem_euclid(p) as f64 / p as f64;
            Complex64::from_polar(v, phase)
        })
        .collect()
}
