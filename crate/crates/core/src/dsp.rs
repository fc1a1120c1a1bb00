//! Small DSP toolbox shared by the front-end simulation, the channel expander
//! and the reconstruction stage: windowed-sinc design, frequency response
//! evaluation and a few numeric helpers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Normalized sinc, `sin(pi x) / (pi x)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Symmetric Hamming window of length `len`.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len).map(|n| hamming_at(n as f64 / denom)).collect()
}

/// Continuous Hamming window on `[0, 1]`.
pub fn hamming_at(x: f64) -> f64 {
    0.54 - 0.46 * (2.0 * PI * x).cos()
}

/// Linear-phase lowpass FIR by the window method (Hamming).
///
/// `cutoff` is in cycles per sample (0 < cutoff < 0.5). Taps are scaled to
/// unit DC gain. `num_taps` must be odd so the group delay is an integer
/// number of samples.
pub fn lowpass_fir(num_taps: usize, cutoff: f64) -> Vec<f64> {
    assert!(num_taps % 2 == 1, "linear-phase lowpass needs an odd tap count");
    assert!(cutoff > 0.0 && cutoff < 0.5, "cutoff must lie in (0, 0.5) cycles/sample");
    let center = (num_taps / 2) as f64;
    let window = hamming(num_taps);
    let mut taps: Vec<f64> = (0..num_taps)
        .map(|n| {
            // Evaluate on |n - center| and the nearer window end so the taps are exactly symmetric.
            let k = n.min(num_taps - 1 - n);
            2.0 * cutoff * sinc(2.0 * cutoff * (center - k as f64)) * window[k]
        })
        .collect();
    let gain: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= gain);
    taps
}

/// Frequency response of real taps at `freq` cycles/sample, referenced to
/// the filter center so a linear-phase design returns a real value.
pub fn centered_response(taps: &[f64], freq: f64) -> f64 {
    let center = (taps.len() / 2) as f64;
    taps.iter()
        .enumerate()
        .map(|(n, &h)| h * (2.0 * PI * freq * (n as f64 - center)).cos())
        .sum()
}

/// Worst-case stopband magnitude in dB on `[from, 0.5]` cycles/sample.
pub fn stopband_peak_db(taps: &[f64], from: f64) -> f64 {
    let nfft = (taps.len() * 8).next_power_of_two().max(1 << 14);
    let mut buf: Vec<Complex64> = taps.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    buf.resize(nfft, Complex64::new(0.0, 0.0));
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    fft.process(&mut buf);
    let start = (from * nfft as f64).ceil() as usize;
    let peak = buf[start..=nfft / 2].iter().map(|c| c.norm()).fold(0.0, f64::max);
    20.0 * peak.log10()
}

/// Forward DFT of a complex sequence.
pub fn dft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse DFT, normalized by `1/N`.
pub fn idft(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    let n = buf.len() as f64;
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf.iter_mut().for_each(|c| *c /= n);
    buf
}

/// `ceil` that treats values within a relative `1e-9` of an integer as that
/// integer, so ratios such as `10 GHz / (10 GHz / 195)` land on 195.
pub fn ceil_tol(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as i64
    } else {
        x.ceil() as i64
    }
}

/// Returns `Some(n)` when `x` is within a relative `1e-9` of the integer `n`.
pub fn as_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= 1e-9 * x.abs().max(1.0)).then_some(r as i64)
}

/// Normalized mean squared error in dB.
pub fn nmse_db<'a>(
    estimate: impl IntoIterator<Item = &'a Complex64>,
    reference: impl IntoIterator<Item = &'a Complex64>,
) -> f64 {
    let (err, energy) = estimate
        .into_iter()
        .zip(reference)
        .fold((0.0, 0.0), |(e, r), (a, b)| (e + (a - b).norm_sqr(), r + b.norm_sqr()));
    10.0 * (err / energy).log10()
}
