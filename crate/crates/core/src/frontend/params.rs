use serde::{Deserialize, Serialize};

use crate::dsp::{as_integer, ceil_tol};
use crate::error::{Condition, Error, Result};
use crate::signal::MultibandSpec;

use super::MwcConfig;

/// The signal class a front-end is designed for: at most `n_bands` bands of
/// width at most `band_width` below `nyquist_rate / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalClass {
    pub n_bands: usize,
    pub band_width: f64,
    pub nyquist_rate: f64,
}

impl From<&MultibandSpec> for SignalClass {
    fn from(spec: &MultibandSpec) -> Self {
        SignalClass { n_bands: spec.n_bands, band_width: spec.band_width, nyquist_rate: spec.nyquist_rate }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub class: SignalClass,
    pub mixing_rate: f64,
    pub sampling_rate: f64,
    pub rate_ratio: usize,
    pub l_zero: usize,
    pub n_slices: usize,
    pub m_min_alternations: usize,
    pub min_channels_blind: usize,
    pub min_channels_nonblind: usize,
    /// Physical channels needed for blind recovery once each channel is
    /// expanded into `q` virtual ones: `ceil(2N / q)`.
    pub min_physical_channels: usize,
    /// `min_physical_channels * f_s`.
    pub total_rate: f64,
}

/// Slice count, alternation bound and channel bounds for a signal class and
/// a pair of front-end rates.
pub fn derive_params(class: &SignalClass, mixing_rate: f64, sampling_rate: f64) -> Result<DerivedParams> {
    let SignalClass { n_bands, band_width, nyquist_rate } = *class;
    if !(mixing_rate > 0.0 && sampling_rate > 0.0 && nyquist_rate > 0.0) {
        return Err(Error::InvalidArgument("rates must be positive".into()));
    }
    if sampling_rate < mixing_rate * (1.0 - 1e-12) {
        return Err(Error::condition(
            Condition::SamplingAtLeastMixing,
            format!("f_s = {sampling_rate:.6e} Hz < f_p = {mixing_rate:.6e} Hz"),
        ));
    }
    if mixing_rate < band_width * (1.0 - 1e-12) {
        return Err(Error::condition(
            Condition::MixingAtLeastBandWidth,
            format!("f_p = {mixing_rate:.6e} Hz < B = {band_width:.6e} Hz"),
        ));
    }
    let q = as_integer(sampling_rate / mixing_rate)
        .filter(|q| q % 2 == 1)
        .ok_or_else(|| Error::condition(Condition::OddRateRatio, format!("f_s / f_p = {:.6}", sampling_rate / mixing_rate)))?
        as usize;
    let l_zero = (ceil_tol((nyquist_rate + sampling_rate) / (2.0 * mixing_rate)) - 1).max(0) as usize;
    let m_min = (2 * ceil_tol(nyquist_rate / (2.0 * mixing_rate) + 0.5) - 1).max(1) as usize;
    let min_physical = (2 * n_bands).div_ceil(q);
    Ok(DerivedParams {
        class: *class,
        mixing_rate,
        sampling_rate,
        rate_ratio: q,
        l_zero,
        n_slices: 2 * l_zero + 1,
        m_min_alternations: m_min,
        min_channels_blind: 2 * n_bands,
        min_channels_nonblind: n_bands,
        min_physical_channels: min_physical,
        total_rate: min_physical as f64 * sampling_rate,
    })
}

/// Outcome of each necessary condition for one concrete configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub checks: Vec<(Condition, bool, String)>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    /// The first failed condition as an error.
    pub fn require(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.1) {
            Some((cond, _, detail)) => Err(Error::condition(*cond, detail.clone())),
            None => Ok(()),
        }
    }
}

impl DerivedParams {
    /// Checks channel count, alternation count and the rate-ratio bound.
    /// `virtual_rows` is `m * q` when channels are expanded, else `m`.
    pub fn check_config(&self, config: &MwcConfig, expanded: bool) -> ConditionReport {
        let rows = if expanded { config.n_channels * config.rate_ratio } else { config.n_channels };
        let ratio_bound = (self.m_min_alternations as f64 + 1.0) / 2.0;
        ConditionReport {
            checks: vec![
                (
                    Condition::SamplingAtLeastMixing,
                    config.sampling_rate >= config.mixing_rate * (1.0 - 1e-12),
                    format!("f_s = {:.6e}, f_p = {:.6e}", config.sampling_rate, config.mixing_rate),
                ),
                (
                    Condition::EnoughChannels,
                    rows >= self.min_channels_blind,
                    format!("{rows} rows available, {} needed", self.min_channels_blind),
                ),
                (
                    Condition::EnoughAlternations,
                    config.alternations >= self.m_min_alternations,
                    format!("M = {}, M_min = {}", config.alternations, self.m_min_alternations),
                ),
                (
                    Condition::RateRatioBound,
                    (self.rate_ratio as f64) < ratio_bound,
                    format!("f_s / f_p = {}, bound {ratio_bound}", self.rate_ratio),
                ),
            ],
        }
    }
}

/// The `4N log10(M / 2N)` channel-count rule of thumb.
pub fn heuristic_channels(n_bands: usize, alternations: usize) -> f64 {
    let n = n_bands as f64;
    4.0 * n * (alternations as f64 / (2.0 * n)).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class() -> SignalClass {
        SignalClass { n_bands: 6, band_width: 50e6, nyquist_rate: 10e9 }
    }

    #[test]
    fn option_a() {
        let fp = 10e9 / 195.0;
        let p = derive_params(&class(), fp, fp).unwrap();
        assert_eq!((p.l_zero, p.n_slices, p.m_min_alternations), (97, 195, 195));
        assert_eq!(p.min_channels_blind, 12);
        assert!((p.total_rate / 1e6 - 615.0).abs() < 0.5);
    }

    #[test]
    fn option_b() {
        let fp = 10e9 / 195.0;
        let p = derive_params(&class(), fp, 5.0 * fp).unwrap();
        assert_eq!((p.l_zero, p.n_slices, p.m_min_alternations), (99, 199, 195));
        assert_eq!(p.min_physical_channels, 3);
        assert!((p.total_rate / 1e6 - 770.0).abs() < 1.0);
    }

    #[test]
    fn single_slice() {
        let p = derive_params(&class(), 10e9, 10e9).unwrap();
        assert_eq!((p.l_zero, p.n_slices, p.m_min_alternations), (0, 1, 1));
    }

    #[test]
    fn rejections_name_conditions() {
        let err = derive_params(&class(), 100e6, 50e6).unwrap_err();
        assert_eq!(err.code(), Condition::SamplingAtLeastMixing.code());
        let err = derive_params(&class(), 40e6, 40e6).unwrap_err();
        assert_eq!(err.code(), Condition::MixingAtLeastBandWidth.code());
        let err = derive_params(&class(), 100e6, 200e6).unwrap_err();
        assert_eq!(err.code(), Condition::OddRateRatio.code());
    }

    #[test]
    fn heuristic_is_about_thirty() {
        let h = heuristic_channels(6, 195);
        assert!((h - 29.0).abs() < 1.0, "{h}");
    }
}
