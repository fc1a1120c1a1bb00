//! The analog acquisition chain: mixing waveforms, the sensing matrix,
//! parameter rules and the simulated mix / lowpass / sample pipeline.

mod matrix;
mod params;
mod sampling;
mod waveform;

pub use matrix::{build_sensing_matrix, calibrated_matrix, SensingMatrix};
pub use params::{derive_params, heuristic_channels, ConditionReport, DerivedParams, SignalClass};
pub use sampling::{quantize, simulate_sampling, FrontEnd, FrontEndOptions, SampleStream};
pub use waveform::{
    chip_coefficient, dense_period, fourier_coeff, fourier_coeffs, gen_sign_matrix, MixingModel, PeriodicWaveform,
    SignMatrix, SignMode,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::as_integer;
use crate::error::{Condition, Error, Result};

/// System parameters of an `m`-channel converter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwcConfig {
    pub n_channels: usize,
    pub alternations: usize,
    pub mixing_rate: f64,
    pub sampling_rate: f64,
    pub rate_ratio: usize,
    pub sign_matrix: SignMatrix,
    /// Per-edge offsets in chip units, repeated every period. `None` means
    /// ideal edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_jitter: Option<Vec<f64>>,
}

impl MwcConfig {
    pub fn new(sign_matrix: SignMatrix, mixing_rate: f64, rate_ratio: usize) -> Result<Self> {
        let config = MwcConfig {
            n_channels: sign_matrix.n_rows(),
            alternations: sign_matrix.n_cols(),
            mixing_rate,
            sampling_rate: mixing_rate * rate_ratio as f64,
            rate_ratio,
            sign_matrix,
            edge_jitter: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_jitter(mut self, jitter: Vec<f64>) -> Result<Self> {
        PeriodicWaveform::jittered(self.sign_matrix.row(0), &jitter)?;
        self.edge_jitter = Some(jitter);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sign_matrix.n_rows() != self.n_channels || self.sign_matrix.n_cols() != self.alternations {
            return Err(Error::InvalidArgument(format!(
                "sign matrix is {}x{}, config declares {}x{}",
                self.sign_matrix.n_rows(),
                self.sign_matrix.n_cols(),
                self.n_channels,
                self.alternations
            )));
        }
        if !(self.mixing_rate > 0.0) {
            return Err(Error::InvalidArgument("mixing rate must be positive".into()));
        }
        if self.rate_ratio % 2 == 0 {
            return Err(Error::condition(Condition::OddRateRatio, format!("q = {}", self.rate_ratio)));
        }
        match as_integer(self.sampling_rate / self.mixing_rate) {
            Some(q) if q == self.rate_ratio as i64 => {}
            _ => {
                return Err(Error::condition(
                    Condition::OddRateRatio,
                    format!("f_s / f_p = {:.6} does not equal q = {}", self.sampling_rate / self.mixing_rate, self.rate_ratio),
                ))
            }
        }
        if let Some(j) = &self.edge_jitter {
            PeriodicWaveform::jittered(self.sign_matrix.row(0), j)?;
        }
        Ok(())
    }

    /// Configuration restricted to the first `count` channels.
    pub fn with_channels(&self, count: usize) -> MwcConfig {
        let sign_matrix = self.sign_matrix.truncated(count);
        MwcConfig { n_channels: sign_matrix.n_rows(), sign_matrix, ..self.clone() }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.mixing_rate
    }

    pub fn waveform(&self, channel: usize) -> PeriodicWaveform {
        let row = self.sign_matrix.row(channel);
        match &self.edge_jitter {
            Some(j) => PeriodicWaveform::jittered(row, j).expect("jitter validated"),
            None => PeriodicWaveform::ideal(row),
        }
    }

    /// Fourier coefficient `c_{i,l}` of the actual waveform of channel `i`.
    pub fn coefficient(&self, channel: usize, l: i64) -> Complex64 {
        match &self.edge_jitter {
            Some(_) => self.waveform(channel).coefficient(l),
            None => fourier_coeff(self.sign_matrix.row(channel), l),
        }
    }
}

/// Largest dense grid step not above `T / 5` that divides both the chip
/// duration `T_p / M` and the sampling period `T_s`.
pub fn derive_grid(nyquist_rate: f64, alternations: usize, mixing_rate: f64, rate_ratio: usize) -> f64 {
    let chip = 1.0 / (mixing_rate * alternations as f64);
    let target = 1.0 / (5.0 * nyquist_rate);
    let mut k = (chip / target * (1.0 - 1e-9)).ceil().max(1.0) as usize;
    while (alternations * k) % rate_ratio != 0 {
        k += 1;
    }
    chip / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedTree;

    #[test]
    fn wideband_grid_is_a_fifth_of_nyquist() {
        let step = derive_grid(10e9, 195, 10e9 / 195.0, 1);
        assert!((step * 10e9 * 5.0 - 1.0).abs() < 1e-9);
        let step = derive_grid(10e9, 195, 10e9 / 195.0, 5);
        assert!((step * 10e9 * 5.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_divides_chip_and_sampling_period() {
        for (m, q) in [(15, 3), (21, 5), (19, 1), (31, 7)] {
            let fp = 1e9 / m as f64;
            let step = derive_grid(1e9, m, fp, q);
            let chip = 1.0 / (fp * m as f64);
            assert!(as_integer(chip / step).is_some());
            assert!(as_integer(1.0 / (fp * q as f64) / step).is_some());
            assert!(step <= 0.2e-9 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn config_rejects_even_ratio_and_shape_mismatch() {
        let s = gen_sign_matrix(3, 7, &mut SeedTree::new(1).rng(), SignMode::Independent).unwrap();
        assert!(MwcConfig::new(s.clone(), 1e6, 2).is_err());
        let mut c = MwcConfig::new(s, 1e6, 3).unwrap();
        c.n_channels = 4;
        assert!(c.validate().is_err());
    }
}
