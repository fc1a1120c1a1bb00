use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::frontend::{derive_params, heuristic_channels, DerivedParams, SignalClass};

/// Design summary for one signal class and front-end rate pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    pub params: DerivedParams,
    pub alternations: usize,
    /// `4N log10(M / 2N)` for the given `M`.
    pub heuristic_channels: f64,
}

pub fn params_report(class: &SignalClass, mixing_rate: f64, sampling_rate: f64, alternations: usize) -> Result<ParamsReport> {
    let params = derive_params(class, mixing_rate, sampling_rate)?;
    Ok(ParamsReport { params, alternations, heuristic_channels: heuristic_channels(class.n_bands, alternations) })
}

impl fmt::Display for ParamsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        let mhz = |v: f64| v / 1e6;
        writeln!(f, "N={}", p.class.n_bands)?;
        writeln!(f, "B={:.3} MHz", mhz(p.class.band_width))?;
        writeln!(f, "f_NYQ={:.3} MHz", mhz(p.class.nyquist_rate))?;
        writeln!(f, "f_p={:.3} MHz", mhz(p.mixing_rate))?;
        writeln!(f, "f_s={:.3} MHz", mhz(p.sampling_rate))?;
        writeln!(f, "q={}", p.rate_ratio)?;
        writeln!(f, "L0={}", p.l_zero)?;
        writeln!(f, "L={}", p.n_slices)?;
        writeln!(f, "M={}", self.alternations)?;
        writeln!(f, "M_min={}", p.m_min_alternations)?;
        writeln!(f, "min_channels_blind={}", p.min_channels_blind)?;
        writeln!(f, "min_channels_nonblind={}", p.min_channels_nonblind)?;
        writeln!(f, "min_physical_channels={}", p.min_physical_channels)?;
        writeln!(f, "min_total_rate={:.3} MHz", mhz(p.total_rate))?;
        write!(f, "heuristic_channels={:.1}", self.heuristic_channels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn option_a_lines() {
        let class = SignalClass { n_bands: 6, band_width: 50e6, nyquist_rate: 10e9 };
        let fp = 10e9 / 195.0;
        let text = params_report(&class, fp, fp, 195).unwrap().to_string();
        for needle in ["L=195", "L0=97", "M_min=195", "min_channels_blind=12", "min_total_rate=615.385 MHz"] {
            assert!(text.contains(needle), "{needle} missing from\n{text}");
        }
    }
}
