use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ctf::DEFAULT_EIGEN_THRESHOLD;
use crate::error::{Error, Result};
use crate::expander::DEFAULT_EXPANDER_ORDER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// Success rate over channels and SNR with independent signs.
    Fig7,
    /// Shared shift-register sign patterns.
    Fig8,
    /// Channels sampled at `q f_p` and expanded digitally.
    Fig9,
    /// Quantized samples of QPSK transmissions.
    Fig11,
    /// Streaming recovery with a support that changes over time.
    Timevary,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Fig7 => "fig7",
            ExperimentKind::Fig8 => "fig8",
            ExperimentKind::Fig9 => "fig9",
            ExperimentKind::Fig11 => "fig11",
            ExperimentKind::Timevary => "timevary",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Multiband,
    Qpsk,
}

/// When a recovered support counts as correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuccessRule {
    /// `Ŝ ⊇ S` with `A_Ŝ` of full column rank.
    Superset,
    /// `Ŝ = S`.
    Exact,
}

/// Optional overrides of the experiment defaults. Every field left out
/// takes the value of the experiment's standard setup.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Setup {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nyquist_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_bands: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixing_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_ratio: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub register_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub register_shift: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fir_periods: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expander_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_direct: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigen_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success: Option<SuccessRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epoch_duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_ctf: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_mem: Option<usize>,
}

/// Fully specified experiment setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSetup {
    pub nyquist_rate: f64,
    pub band_width: f64,
    pub n_bands: usize,
    pub signal: SignalKind,
    pub window: f64,
    pub channels: usize,
    pub alternations: usize,
    pub mixing_rate: f64,
    pub rate_ratio: usize,
    /// Register counts for shared-register sign matrices; empty means
    /// independent rows only.
    pub register_grid: Vec<usize>,
    pub register_shift: usize,
    pub fir_periods: usize,
    pub expander_order: usize,
    pub compare_direct: bool,
    pub eigen_threshold: f64,
    pub residual_tol: f64,
    pub max_pairs: usize,
    pub success: SuccessRule,
    pub epochs: usize,
    pub epoch_duration: f64,
    pub n_ctf: usize,
    pub n_mem: usize,
}

impl Setup {
    pub fn resolve(&self, kind: ExperimentKind) -> ResolvedSetup {
        let nyquist_rate = self.nyquist_rate.unwrap_or(10e9);
        let alternations = self.alternations.unwrap_or(195);
        let n_bands = self.n_bands.unwrap_or(6);
        let (signal, band_width, window, channels, rate_ratio) = match kind {
            ExperimentKind::Fig7 | ExperimentKind::Fig8 => (SignalKind::Multiband, 50e6, 1e-6, 100, 1),
            ExperimentKind::Fig9 => (SignalKind::Multiband, 50e6, 4e-6, 20, 5),
            ExperimentKind::Fig11 => (SignalKind::Qpsk, 50e6, 1e-6, 100, 1),
            ExperimentKind::Timevary => (SignalKind::Qpsk, 30e6, 0.0, 40, 1),
        };
        let register_grid = match kind {
            ExperimentKind::Fig8 => vec![20, 100],
            _ => Vec::new(),
        };
        ResolvedSetup {
            nyquist_rate,
            band_width: self.band_width.unwrap_or(band_width),
            n_bands,
            signal: self.signal.unwrap_or(signal),
            window: self.window.unwrap_or(window),
            channels: self.channels.unwrap_or(channels),
            alternations,
            mixing_rate: self.mixing_rate.unwrap_or(nyquist_rate / alternations as f64),
            rate_ratio: self.rate_ratio.unwrap_or(rate_ratio),
            register_grid: self.register_grid.clone().unwrap_or(register_grid),
            register_shift: self.register_shift.unwrap_or(5),
            fir_periods: self.fir_periods.unwrap_or(12),
            expander_order: self.expander_order.unwrap_or(DEFAULT_EXPANDER_ORDER),
            compare_direct: self.compare_direct.unwrap_or(false),
            eigen_threshold: self.eigen_threshold.unwrap_or(DEFAULT_EIGEN_THRESHOLD),
            residual_tol: self.residual_tol.unwrap_or(1e-6),
            max_pairs: self.max_pairs.unwrap_or(n_bands),
            success: self.success.unwrap_or(SuccessRule::Superset),
            epochs: self.epochs.unwrap_or(5),
            epoch_duration: self.epoch_duration.unwrap_or(10e-6),
            n_ctf: self.n_ctf.unwrap_or(50),
            n_mem: self.n_mem.unwrap_or(20),
        }
    }
}

/// A Monte-Carlo plan: the grid, the trial count and the root seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub experiment_id: ExperimentKind,
    pub trials: usize,
    #[serde(default = "default_channel_grid")]
    pub channel_grid: Vec<usize>,
    /// SNR values in dB; `null` is the noiseless case.
    #[serde(default = "default_snr_grid")]
    pub snr_grid: Vec<Option<f64>>,
    /// Quantizer bit depths; `null` skips quantization.
    #[serde(default = "default_bits_grid")]
    pub bits_grid: Vec<Option<u32>>,
    pub seed: u64,
    #[serde(default)]
    pub setup: Setup,
}

fn default_channel_grid() -> Vec<usize> {
    vec![40]
}

fn default_snr_grid() -> Vec<Option<f64>> {
    vec![Some(25.0)]
}

fn default_bits_grid() -> Vec<Option<u32>> {
    vec![None]
}

impl SweepPlan {
    pub fn new(experiment_id: ExperimentKind, trials: usize, seed: u64) -> Self {
        SweepPlan {
            experiment_id,
            trials,
            channel_grid: default_channel_grid(),
            snr_grid: default_snr_grid(),
            bits_grid: default_bits_grid(),
            seed,
            setup: Setup::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: SweepPlan = serde_json::from_str(text).map_err(|e| Error::Parse(format!("plan: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn resolved(&self) -> ResolvedSetup {
        self.setup.resolve(self.experiment_id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("plan needs at least one trial".into()));
        }
        if self.channel_grid.is_empty() || self.snr_grid.is_empty() || self.bits_grid.is_empty() {
            return Err(Error::InvalidArgument("plan grids must be nonempty".into()));
        }
        if self.bits_grid.iter().flatten().any(|&b| b == 0) {
            return Err(Error::InvalidArgument("quantizer bit depth must be at least 1".into()));
        }
        if self.snr_grid.iter().flatten().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("SNR values must be finite; use null for noiseless".into()));
        }
        let setup = self.resolved();
        if let Some(&m) = self.channel_grid.iter().find(|&&m| m == 0 || m > setup.channels) {
            return Err(Error::InvalidArgument(format!("channel count {m} outside 1..={}", setup.channels)));
        }
        if let Some(&r) = setup.register_grid.iter().find(|&&r| r == 0 || r > setup.channels) {
            return Err(Error::InvalidArgument(format!("register count {r} outside 1..={}", setup.channels)));
        }
        if setup.n_bands % 2 != 0 || setup.n_bands == 0 {
            return Err(Error::InvalidArgument(format!("band count {} must be even and positive", setup.n_bands)));
        }
        if !(setup.window > 0.0) && self.experiment_id != ExperimentKind::Timevary {
            return Err(Error::InvalidArgument("observation window must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_plan_parses_with_defaults() {
        let p = SweepPlan::from_json(r#"{"experiment_id":"fig7","trials":5,"seed":3}"#).unwrap();
        assert_eq!(p.channel_grid, vec![40]);
        let s = p.resolved();
        assert_eq!((s.channels, s.alternations, s.rate_ratio), (100, 195, 1));
        assert!((s.mixing_rate - 10e9 / 195.0).abs() < 1e-3);
    }

    #[test]
    fn kind_defaults_differ() {
        let s = Setup::default().resolve(ExperimentKind::Fig9);
        assert_eq!((s.rate_ratio, s.channels), (5, 20));
        assert_eq!(Setup::default().resolve(ExperimentKind::Fig8).register_grid, vec![20, 100]);
    }

    #[test]
    fn malformed_plans_are_refused() {
        assert!(SweepPlan::from_json(r#"{"experiment_id":"fig7","trials":0,"seed":3}"#).is_err());
        assert!(SweepPlan::from_json(r#"{"experiment_id":"fig12","trials":1,"seed":3}"#).is_err());
        assert!(SweepPlan::from_json(r#"{"experiment_id":"fig7","trials":1,"seed":3,"extra":1}"#).is_err());
        assert!(SweepPlan::from_json(r#"{"experiment_id":"fig7","trials":1,"seed":3,"channel_grid":[]}"#).is_err());
        assert!(SweepPlan::from_json(r#"{"experiment_id":"fig7","trials":1,"seed":3,"channel_grid":[101]}"#).is_err());
    }

    #[test]
    fn plan_roundtrips() {
        let mut p = SweepPlan::new(ExperimentKind::Fig11, 4, 9);
        p.bits_grid = vec![Some(1), Some(8), None];
        p.snr_grid = vec![None];
        assert_eq!(SweepPlan::from_json(&p.to_json()).unwrap(), p);
    }
}
