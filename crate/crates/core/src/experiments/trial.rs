use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::plan::{ResolvedSetup, SignalKind, SuccessRule, SweepPlan};
use crate::ctf::{recover_support, support_success, SompOptions, SupportSet};
use crate::error::Result;
use crate::expander::{expand_channel, expanded_row_coeffs, virtual_channel_weight, virtual_rows};
use crate::frontend::{
    build_sensing_matrix, derive_grid, derive_params, gen_sign_matrix, quantize, DerivedParams, FrontEnd,
    FrontEndOptions, MixingModel, MwcConfig, SampleStream, SignMatrix, SignMode, SignalClass,
};
use crate::linalg::CMatrix;
use crate::reconstruct::band_support;
use crate::seed::SeedTree;
use crate::signal::{
    add_awgn, draw_carriers, synth_multiband, synth_qpsk, DenseSignal, MultibandSpec, QpskSpec, TimeGrid,
    PULSE_SPAN_SYMBOLS,
};

/// The transmitted signal of one trial and its true slice support.
#[derive(Debug, Clone)]
pub struct TrialSignal {
    pub signal: DenseSignal,
    pub bands: Vec<(f64, f64)>,
    pub truth: SupportSet,
}

/// Draws carriers and content for one trial and synthesizes it on `grid`.
pub fn draw_signal(setup: &ResolvedSetup, params: &DerivedParams, grid: TimeGrid, tree: SeedTree) -> Result<TrialSignal> {
    let pairs = setup.n_bands / 2;
    let carriers = draw_carriers(pairs, setup.band_width, setup.nyquist_rate, &mut tree.named("carriers").rng())?;
    let (start, end) = (grid.start, grid.end());
    let (signal, bands) = match setup.signal {
        SignalKind::Multiband => {
            let mut spec = MultibandSpec::three_pairs(setup.band_width, setup.nyquist_rate, carriers);
            spec.n_bands = setup.n_bands;
            spec.energies = (1..=pairs).map(|e| e as f64).collect();
            // Offsets keep their place relative to the centre of the window.
            let shift = start + (end - start - 1e-6) / 2.0;
            spec.offsets = (0..pairs).map(|i| [0.4e-6, 0.7e-6, 0.2e-6][i % 3] + shift).collect();
            (synth_multiband(&spec, grid)?, spec.bands())
        }
        SignalKind::Qpsk => {
            let mut rng = tree.named("symbols").rng();
            let mut total = DenseSignal::zeros(grid);
            let mut bands = Vec::with_capacity(setup.n_bands);
            for (i, &fc) in carriers.iter().enumerate() {
                let pad = PULSE_SPAN_SYMBOLS * 2.0 / setup.band_width;
                let spec = QpskSpec::random((i + 1) as f64, setup.band_width, fc, start - pad, end + pad, &mut rng);
                let (lo, hi) = spec.occupied_band();
                bands.push((lo, hi));
                bands.push((-hi, -lo));
                total.accumulate(&synth_qpsk(&spec, grid)?)?;
            }
            (total, bands)
        }
    };
    let truth = band_support(&bands, params.mixing_rate, params.l_zero);
    Ok(TrialSignal { signal, bands, truth })
}

/// One sign-matrix variant of a sweep and everything fixed across trials.
#[derive(Debug, Clone)]
pub struct Variant {
    pub id: String,
    pub config: MwcConfig,
    pub frontend: FrontEnd,
    /// Rows of the recovery matrix for all channels (virtual rows when
    /// expanding).
    pub matrix: CMatrix,
    /// Direct front-end at rate `f_p` that builds virtual channels without
    /// expansion.
    pub direct: Option<FrontEnd>,
}

/// Plan-level state shared by every trial.
#[derive(Debug, Clone)]
pub struct SweepContext {
    pub plan: SweepPlan,
    pub setup: ResolvedSetup,
    pub params: DerivedParams,
    pub grid: TimeGrid,
    pub variants: Vec<Variant>,
}

impl SweepContext {
    pub fn new(plan: &SweepPlan) -> Result<Self> {
        plan.validate()?;
        let setup = plan.resolved();
        let q = setup.rate_ratio;
        let class = SignalClass { n_bands: setup.n_bands, band_width: setup.band_width, nyquist_rate: setup.nyquist_rate };
        let params = derive_params(&class, setup.mixing_rate, q as f64 * setup.mixing_rate)?;
        let step = derive_grid(setup.nyquist_rate, setup.alternations, setup.mixing_rate, q);
        let grid = TimeGrid::window(0.0, setup.window, step);
        let options = FrontEndOptions { fir_periods: setup.fir_periods, ..Default::default() };
        let sign_seed = SeedTree::new(plan.seed).named("signs");
        let modes: Vec<(String, SignMode)> = if setup.register_grid.is_empty() {
            vec![(plan.experiment_id.to_string(), SignMode::Independent)]
        } else {
            setup
                .register_grid
                .iter()
                .map(|&r| {
                    (format!("{}_r{r}", plan.experiment_id), SignMode::SharedRegister { registers: r, shift: setup.register_shift })
                })
                .collect()
        };
        let mut variants = Vec::new();
        for (id, mode) in modes {
            // Rows beyond the largest grid value are never read.
            let used = plan.channel_grid.iter().copied().max().unwrap_or(setup.channels);
            let signs = gen_sign_matrix(setup.channels, setup.alternations, &mut sign_seed.rng(), mode)?.truncated(used);
            let config = MwcConfig::new(signs.clone(), setup.mixing_rate, q)?;
            let frontend = FrontEnd::new(&config, step, options)?;
            let a = build_sensing_matrix(&config, &params)?;
            let matrix = if q > 1 { expanded_row_coeffs(&a, q) } else { a.a.clone() };
            let direct = if setup.compare_direct && q > 1 {
                Some(FrontEnd::new(&MwcConfig::new(signs, setup.mixing_rate, 1)?, step, options)?)
            } else {
                None
            };
            variants.push(Variant { id: id.clone(), config: config.clone(), frontend: frontend.clone(), matrix: matrix.clone(), direct: None });
            if let Some(direct) = direct {
                variants.push(Variant { id: format!("{id}_direct"), config, frontend, matrix, direct: Some(direct) });
            }
        }
        Ok(SweepContext { plan: plan.clone(), setup, params, grid, variants })
    }

    /// Rows of the recovery matrix per physical channel.
    pub fn rows_per_channel(&self) -> usize {
        self.setup.rate_ratio
    }

    pub fn sign_matrix(&self, variant: usize) -> &SignMatrix {
        &self.variants[variant].config.sign_matrix
    }

    /// Seed tree of trial `t`.
    pub fn trial_seed(&self, trial: usize) -> SeedTree {
        SeedTree::new(self.plan.seed).named("trials").child(trial as u64)
    }

    /// Grid cells in output order: variant, channels, SNR, bits.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for variant in 0..self.variants.len() {
            for &m in &self.plan.channel_grid {
                for &snr_db in &self.plan.snr_grid {
                    for &bits in &self.plan.bits_grid {
                        out.push(Cell { variant, m, snr_db, bits });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub variant: usize,
    pub m: usize,
    pub snr_db: Option<f64>,
    pub bits: Option<u32>,
}

/// Result of one trial in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub cell: Cell,
    pub success: bool,
    /// `None` when recovery raised an error (counted as a failure).
    pub estimate: Option<SupportSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub truth: SupportSet,
    pub cells: Vec<CellOutcome>,
}

/// Samples of all channels of a variant; physical channels, or virtual
/// channels for a direct variant.
fn acquire(ctx: &SweepContext, variant: &Variant, x: &DenseSignal) -> Result<SampleStream> {
    match &variant.direct {
        None => variant.frontend.sample(x),
        Some(direct) => {
            let q = ctx.setup.rate_ratio;
            let rows: Vec<Vec<Complex64>> = virtual_rows(variant.config.n_channels, q)
                .into_iter()
                .map(|row| {
                    let weight = virtual_channel_weight(&variant.config, row, direct.period_samples(), MixingModel::default());
                    direct.sample_weighted(x, &weight)
                })
                .collect::<Result<_>>()?;
            let (first, _) = direct.output_range(x)?;
            SampleStream::from_rows(&rows, ctx.setup.mixing_rate, first)
        }
    }
}

/// Measurement stream seen by recovery with the first `m` physical channels.
fn measurements(ctx: &SweepContext, variant: &Variant, full: &SampleStream, m: usize, bits: Option<u32>) -> Result<SampleStream> {
    let q = ctx.setup.rate_ratio;
    if variant.direct.is_some() {
        return Ok(quantize(&full.with_channels(m * q), bits));
    }
    let physical = quantize(&full.with_channels(m), bits);
    if q == 1 {
        return Ok(physical);
    }
    Ok(expand_channel(&physical, q, ctx.setup.mixing_rate, ctx.setup.expander_order)?.stream)
}

/// Runs one trial across every cell.
pub fn run_trial(ctx: &SweepContext, tree: SeedTree) -> Result<TrialOutcome> {
    let drawn = draw_signal(&ctx.setup, &ctx.params, ctx.grid, tree)?;
    let q = ctx.rows_per_channel();
    let options = SompOptions { residual_tol: ctx.setup.residual_tol, ..SompOptions::pairs(ctx.setup.max_pairs) };
    let mut cells = Vec::new();
    let cell_list = ctx.cells();
    for (snr_index, &snr_db) in ctx.plan.snr_grid.iter().enumerate() {
        let x = match snr_db {
            Some(s) => add_awgn(&drawn.signal, s, &mut tree.named("noise").child(snr_index as u64).rng())?,
            None => drawn.signal.clone(),
        };
        for (v, variant) in ctx.variants.iter().enumerate() {
            let full = acquire(ctx, variant, &x)?;
            for cell in cell_list.iter().filter(|c| c.variant == v && c.snr_db == snr_db) {
                let y = measurements(ctx, variant, &full, cell.m, cell.bits)?;
                let a: DMatrix<Complex64> = variant.matrix.rows(0, cell.m * q).into_owned();
                let estimate = recover_support(&y, &a, 0..y.len(), ctx.setup.eigen_threshold, options).ok().map(|(s, _)| s);
                let success = match (&estimate, ctx.setup.success) {
                    (Some(s), SuccessRule::Superset) => support_success(&a, s, &drawn.truth),
                    (Some(s), SuccessRule::Exact) => *s == drawn.truth,
                    (None, _) => false,
                };
                cells.push(CellOutcome { cell: *cell, success, estimate });
            }
        }
    }
    // Restore the plan's cell order.
    cells.sort_by_key(|c| cell_list.iter().position(|k| k == &c.cell).expect("known cell"));
    Ok(TrialOutcome { seed: tree.value(), truth: drawn.truth, cells })
}
