//! From samples back to the signal: slices recovered with the pseudo-inverse
//! on the known support, then modulated and summed at the Nyquist rate.

use mwc_lab::frontend::{
    build_sensing_matrix, derive_grid, derive_params, gen_sign_matrix, FrontEnd, FrontEndOptions, MwcConfig, SignMode,
    SignalClass,
};
use mwc_lab::reconstruct::{band_support, rebuild_nyquist, recover_slices};
use mwc_lab::seed::SeedTree;
use mwc_lab::signal::{draw_carriers, synth_multiband, MultibandSpec, TimeGrid};

fn main() -> mwc_lab::Result<()> {
    let (nyquist, band_width, alternations, m) = (1e9, 20e6, 19, 24);
    let fp = nyquist / alternations as f64;
    let class = SignalClass { n_bands: 6, band_width, nyquist_rate: nyquist };
    let params = derive_params(&class, fp, fp)?;
    let step = derive_grid(nyquist, alternations, fp, 1);
    let tree = SeedTree::new(8);

    let carriers = draw_carriers(3, band_width, nyquist, &mut tree.named("carriers").rng())?;
    let mut spec = MultibandSpec::three_pairs(band_width, nyquist, carriers);
    spec.offsets.iter_mut().for_each(|t| *t += 5e-6);
    let x = synth_multiband(&spec, TimeGrid::window(0.0, 10e-6, step))?;

    let signs = gen_sign_matrix(m, alternations, &mut tree.named("signs").rng(), SignMode::Independent)?;
    let config = MwcConfig::new(signs, fp, 1)?;
    let frontend = FrontEnd::new(&config, step, FrontEndOptions { fir_periods: 192, ..Default::default() })?;
    let y = frontend.sample(&x)?;
    let a = build_sensing_matrix(&config, &params)?.a;

    let support = band_support(&spec.bands(), fp, params.l_zero);
    let slices = recover_slices(&y, &a, &support)?;
    let rebuilt = rebuild_nyquist(&slices, &params)?;
    let grid = TimeGrid { start: rebuilt.time(0), step: 1.0 / rebuilt.rate, len: rebuilt.samples.len() };
    let truth = synth_multiband(&spec, grid)?;

    let (err, energy) = rebuilt
        .samples
        .iter()
        .zip(&truth.samples)
        .fold((0.0, 0.0), |(e, r), (a, b)| (e + (a - b) * (a - b), r + b * b));
    println!("active slices {:?}", support.offsets(params.l_zero));
    println!("{} samples rebuilt at {:.0} MHz from {} at {:.2} MHz", rebuilt.samples.len(), rebuilt.rate / 1e6, y.len(), y.rate / 1e6);
    println!("NMSE against the input: {:.1} dB", 10.0 * (err / energy).log10());
    println!("imaginary residual: {:.1e}", rebuilt.imag_ratio);
    Ok(())
}
