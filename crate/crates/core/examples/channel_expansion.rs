//! Fewer, faster channels: four physical channels sampled at `3 f_p` are
//! split into twelve virtual channels at `f_p`, and the support is found
//! from the expanded system.

use mwc_lab::ctf::{recover_support, support_success, SompOptions};
use mwc_lab::expander::{expand_channel, expanded_row_coeffs};
use mwc_lab::frontend::{
    build_sensing_matrix, derive_grid, derive_params, gen_sign_matrix, FrontEnd, FrontEndOptions, MwcConfig, SignMode,
    SignalClass,
};
use mwc_lab::reconstruct::band_support;
use mwc_lab::seed::SeedTree;
use mwc_lab::signal::{draw_carriers, synth_multiband, MultibandSpec, TimeGrid};

fn main() -> mwc_lab::Result<()> {
    let (nyquist, band_width, alternations, q) = (1e9, 20e6, 19, 3);
    let fp = nyquist / alternations as f64;
    let class = SignalClass { n_bands: 6, band_width, nyquist_rate: nyquist };
    let params = derive_params(&class, fp, q as f64 * fp)?;
    let tree = SeedTree::new(5);
    let signs = gen_sign_matrix(4, alternations, &mut tree.named("signs").rng(), SignMode::Independent)?;
    let config = MwcConfig::new(signs, fp, q)?;
    let report = params.check_config(&config, true);
    println!("conditions with expansion hold: {}", report.all_hold());

    let carriers = draw_carriers(3, band_width, nyquist, &mut tree.named("carriers").rng())?;
    let mut spec = MultibandSpec::three_pairs(band_width, nyquist, carriers);
    spec.offsets.iter_mut().for_each(|t| *t += 1.5e-6);
    let step = derive_grid(nyquist, alternations, fp, q);
    let x = synth_multiband(&spec, TimeGrid::window(0.0, 4e-6, step))?;
    let frontend = FrontEnd::new(&config, step, FrontEndOptions { fir_periods: 48, ..Default::default() })?;
    let y = frontend.sample(&x)?;

    let expanded = expand_channel(&y, q, fp, 100)?;
    println!(
        "{} channels at {:.1} MHz -> {} rows at {:.1} MHz",
        y.channel_count(),
        y.rate / 1e6,
        expanded.stream.channel_count(),
        expanded.stream.rate / 1e6
    );
    for row in expanded.row_map.iter().take(q) {
        println!("  row: channel {} shift {:+}", row.channel, row.shift);
    }

    let a = expanded_row_coeffs(&build_sensing_matrix(&config, &params)?, q);
    let options = SompOptions { residual_tol: 1e-2, ..SompOptions::pairs(6) };
    let stream = &expanded.stream;
    let (estimate, _) = recover_support(stream, &a, 0..stream.len(), 1e-9, options)?;
    let truth = band_support(&spec.bands(), fp, params.l_zero);
    println!("truth    {:?}", truth.offsets(params.l_zero));
    println!("estimate {:?}", estimate.offsets(params.l_zero));
    println!("success: {}", support_success(&a, &estimate, &truth));
    Ok(())
}
