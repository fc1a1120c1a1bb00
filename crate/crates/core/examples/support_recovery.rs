//! Blind support recovery: the frame `Q = Σ y y^H` is decomposed and SOMP
//! picks the slices that explain it, in the noiseless case and at 15 dB.

use mwc_lab::ctf::{recover_support, support_success, SompOptions};
use mwc_lab::frontend::{
    build_sensing_matrix, derive_grid, derive_params, gen_sign_matrix, FrontEnd, FrontEndOptions, MwcConfig, SignMode,
    SignalClass,
};
use mwc_lab::reconstruct::band_support;
use mwc_lab::seed::SeedTree;
use mwc_lab::signal::{add_awgn, draw_carriers, synth_multiband, MultibandSpec, TimeGrid};

fn main() -> mwc_lab::Result<()> {
    let (nyquist, band_width, alternations, m) = (1e9, 20e6, 19, 24);
    let fp = nyquist / alternations as f64;
    let class = SignalClass { n_bands: 6, band_width, nyquist_rate: nyquist };
    let params = derive_params(&class, fp, fp)?;
    let step = derive_grid(nyquist, alternations, fp, 1);
    let signs = gen_sign_matrix(m, alternations, &mut SeedTree::new(2).rng(), SignMode::Independent)?;
    let config = MwcConfig::new(signs, fp, 1)?;
    let frontend = FrontEnd::new(&config, step, FrontEndOptions { fir_periods: 48, ..Default::default() })?;
    let a = build_sensing_matrix(&config, &params)?.a;

    for trial in 0..4u64 {
        let tree = SeedTree::new(100).child(trial);
        let carriers = draw_carriers(3, band_width, nyquist, &mut tree.named("carriers").rng())?;
        let mut spec = MultibandSpec::three_pairs(band_width, nyquist, carriers);
        spec.offsets.iter_mut().for_each(|t| *t += 1.5e-6);
        let clean = synth_multiband(&spec, TimeGrid::window(0.0, 4e-6, step))?;
        let truth = band_support(&spec.bands(), fp, params.l_zero);
        println!("trial {trial}: truth {:?}", truth.offsets(params.l_zero));
        for snr in [None, Some(15.0)] {
            let x = match snr {
                Some(db) => add_awgn(&clean, db, &mut tree.named("noise").rng())?,
                None => clean.clone(),
            };
            let y = frontend.sample(&x)?;
            let options = SompOptions { residual_tol: 1e-2, ..SompOptions::pairs(6) };
            let (estimate, frame) = recover_support(&y, &a, 0..y.len(), 1e-9, options)?;
            println!(
                "  {:>9}: rank {:>2}, estimate {:?}, success {}",
                snr.map_or("noiseless".to_string(), |s| format!("{s} dB")),
                frame.kept_rank,
                estimate.offsets(params.l_zero),
                support_success(&a, &estimate, &truth)
            );
        }
    }
    Ok(())
}
