//! Waveforms whose transitions are offset from the ideal chip grid: the
//! sensing matrix recomputed from the measured edges restores recovery that
//! the ideal matrix degrades.

use mwc_lab::dsp::nmse_db;
use mwc_lab::frontend::{
    build_sensing_matrix, calibrated_matrix, derive_grid, derive_params, gen_sign_matrix, FrontEnd, FrontEndOptions,
    MwcConfig, SignMode, SignalClass,
};
use mwc_lab::reconstruct::{band_support, recover_slices, reference_slices};
use mwc_lab::seed::SeedTree;
use mwc_lab::signal::{draw_carriers, synth_multiband, MultibandSpec, TimeGrid};
use rand::Rng;

fn main() -> mwc_lab::Result<()> {
    let (nyquist, band_width, alternations, m) = (1e9, 20e6, 19, 16);
    let fp = nyquist / alternations as f64;
    let class = SignalClass { n_bands: 6, band_width, nyquist_rate: nyquist };
    let params = derive_params(&class, fp, fp)?;
    let step = derive_grid(nyquist, alternations, fp, 1);
    let tree = SeedTree::new(12);

    let signs = gen_sign_matrix(m, alternations, &mut tree.named("signs").rng(), SignMode::Independent)?;
    let mut rng = tree.named("jitter").rng();
    let jitter: Vec<f64> = (0..alternations).map(|_| 0.3 * (rng.random::<f64>() - 0.5)).collect();
    let config = MwcConfig::new(signs, fp, 1)?.with_jitter(jitter)?;

    let ideal = build_sensing_matrix(&config, &params)?.a;
    let calibrated = calibrated_matrix(&config, params.l_zero);
    println!("largest coefficient change: {:.3e}", (&calibrated - &ideal).camax());

    let carriers = draw_carriers(3, band_width, nyquist, &mut tree.named("carriers").rng())?;
    let mut spec = MultibandSpec::three_pairs(band_width, nyquist, carriers);
    spec.offsets.iter_mut().for_each(|t| *t += 1.5e-6);
    let x = synth_multiband(&spec, TimeGrid::window(0.0, 4e-6, step))?;
    let frontend = FrontEnd::new(&config, step, FrontEndOptions { fir_periods: 48, ..Default::default() })?;
    let y = frontend.sample(&x)?;

    let support = band_support(&spec.bands(), fp, params.l_zero);
    let offsets: Vec<i64> = (-(params.l_zero as i64)..=params.l_zero as i64).collect();
    let truth = reference_slices(&x, &frontend, &offsets)?;
    for (name, a) in [("ideal", &ideal), ("calibrated", &calibrated)] {
        let z = recover_slices(&y, a, &support)?;
        println!("{name:>10} matrix: slice NMSE {:.1} dB", nmse_db(z.z.iter(), truth.iter()));
    }
    Ok(())
}
