//! A noisy three-pair multiband signal through the analog front-end:
//! mixing with the sign waveforms, lowpass filtering and sampling at `f_s`.

use mwc_lab::frontend::{
    build_sensing_matrix, derive_grid, derive_params, gen_sign_matrix, FrontEnd, FrontEndOptions, MwcConfig, SignMode,
    SignalClass,
};
use mwc_lab::seed::SeedTree;
use mwc_lab::signal::{add_awgn, draw_carriers, synth_multiband, MultibandSpec, TimeGrid};

fn main() -> mwc_lab::Result<()> {
    let (nyquist, band_width, alternations) = (1e9, 20e6, 19);
    let fp = nyquist / alternations as f64;
    let class = SignalClass { n_bands: 6, band_width, nyquist_rate: nyquist };
    let params = derive_params(&class, fp, fp)?;
    let tree = SeedTree::new(11);

    let carriers = draw_carriers(3, band_width, nyquist, &mut tree.named("carriers").rng())?;
    let mut spec = MultibandSpec::three_pairs(band_width, nyquist, carriers);
    spec.offsets.iter_mut().for_each(|t| *t += 1.5e-6);
    let step = derive_grid(nyquist, alternations, fp, 1);
    let clean = synth_multiband(&spec, TimeGrid::window(0.0, 4e-6, step))?;
    let x = add_awgn(&clean, 20.0, &mut tree.named("noise").rng())?;
    println!("carriers (MHz): {:.1?}", spec.carriers.iter().map(|f| f / 1e6).collect::<Vec<_>>());
    println!("{} dense samples at {:.1} GHz", x.len(), 1e-9 / step);

    let signs = gen_sign_matrix(12, alternations, &mut tree.named("signs").rng(), SignMode::Independent)?;
    let config = MwcConfig::new(signs, fp, 1)?;
    let frontend = FrontEnd::new(&config, step, FrontEndOptions::default())?;
    let y = frontend.sample(&x)?;
    println!("{} channels x {} samples at {:.2} MHz, first index {}", y.channel_count(), y.len(), y.rate / 1e6, y.first_index);
    for i in 0..3 {
        let power = y.channel(i).iter().map(|v| v.norm_sqr()).sum::<f64>() / y.len() as f64;
        println!("  channel {i}: mean power {power:.3e}");
    }
    let a = build_sensing_matrix(&config, &params)?;
    println!("sensing matrix {} x {}", a.n_rows(), a.n_slices());
    Ok(())
}
