mod common;

use std::f64::consts::PI;

use mwc_lab::frontend::{
    build_sensing_matrix, derive_params, fourier_coeffs, gen_sign_matrix, quantize, FrontEnd, FrontEndOptions,
    MwcConfig, SampleStream, SignMode, SignalClass,
};
use mwc_lab::seed::SeedTree;
use mwc_lab::signal::{DenseSignal, TimeGrid};
use num_complex::Complex64;
use rand::Rng;

use common::{c, coefficient_by_quadrature, desk, Desk};

#[test]
fn coefficient_matches_quadrature_at_m8() {
    let signs = gen_sign_matrix(1, 8, &mut SeedTree::new(3).rng(), SignMode::Independent).unwrap();
    let pattern = signs.row(0);
    for l in [3, -3, 0, 7, 11] {
        let got = mwc_lab::frontend::fourier_coeff(pattern, l);
        assert!((got - coefficient_by_quadrature(pattern, l)).norm() < 1e-10, "l = {l}");
    }
}

#[test]
fn sign_entries_average_to_zero() {
    let s = gen_sign_matrix(100, 100, &mut SeedTree::new(5).rng(), SignMode::Independent).unwrap();
    let mean = s.rows().flatten().map(|&v| v as f64).sum::<f64>() / 1e4;
    assert!(mean.abs() <= 0.05, "{mean}");
    assert_eq!(s, gen_sign_matrix(100, 100, &mut SeedTree::new(5).rng(), SignMode::Independent).unwrap());
}

#[test]
fn shared_register_rows_are_shifted_copies() {
    let mode = SignMode::SharedRegister { registers: 20, shift: 5 };
    let s = gen_sign_matrix(100, 195, &mut SeedTree::new(6).rng(), mode).unwrap();
    for i in 20..100 {
        let (src, row) = (s.row(i - 20), s.row(i));
        for k in 0..195 {
            assert_eq!(row[(k + 5) % 195], src[k], "row {i}");
        }
    }
}

#[test]
fn option_a_columns_mirror_as_conjugates() {
    let d = desk(10e9, 6, 50e6, 195, 12, 1, 2);
    let l0 = d.params.l_zero;
    for i in 0..12 {
        for k in 0..=l0 {
            assert!((d.matrix.a[(i, l0 + k)] - d.matrix.a[(i, l0 - k)].conj()).norm() < 1e-13);
        }
    }
}

#[test]
fn matrix_matches_direct_coefficient_assembly() {
    let d = desk(1e9, 2, 1e9 / 30.0, 15, 4, 1, 9);
    let l0 = d.params.l_zero as i64;
    for i in 0..4 {
        let coeffs = fourier_coeffs(d.config.sign_matrix.row(i), -l0..=l0);
        for j in 0..15 {
            // Column j holds c_{i, L0 - j}; coeffs[k] is c_{i, k - L0}.
            let got = d.matrix.a[(i, j)];
            assert!((got - coeffs[14 - j]).norm() < 1e-12);
        }
    }
}

#[test]
fn chip_factor_decays_with_harmonic() {
    let d = desk(10e9, 6, 50e6, 195, 4, 1, 1);
    let l0 = d.params.l_zero;
    let mag = |k: usize| d.matrix.d_factor[l0 + k].norm();
    for k in 0..l0 {
        assert!(mag(k) > 0.0);
        assert!(mag(k + 1) <= mag(k) * (1.0 + 1e-12));
        assert!((mag(k) - d.matrix.d_factor[l0 - k].norm()).abs() < 1e-15);
    }
}

#[test]
fn zero_input_and_determinism() {
    let d = desk(1e9, 6, 50e6, 19, 4, 1, 4);
    let fe = d.frontend(12);
    let grid = TimeGrid::window(0.0, 2e-6, d.step);
    let zero = fe.sample(&DenseSignal::zeros(grid)).unwrap();
    assert!(zero.data.iter().all(|v| *v == c(0.0, 0.0)));
    let mut rng = SeedTree::new(8).rng();
    let samples: Vec<f64> = (0..grid.len).map(|_| rng.random::<f64>() - 0.5).collect();
    let x = DenseSignal { samples, grid_step: grid.step, start_time: 0.0 };
    assert_eq!(fe.sample(&x).unwrap(), d.frontend(12).sample(&x).unwrap());
}

/// `Σ_n x[n] exp(-2jπ f t_n)` times the grid step: the continuous spectrum
/// of the dense input.
fn input_spectrum(x: &DenseSignal, f: f64) -> Complex64 {
    let sum: Complex64 = x
        .samples
        .iter()
        .enumerate()
        .map(|(n, &v)| Complex64::from_polar(v, -2.0 * PI * f * (x.start_time + n as f64 * x.grid_step)))
        .sum();
    sum * x.grid_step
}

fn output_spectrum(y: &SampleStream, channel: usize, f: f64) -> Complex64 {
    let sum: Complex64 =
        (0..y.len()).map(|n| y.data[(channel, n)] * Complex64::from_polar(1.0, -2.0 * PI * f * y.time(n))).sum();
    sum / y.rate
}

/// Two Gaussian-windowed carriers: compact in time and in frequency.
fn gaussian_bands(d: &Desk, carriers: &[f64]) -> DenseSignal {
    let grid = TimeGrid::window(0.0, 6e-6, d.step);
    let (center, sigma) = (3e-6, 0.3e-6);
    let samples = (0..grid.len)
        .map(|n| {
            let t = grid.time(n);
            let env = (-0.5 * ((t - center) / sigma).powi(2)).exp();
            carriers.iter().enumerate().map(|(k, &f)| env * (2.0 * PI * f * t + k as f64).cos()).sum()
        })
        .collect();
    DenseSignal { samples, grid_step: grid.step, start_time: 0.0 }
}

fn check_frequency_relation(d: &Desk, fe: &FrontEnd) {
    let fp = d.config.mixing_rate;
    let carriers = [2.2 * fp, 5.7 * fp + 0.3e6];
    let x = gaussian_bands(d, &carriers);
    let y = fe.sample(&x).unwrap();
    for &carrier in &carriers {
        let folded = carrier - (carrier / fp).round() * fp;
        for delta in [-0.5e6, 0.0, 0.4e6] {
            let f = folded + delta;
            for i in 0..d.config.n_channels {
                let predicted: Complex64 =
                    (-12..=12).map(|l: i64| d.config.coefficient(i, l) * input_spectrum(&x, f - l as f64 * fp)).sum();
                let got = output_spectrum(&y, i, f);
                let rel = (got - predicted).norm() / predicted.norm();
                assert!(rel <= 0.01, "channel {i}, f = {f:.4e}: relative error {rel:.4}");
            }
        }
    }
}

#[test]
fn sampled_spectrum_follows_the_mixing_relation() {
    let d = desk(1e9, 6, 50e6, 19, 3, 1, 12);
    check_frequency_relation(&d, &d.frontend(48));
}

#[test]
fn relation_holds_with_calibrated_edge_jitter() {
    let mut d = desk(1e9, 6, 50e6, 19, 3, 1, 12);
    let mut rng = SeedTree::new(13).rng();
    let jitter: Vec<f64> = (0..19).map(|_| 0.3 * (rng.random::<f64>() - 0.5)).collect();
    d.config = d.config.clone().with_jitter(jitter).unwrap();
    let ideal = fourier_coeffs(d.config.sign_matrix.row(0), 1..=1)[0];
    assert!((d.config.coefficient(0, 1) - ideal).norm() > 1e-4);
    check_frequency_relation(&d, &d.frontend(48));
}

#[test]
fn quantizer_examples() {
    let mut rng = SeedTree::new(21).rng();
    let rows: Vec<Vec<Complex64>> =
        (0..3).map(|_| (0..200).map(|_| c(2.0 * rng.random::<f64>() - 1.0, 0.0)).collect()).collect();
    let s = SampleStream::from_rows(&rows, 1.0, 0).unwrap();
    let a_max = s.data.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    assert_eq!(quantize(&s, None), s);
    let one = quantize(&s, Some(1));
    for (q, v) in one.data.iter().zip(s.data.iter()) {
        assert!((q.re - v.re.signum() * a_max / 2.0).abs() < 1e-15);
    }
    let eight = quantize(&s, Some(8));
    let worst = eight.data.iter().zip(s.data.iter()).map(|(q, v)| (q - v).norm()).fold(0.0, f64::max);
    assert!(worst <= a_max / 256.0 + 1e-15);
}

#[test]
fn expanded_config_reports_rows() {
    let fp = 10e9 / 195.0;
    let class = SignalClass { n_bands: 6, band_width: 50e6, nyquist_rate: 10e9 };
    let params = derive_params(&class, fp, 5.0 * fp).unwrap();
    let signs = gen_sign_matrix(3, 195, &mut SeedTree::new(1).rng(), SignMode::Independent).unwrap();
    let config = MwcConfig::new(signs, fp, 5).unwrap();
    let report = params.check_config(&config, true);
    assert!(report.all_hold(), "{report:?}");
    assert!(!params.check_config(&config, false).all_hold());
    let a = build_sensing_matrix(&config, &params).unwrap();
    assert_eq!(a.a.shape(), (3, 199));
    assert!(FrontEnd::new(&config, 3e-11, FrontEndOptions::default()).is_err());
}
