mod common;

use mwc_lab::ctf::{somp_support, SupportSet};
use mwc_lab::dsp::dft;
use mwc_lab::experiments::{read_csv, write_csv, CsvRow};
use mwc_lab::expander::expanded_row_coeffs;
use mwc_lab::frontend::{fourier_coeff, gen_sign_matrix, quantize, MwcConfig, SampleStream, SignMode};
use mwc_lab::io::{load_config, load_matrix, load_signs, read_stream, save_config, save_matrix, save_signs, write_stream};
use mwc_lab::linalg::{select_columns, CMatrix};
use mwc_lab::realtime::detect_change;
use mwc_lab::reconstruct::recover_slices;
use mwc_lab::seed::SeedTree;
use mwc_lab::signal::{add_awgn, draw_carriers, synth_multiband, MultibandSpec, TimeGrid};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use common::{c, desk};

fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut rng = SeedTree::new(seed).rng();
    CMatrix::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Symmetric support with one column pair per distinct pick.
fn pair_support(l: usize, picks: &[usize]) -> SupportSet {
    let mut cols: Vec<usize> = picks.iter().map(|&p| p % (l / 2)).collect();
    cols.sort();
    cols.dedup();
    SupportSet::new(cols.iter().flat_map(|&j| [j, l - 1 - j]).collect())
}

fn multiband(carriers: Vec<f64>, energies: Vec<f64>, offsets: Vec<f64>) -> MultibandSpec {
    MultibandSpec { n_bands: 2 * carriers.len(), band_width: 50e6, nyquist_rate: 2e9, carriers, energies, offsets }
}

prop_compose! {
    fn band_pairs()(n in 1usize..4)(
        seed in any::<u64>(),
        energies in prop::collection::vec(0.1..5.0f64, n),
        offsets in prop::collection::vec(0.0..0.2e-6f64, n),
    ) -> MultibandSpec {
        let carriers = draw_carriers(energies.len(), 50e6, 2e9, &mut SeedTree::new(seed).rng()).unwrap();
        multiband(carriers, energies, offsets)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthesized_energy_obeys_parseval(spec in band_pairs()) {
        let x = synth_multiband(&spec, TimeGrid::window(0.0, 0.2e-6, 1e-10)).unwrap();
        let spectrum = dft(&x.samples.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>());
        let n = spectrum.len();
        let freq: f64 = spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        prop_assert!((freq - x.energy()).abs() <= 1e-9 * x.energy());
        let peak = spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for k in 1..n {
            prop_assert!((spectrum[k] - spectrum[n - k].conj()).norm() <= 1e-11 * peak);
        }
    }

    #[test]
    fn noise_meets_the_requested_snr(spec in band_pairs(), snr in -10.0..40.0f64, seed in any::<u64>()) {
        let x = synth_multiband(&spec, TimeGrid::window(0.0, 0.1e-6, 1e-10)).unwrap();
        let noisy = add_awgn(&x, snr, &mut SeedTree::new(seed).rng()).unwrap();
        let noise: f64 = noisy.samples.iter().zip(&x.samples).map(|(a, b)| (a - b).powi(2)).sum();
        prop_assert!((10.0 * (x.energy() / noise).log10() - snr).abs() <= 1e-9);
    }

    #[test]
    fn coefficients_are_conjugate_symmetric(
        pattern in prop::collection::vec(prop_oneof![Just(-1i8), Just(1i8)], 1..64),
        l in 0i64..200,
    ) {
        let (plus, minus) = (fourier_coeff(&pattern, l), fourier_coeff(&pattern, -l));
        prop_assert!((minus - plus.conj()).norm() <= 1e-14);
    }

    #[test]
    fn fourier_factor_is_orthogonal_when_m_equals_l(half in 3usize..20, seed in any::<u64>()) {
        let alternations = 2 * half + 1;
        let d = desk(alternations as f64 * 1e8, 2, 5e6, alternations, 4, 1, seed);
        prop_assert_eq!(d.params.n_slices, alternations);
        let f = &d.matrix.f_factor;
        let gram = f.adjoint() * f;
        let expected = CMatrix::identity(alternations, alternations) * c(alternations as f64, 0.0);
        prop_assert!((gram - expected).camax() <= 1e-10);
    }

    #[test]
    fn pseudo_inverse_recovers_synthetic_slices(picks in prop::collection::vec(0usize..1000, 1..4), seed in any::<u64>()) {
        let d = desk(1e9, 6, 50e6, 19, 12, 1, seed);
        let support = pair_support(19, &picks);
        let mut z = CMatrix::zeros(19, 20);
        let values = random_matrix(support.len(), 20, seed ^ 1);
        for (k, &j) in support.indices().iter().enumerate() {
            z.row_mut(j).copy_from(&values.row(k));
        }
        let y = SampleStream { data: &d.matrix.a * &z, rate: 1.0, first_index: 0 };
        let got = recover_slices(&y, &d.matrix.a, &support).unwrap();
        prop_assert!((got.z - z).camax() <= 1e-10 * values.camax());
    }

    #[test]
    fn recovery_is_linear(picks in prop::collection::vec(0usize..1000, 1..4), seed in any::<u64>(), alpha in -3.0..3.0f64) {
        let d = desk(1e9, 6, 50e6, 19, 12, 1, seed);
        let support = pair_support(19, &picks);
        let (u, v) = (random_matrix(12, 15, seed ^ 2), random_matrix(12, 15, seed ^ 3));
        let rec = |data: CMatrix| recover_slices(&SampleStream { data, rate: 1.0, first_index: 0 }, &d.matrix.a, &support).unwrap().z;
        let combined = rec(&u * c(alpha, 0.0) + &v);
        let separate = rec(u) * c(alpha, 0.0) + rec(v);
        prop_assert!((combined - &separate).camax() <= 1e-10 * (1.0 + separate.camax()));
    }

    #[test]
    fn quantization_error_is_bounded(values in prop::collection::vec(-10.0..10.0f64, 2..100), bits in 1u32..16) {
        let stream = SampleStream::from_rows(&[values.iter().map(|&v| c(v, -v / 2.0)).collect()], 1.0, 0).unwrap();
        let a_max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let q = quantize(&stream, Some(bits));
        let step = 2.0 * a_max / 2f64.powi(bits as i32);
        let bound = step / 2.0 + 1e-14 * a_max;
        for (a, b) in q.data.iter().zip(stream.data.iter()) {
            prop_assert!((a.re - b.re).abs() <= bound);
            prop_assert!((a.im - b.im).abs() <= bound);
        }
    }

    #[test]
    fn detect_change_reads_the_latest_run(values in prop::collection::vec(0.0..2.0f64, 0..20), threshold in 0.0..2.0f64, run in 1usize..6) {
        let expected = values.len() >= run && values.iter().rev().take(run).all(|&v| v > threshold);
        prop_assert_eq!(detect_change(&values, threshold, run), expected);
    }

    #[test]
    fn expansion_yields_m_times_q_rows(m in 1usize..6, half in 0usize..3, seed in any::<u64>()) {
        let q = 2 * half + 1;
        let d = desk(1e9, 2, 10e6, 19, m, 1, seed);
        let rows = expanded_row_coeffs(&d.matrix, q);
        prop_assert_eq!(rows.nrows(), m * q);
        prop_assert_eq!(rows.ncols(), 19);
        for i in 0..m {
            prop_assert_eq!(rows.row(q * i + half), d.matrix.a.row(i));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn somp_ignores_unitary_rotation_of_the_frame(picks in prop::collection::vec(0usize..1000, 1..4), seed in any::<u64>()) {
        let d = desk(1e9, 6, 50e6, 19, 12, 1, seed);
        let support = pair_support(19, &picks);
        let k = support.len();
        let v = select_columns(&d.matrix.a, support.indices()) * random_matrix(k, k, seed ^ 4)
            + random_matrix(12, k, seed ^ 5) * c(1e-3, 0.0);
        let unitary = random_matrix(k, k, seed ^ 6).qr().q();
        let plain = somp_support(&d.matrix.a, &v, 3).unwrap();
        let rotated = somp_support(&d.matrix.a, &(&v * unitary), 3).unwrap();
        prop_assert!(plain.is_symmetric(19));
        prop_assert_eq!(plain, rotated);
    }

    #[test]
    fn sample_files_round_trip(rows in 1usize..5, cols in 0usize..40, complex in any::<bool>(), seed in any::<u64>(), first in -1000i64..1000) {
        let mut data = random_matrix(rows, cols, seed);
        if !complex {
            data.iter_mut().for_each(|v| v.im = 0.0);
        }
        let stream = SampleStream { data, rate: 51.3e6, first_index: first };
        let mut bytes = Vec::new();
        write_stream(&stream, &mut bytes).unwrap();
        prop_assert_eq!(read_stream(bytes.as_slice()).unwrap(), stream);
    }

    #[test]
    fn documents_round_trip(m in 1usize..8, alternations in 1usize..40, seed in any::<u64>(), jitter in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let signs = gen_sign_matrix(m, alternations, &mut SeedTree::new(seed).rng(), SignMode::Independent).unwrap();
        save_signs(&signs, &dir.path().join("signs.txt")).unwrap();
        prop_assert_eq!(&load_signs(&dir.path().join("signs.txt")).unwrap(), &signs);

        let mut config = MwcConfig::new(signs, 51.3e6, 3).unwrap();
        if jitter {
            config = config.with_jitter((0..alternations).map(|k| 0.01 * (k % 3) as f64 - 0.01).collect()).unwrap();
        }
        save_config(&config, &dir.path().join("config.json")).unwrap();
        prop_assert_eq!(load_config(&dir.path().join("config.json")).unwrap(), config);

        let matrix = random_matrix(m, alternations, seed ^ 7);
        save_matrix(&matrix, &dir.path().join("a.bin")).unwrap();
        prop_assert_eq!(load_matrix(&dir.path().join("a.bin")).unwrap(), matrix);
    }

    #[test]
    fn csv_rows_round_trip(cells in prop::collection::vec((1usize..200, prop::option::of(-20i32..60), prop::option::of(1u32..16), 1usize..500), 1..10)) {
        let rows: Vec<CsvRow> = cells
            .iter()
            .map(|&(m, snr, bits, trials)| CsvRow {
                experiment_id: "fig7".into(),
                m,
                snr_db: mwc_lab::experiments::snr_label(snr.map(f64::from)),
                bits: mwc_lab::experiments::bits_label(bits),
                trials,
                successes: trials / 3,
                success_rate: (trials / 3) as f64 / trials as f64,
                seconds: 1e-6,
            })
            .collect();
        let mut bytes = Vec::new();
        write_csv(&rows, &mut bytes).unwrap();
        prop_assert_eq!(read_csv(bytes.as_slice()).unwrap(), rows);
    }
}

#[test]
fn unitary_helper_is_unitary() {
    let u: DMatrix<Complex64> = random_matrix(5, 5, 3).qr().q();
    assert!((u.adjoint() * &u - CMatrix::identity(5, 5)).camax() < 1e-12);
}
