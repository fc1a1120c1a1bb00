mod common;

use mwc_lab::ctf::{build_frame, check_subset_rank, somp_support, SupportSet};
use mwc_lab::frontend::{chip_coefficient, gen_sign_matrix, SignMode};
use mwc_lab::linalg::{select_columns, CMatrix};
use mwc_lab::seed::SeedTree;
use mwc_lab::signal::{add_awgn, draw_carriers, synth_multiband, MultibandSpec, TimeGrid};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use common::{c, desk};

fn three_pairs(nyquist: f64, seed: u64, start: f64) -> MultibandSpec {
    let carriers = draw_carriers(3, 50e6, nyquist, &mut SeedTree::new(seed).rng()).unwrap();
    let mut spec = MultibandSpec::three_pairs(50e6, nyquist, carriers);
    spec.offsets.iter_mut().for_each(|o| *o += start);
    spec
}

#[test]
fn noiseless_frame_rank_is_at_most_two_n() {
    let d = desk(1e9, 6, 50e6, 19, 24, 1, 40);
    let fe = d.frontend(96);
    for seed in 0..5 {
        let spec = three_pairs(1e9, seed, 1.5e-6);
        let x = synth_multiband(&spec, TimeGrid::window(0.0, 4e-6, d.step)).unwrap();
        let y = fe.sample(&x).unwrap();
        assert!(y.len() >= 12);
        let frame = build_frame(&y, 0..y.len(), 1e-9).unwrap();
        let top = frame.eigenvalues[0];
        // The tail sits at the filter leakage level, far below 1e-6 of the top.
        let rank = frame.eigenvalues.iter().filter(|&&e| e > 1e-6 * top).count();
        assert!(rank <= 12, "seed {seed}: {:?}", &frame.eigenvalues[..14]);
    }
}

#[test]
fn frame_reproduces_q_at_25_db() {
    let d = desk(10e9, 6, 50e6, 195, 40, 1, 41);
    let fe = d.frontend(12);
    let fs = d.config.sampling_rate;
    let spec = three_pairs(10e9, 7, 0.0);
    let x = synth_multiband(&spec, TimeGrid::window(0.0, 40.0 / fs + 0.25e-6, d.step)).unwrap();
    let x = add_awgn(&x, 25.0, &mut SeedTree::new(8).rng()).unwrap();
    let y = fe.sample(&x).unwrap();
    assert!(y.len() >= 40);
    let frame = build_frame(&y, 0..40, 1e-9).unwrap();
    let q = &frame.q_matrix;
    assert!((q - q.adjoint()).norm() <= 1e-10 * q.norm());
    assert!(frame.eigenvalues.iter().all(|&e| e >= -1e-10 * frame.eigenvalues[0]));
    assert!(frame.kept_rank <= 40);
    let rebuilt = &frame.v_matrix * frame.v_matrix.adjoint();
    assert!((rebuilt - q).norm() <= 1e-8 * q.norm());
}

#[test]
fn single_pair_is_found_in_one_iteration() {
    let d = desk(1e9, 2, 50e6, 19, 8, 1, 42);
    let a = &d.matrix.a;
    let mut rng = SeedTree::new(3).rng();
    for j in [0usize, 4, 8] {
        let cols = [j, 18 - j];
        let u = CMatrix::from_fn(2, 5, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let v = select_columns(a, &cols) * u;
        assert_eq!(somp_support(a, &v, 1).unwrap(), SupportSet::new(cols.to_vec()));
    }
}

/// Full column rank decided from `det(A_S^H A_S)` against the product of
/// squared column norms.
fn rank_by_determinant(a: &CMatrix, cols: &[usize]) -> bool {
    let sub = select_columns(a, cols);
    let gram = sub.adjoint() * &sub;
    let scale: f64 = cols.iter().map(|&j| a.column(j).norm_squared()).product();
    gram.determinant().norm() > 1e-12 * scale
}

fn all_subsets_full_rank(a: &CMatrix, k: usize) -> bool {
    let l = a.ncols();
    (0u32..1 << l).filter(|m| m.count_ones() as usize == k).all(|m| {
        let cols: Vec<usize> = (0..l).filter(|j| m >> j & 1 == 1).collect();
        rank_by_determinant(a, &cols)
    })
}

#[test]
fn subset_rank_agrees_with_determinant_oracle() {
    for seed in 0..4 {
        let a = desk(1e9, 2, 50e6, 15, 8, 1, 100 + seed).matrix.a;
        let report = check_subset_rank(&a, 4).unwrap();
        assert_eq!(report.full_rank, all_subsets_full_rank(&a, 4));
    }
    let mut a = desk(1e9, 2, 50e6, 15, 8, 1, 7).matrix.a;
    let first = a.column(0).into_owned();
    a.set_column(5, &(first * c(2.0, 0.0)));
    assert!(!check_subset_rank(&a, 4).unwrap().full_rank);
    assert!(!all_subsets_full_rank(&a, 4));
}

#[test]
fn too_few_alternations_repeat_columns() {
    // M = 9 alternations against L = 11 slices: columns 0 and 9 share their
    // Fourier column.
    let (big_m, l0) = (9usize, 5i64);
    let signs = gen_sign_matrix(6, big_m, &mut SeedTree::new(2).rng(), SignMode::Independent).unwrap();
    let s = DMatrix::from_fn(6, big_m, |i, k| c(signs.row(i)[k] as f64, 0.0));
    let f = DMatrix::from_fn(big_m, 11, |k, j| {
        let phase = -2.0 * std::f64::consts::PI * ((l0 - j as i64) * k as i64) as f64 / big_m as f64;
        Complex64::from_polar(1.0, phase)
    });
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(11, |j, _| chip_coefficient(l0 - j as i64, big_m)));
    let a = s * f * d;
    let report = check_subset_rank(&a, 2).unwrap();
    assert!(!report.full_rank);
    assert!(!rank_by_determinant(&a, &[0, 9]));
}
