#![allow(dead_code)]

use std::f64::consts::PI;

use mwc_lab::frontend::{
    build_sensing_matrix, derive_grid, derive_params, gen_sign_matrix, DerivedParams, FrontEnd, FrontEndOptions,
    MwcConfig, SensingMatrix, SignMode, SignalClass,
};
use mwc_lab::seed::SeedTree;
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `(1/T_p) ∫ p(t) exp(-2jπ l t / T_p) dt` by Gauss-Legendre quadrature on
/// every constant chip, with `T_p = 1`.
pub fn coefficient_by_quadrature(pattern: &[i8], l: i64) -> Complex64 {
    let m = pattern.len() as f64;
    let rule = gauss_legendre(24);
    pattern
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let (lo, hi) = (k as f64 / m, (k + 1) as f64 / m);
            let half = 0.5 * (hi - lo);
            let sum: Complex64 = rule
                .iter()
                .map(|&(x, w)| {
                    let t = lo + half * (x + 1.0);
                    Complex64::from_polar(w * half, -2.0 * PI * l as f64 * t)
                })
                .sum();
            sum * a as f64
        })
        .sum()
}

/// Plain `O(n^2)` DTFT of `x` at normalized frequency `nu` (cycles/sample).
pub fn dtft(x: &[Complex64], nu: f64) -> Complex64 {
    x.iter().enumerate().map(|(n, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * nu * n as f64)).sum()
}

/// A small converter: `f_p = f_NYQ / M`, `f_s = q f_p`, random signs.
pub struct Desk {
    pub config: MwcConfig,
    pub params: DerivedParams,
    pub matrix: SensingMatrix,
    pub step: f64,
}

pub fn desk(nyquist: f64, n_bands: usize, band_width: f64, alternations: usize, m: usize, q: usize, seed: u64) -> Desk {
    let fp = nyquist / alternations as f64;
    let class = SignalClass { n_bands, band_width, nyquist_rate: nyquist };
    let params = derive_params(&class, fp, q as f64 * fp).unwrap();
    let signs = gen_sign_matrix(m, alternations, &mut SeedTree::new(seed).rng(), SignMode::Independent).unwrap();
    let config = MwcConfig::new(signs, fp, q).unwrap();
    let matrix = build_sensing_matrix(&config, &params).unwrap();
    let step = derive_grid(nyquist, alternations, fp, q);
    Desk { config, params, matrix, step }
}

impl Desk {
    pub fn frontend(&self, fir_periods: usize) -> FrontEnd {
        FrontEnd::new(&self.config, self.step, FrontEndOptions { fir_periods, ..Default::default() }).unwrap()
    }
}
