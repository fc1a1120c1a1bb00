use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Condition, Error, Result};

use super::waveform::chip_coefficient;
use super::{DerivedParams, MwcConfig};

/// `A = S F D` together with its factors.
///
/// Column `j` (0-based) holds the unknown slice at offset `j - L_0`, i.e. the
/// copy of the spectrum shifted by `(j - L_0) f_p`; its entries are
/// `c_{i, L_0 - j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    pub a: DMatrix<Complex64>,
    pub s_factor: DMatrix<f64>,
    pub f_factor: DMatrix<Complex64>,
    pub d_factor: DVector<Complex64>,
    pub column_offsets: Vec<i64>,
    pub l_zero: usize,
}

impl SensingMatrix {
    pub fn n_rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_slices(&self) -> usize {
        self.a.ncols()
    }

    pub fn alternations(&self) -> usize {
        self.s_factor.ncols()
    }

    /// Column holding the conjugate slice.
    pub fn mirror(&self, column: usize) -> usize {
        self.n_slices() - 1 - column
    }

    pub fn column_of_offset(&self, offset: i64) -> Option<usize> {
        let j = offset + self.l_zero as i64;
        (0..self.n_slices() as i64).contains(&j).then_some(j as usize)
    }

    /// `c_{i,l}` for any `l`, recomputed from the sign factor.
    pub fn coefficient(&self, row: usize, l: i64) -> Complex64 {
        let m = self.alternations() as i64;
        let sum: Complex64 = (0..m)
            .map(|k| {
                let phase = (l * k).rem_euclid(m) as f64;
                Complex64::from_polar(self.s_factor[(row, k as usize)], -2.0 * PI * phase / m as f64)
            })
            .sum();
        chip_coefficient(l, m as usize) * sum
    }

    /// The matrix restricted to its first `count` rows.
    pub fn with_rows(&self, count: usize) -> SensingMatrix {
        let count = count.min(self.n_rows());
        SensingMatrix {
            a: self.a.rows(0, count).into_owned(),
            s_factor: self.s_factor.rows(0, count).into_owned(),
            ..self.clone()
        }
    }
}

/// Assembles `A = S F D` for an ideal-edge configuration.
pub fn build_sensing_matrix(config: &MwcConfig, params: &DerivedParams) -> Result<SensingMatrix> {
    config.validate()?;
    let big_m = config.alternations;
    if big_m < params.m_min_alternations {
        return Err(Error::condition(
            Condition::EnoughAlternations,
            format!("M = {big_m} < M_min = {}", params.m_min_alternations),
        ));
    }
    let l0 = params.l_zero;
    let l = params.n_slices;
    let s_factor = DMatrix::from_fn(config.n_channels, big_m, |i, k| config.sign_matrix.row(i)[k] as f64);
    let f_factor = DMatrix::from_fn(big_m, l, |k, j| {
        let harmonic = l0 as i64 - j as i64;
        let phase = (harmonic * k as i64).rem_euclid(big_m as i64) as f64;
        Complex64::from_polar(1.0, -2.0 * PI * phase / big_m as f64)
    });
    let d_factor = DVector::from_fn(l, |j, _| chip_coefficient(l0 as i64 - j as i64, big_m));
    let s_complex = s_factor.map(|v| Complex64::new(v, 0.0));
    let a = s_complex * &f_factor * DMatrix::from_diagonal(&d_factor);
    Ok(SensingMatrix {
        a,
        s_factor,
        f_factor,
        d_factor,
        column_offsets: (0..l as i64).map(|j| j - l0 as i64).collect(),
        l_zero: l0,
    })
}

/// `A` assembled directly from the coefficients of the configured waveforms,
/// including edge jitter when present.
pub fn calibrated_matrix(config: &MwcConfig, l_zero: usize) -> DMatrix<Complex64> {
    let l = 2 * l_zero + 1;
    let waveforms: Vec<_> = (0..config.n_channels).map(|i| config.waveform(i)).collect();
    DMatrix::from_fn(config.n_channels, l, |i, j| waveforms[i].coefficient(l_zero as i64 - j as i64))
}
