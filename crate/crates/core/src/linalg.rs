//! Thin helpers over nalgebra for the complex least-squares work in the
//! recovery stages.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Columns `cols` of `a`, in the given order.
pub fn select_columns(a: &CMatrix, cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `sigma_max / sigma_min` over the column space; infinite when `a` has more
/// columns than rows or a zero singular value.
pub fn condition_number(a: &CMatrix) -> f64 {
    if a.ncols() == 0 {
        return 1.0;
    }
    if a.ncols() > a.nrows() {
        return f64::INFINITY;
    }
    let s = singular_values(a);
    let (max, min) = (s[0], s[s.len() - 1]);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Moore-Penrose pseudo-inverse of a full-column-rank matrix through the SVD.
pub fn pinv(a: &CMatrix) -> CMatrix {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = max * a.nrows().max(a.ncols()) as f64 * f64::EPSILON;
    let inv_s = CVector::from_iterator(
        svd.singular_values.len(),
        svd.singular_values.iter().map(|&s| Complex64::new(if s > cut { 1.0 / s } else { 0.0 }, 0.0)),
    );
    v_t.adjoint() * CMatrix::from_diagonal(&inv_s) * u.adjoint()
}

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigen(q: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = q.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = select_columns(&eig.eigenvectors, &order);
    (values, vectors)
}
