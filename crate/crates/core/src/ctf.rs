//! Continuous-to-finite block: a finite frame for the span of the sample
//! vectors, and a symmetric-pair simultaneous OMP that finds the joint
//! support of the slice vectors.

use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::SampleStream;
use crate::linalg::{condition_number, hermitian_eigen, pinv, select_columns, CMatrix};

/// Default absolute eigenvalue cut.
pub const DEFAULT_EIGEN_THRESHOLD: f64 = 1e-9;
/// Condition estimate beyond which a selected column set is rejected.
pub const DEGENERATE_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub q_matrix: CMatrix,
    pub v_matrix: CMatrix,
    pub kept_rank: usize,
    pub eigen_threshold: f64,
    /// All eigenvalues of `Q`, descending.
    pub eigenvalues: Vec<f64>,
}

/// `Q = Σ y[n] y[n]^H` over `window`, and `V` with `V V^H` equal to `Q`
/// after dropping eigenvalues below `eigen_threshold`.
pub fn build_frame(stream: &SampleStream, window: Range<usize>, eigen_threshold: f64) -> Result<Frame> {
    if window.is_empty() {
        return Err(Error::Empty("frame window is empty"));
    }
    if window.end > stream.len() {
        return Err(Error::InvalidArgument(format!("frame window ends at {} beyond {} samples", window.end, stream.len())));
    }
    let y = stream.data.columns(window.start, window.len());
    let q_matrix = &y * y.adjoint();
    frame_from_q(q_matrix, eigen_threshold)
}

/// Frame for an already accumulated `Q`.
pub fn frame_from_q(q_matrix: CMatrix, eigen_threshold: f64) -> Result<Frame> {
    let m = q_matrix.nrows();
    // Exact Hermitian symmetry before the eigensolver.
    let q_matrix = (&q_matrix + q_matrix.adjoint()) * Complex64::new(0.5, 0.0);
    let (eigenvalues, vectors) = hermitian_eigen(&q_matrix);
    let kept: Vec<usize> = (0..m).filter(|&k| eigenvalues[k] >= eigen_threshold && eigenvalues[k] > 0.0).collect();
    let mut v_matrix = select_columns(&vectors, &kept);
    for (c, &k) in kept.iter().enumerate() {
        let scale = eigenvalues[k].sqrt();
        v_matrix.column_mut(c).iter_mut().for_each(|x| *x *= scale);
    }
    Ok(Frame { q_matrix, v_matrix, kept_rank: kept.len(), eigen_threshold, eigenvalues })
}

/// A sorted set of column indices (0-based) of the sensing matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        SupportSet(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn is_superset_of(&self, other: &SupportSet) -> bool {
        other.0.iter().all(|&j| self.contains(j))
    }

    /// Closed under `j -> n_slices - 1 - j`.
    pub fn is_symmetric(&self, n_slices: usize) -> bool {
        self.0.iter().all(|&j| j < n_slices && self.contains(n_slices - 1 - j))
    }

    /// Frequency offsets (multiples of `f_p`) of the members.
    pub fn offsets(&self, l_zero: usize) -> Vec<i64> {
        self.0.iter().map(|&j| j as i64 - l_zero as i64).collect()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SompOptions {
    pub max_pairs: usize,
    /// Stop once `‖R‖_F < residual_tol ‖V‖_F`.
    pub residual_tol: f64,
    pub condition_limit: f64,
}

impl SompOptions {
    pub fn pairs(max_pairs: usize) -> Self {
        SompOptions { max_pairs, residual_tol: 1e-6, condition_limit: DEGENERATE_CONDITION }
    }
}

/// Symmetric-pair SOMP on `V = A U` with default stopping rules.
pub fn somp_support(a: &CMatrix, v: &CMatrix, max_pairs: usize) -> Result<SupportSet> {
    somp_support_with(a, v, SompOptions::pairs(max_pairs))
}

/// Each iteration scores column `j` by `‖a_j^H R‖ / ‖a_j‖`, adds the best
/// mirror pair (the center column alone), and projects `R` off the span of
/// everything selected so far. A pair competes with its mean score so the
/// center column is not outweighed merely for being single.
pub fn somp_support_with(a: &CMatrix, v: &CMatrix, options: SompOptions) -> Result<SupportSet> {
    let l = a.ncols();
    if l % 2 == 0 {
        return Err(Error::InvalidArgument(format!("sensing matrix has an even column count {l}")));
    }
    if a.nrows() != v.nrows() {
        return Err(Error::InvalidArgument(format!("matrix has {} rows, frame has {}", a.nrows(), v.nrows())));
    }
    let v_norm = v.norm();
    if v.ncols() == 0 || v_norm == 0.0 {
        return Err(Error::Empty("frame is empty; no energy to locate"));
    }
    let center = l / 2;
    let col_norms: Vec<f64> = (0..l).map(|j| a.column(j).norm()).collect();
    let mut selected: Vec<usize> = Vec::new();
    let mut residual = v.clone();
    for _ in 0..options.max_pairs {
        if residual.norm() < options.residual_tol * v_norm {
            break;
        }
        let corr = a.adjoint() * &residual;
        let score: Vec<f64> =
            (0..l).map(|j| if col_norms[j] > 0.0 { corr.row(j).norm() / col_norms[j] } else { 0.0 }).collect();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..=center {
            if selected.contains(&j) {
                continue;
            }
            let s = if j == center { score[j] } else { 0.5 * (score[j] + score[l - 1 - j]) };
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
        let Some((j, _)) = best else { break };
        selected.push(j);
        if j != center {
            selected.push(l - 1 - j);
        }
        let a_s = select_columns(a, &selected);
        let cond = condition_number(&a_s);
        if !(cond <= options.condition_limit) {
            return Err(Error::DegenerateSupport { condition: cond, limit: options.condition_limit });
        }
        residual = v - &a_s * (pinv(&a_s) * v);
    }
    Ok(SupportSet::new(selected))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetRank {
    pub full_rank: bool,
    /// Largest `sigma_max / sigma_min` over all subsets.
    pub worst_condition: f64,
    pub worst_subset: Vec<usize>,
}

/// Largest number of column subsets `check_subset_rank` will enumerate.
pub const SUBSET_BUDGET: u128 = 1_000_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Whether every `k`-column submatrix of `a` has full column rank, by
/// exhaustive enumeration.
pub fn check_subset_rank(a: &CMatrix, k: usize) -> Result<SubsetRank> {
    let l = a.ncols();
    if k == 0 || k > l {
        return Err(Error::InvalidArgument(format!("subset size {k} must lie in 1..={l}")));
    }
    let subsets = binomial(l, k);
    if subsets > SUBSET_BUDGET {
        return Err(Error::BudgetExceeded { subsets, limit: SUBSET_BUDGET });
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut worst = SubsetRank { full_rank: true, worst_condition: 0.0, worst_subset: idx.clone() };
    loop {
        let sub = select_columns(a, &idx);
        let s = crate::linalg::singular_values(&sub);
        let (max, min) = (s[0], if k <= a.nrows() { s[k - 1] } else { 0.0 });
        let ok = max > 0.0 && min > 1e-10 * max;
        let cond = if ok { max / min } else { f64::INFINITY };
        if !ok {
            worst.full_rank = false;
        }
        if cond > worst.worst_condition {
            worst.worst_condition = cond;
            worst.worst_subset = idx.clone();
        }
        // Next combination in lexicographic order.
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < l - k + p) else { break };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
    Ok(worst)
}

/// Frame plus SOMP over a window of the stream.
pub fn recover_support(
    stream: &SampleStream,
    a: &CMatrix,
    window: Range<usize>,
    eigen_threshold: f64,
    options: SompOptions,
) -> Result<(SupportSet, Frame)> {
    let frame = build_frame(stream, window, eigen_threshold)?;
    let support = somp_support_with(a, &frame.v_matrix, options)?;
    Ok((support, frame))
}

/// Whether `estimate ⊇ truth` with `A_estimate` of full column rank, the
/// success rule used by every experiment.
pub fn support_success(a: &CMatrix, estimate: &SupportSet, truth: &SupportSet) -> bool {
    estimate.is_superset_of(truth) && condition_number(&select_columns(a, estimate.indices())) <= DEGENERATE_CONDITION
}
