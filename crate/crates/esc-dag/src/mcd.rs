//! Modified Cholesky decomposition Ω = (I−A)ᵀ D⁻¹ (I−A), matrix norms and
//! parameter-class condition checkers.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum McdError {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("matrix must be square, got {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },
}

/// Entries of a recovered factor below this fraction of the largest |A|
/// entry are snapped to exact zero so support recovery is deterministic.
pub const ZERO_SNAP_REL: f64 = 1e-12;

/// Strictly lower-triangular Cholesky factor A (ragged rows, row j holds
/// entries a_{j,1..j-1}) plus positive conditional variances D.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyModel {
    a_rows: Vec<Vec<f64>>,
    d: Vec<f64>,
}

impl CholeskyModel {
    pub fn new(a_rows: Vec<Vec<f64>>, d: Vec<f64>) -> Self {
        assert_eq!(a_rows.len(), d.len(), "A and D dimension mismatch");
        for (j, row) in a_rows.iter().enumerate() {
            assert_eq!(row.len(), j, "row {} of A must have {} entries", j + 1, j);
        }
        assert!(d.iter().all(|&v| v > 0.0), "D entries must be positive");
        Self { a_rows, d }
    }

    pub fn identity(p: usize) -> Self {
        Self::new((0..p).map(|j| vec![0.0; j]).collect(), vec![1.0; p])
    }

    pub fn p(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Row `j` (1-based) of A: entries a_{j,1..j-1}.
    pub fn a_row(&self, j: usize) -> &[f64] {
        &self.a_rows[j - 1]
    }

    /// Entry a_{jl} (1-based, l < j).
    pub fn a(&self, j: usize, l: usize) -> f64 {
        self.a_rows[j - 1][l - 1]
    }

    pub fn set_a(&mut self, j: usize, l: usize, v: f64) {
        self.a_rows[j - 1][l - 1] = v;
    }

    /// Support of A as 1-based (j, l) pairs.
    pub fn support(&self) -> std::collections::BTreeSet<(usize, usize)> {
        let mut out = std::collections::BTreeSet::new();
        for (ji, row) in self.a_rows.iter().enumerate() {
            for (li, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    out.insert((ji + 1, li + 1));
                }
            }
        }
        out
    }

    /// Dense strictly lower-triangular A.
    pub fn a_dense(&self) -> DMatrix<f64> {
        let p = self.p();
        DMatrix::from_fn(p, p, |r, c| {
            if c < r {
                self.a_rows[r][c]
            } else {
                0.0
            }
        })
    }
}

/// Ω = (I−A)ᵀ D⁻¹ (I−A).
pub fn compose(model: &CholeskyModel) -> DMatrix<f64> {
    let p = model.p();
    let mut u = DMatrix::<f64>::identity(p, p); // I − A
    for j in 1..p {
        for l in 0..j {
            u[(j, l)] = -model.a_rows[j][l];
        }
    }
    let mut dinv_u = u.clone();
    for j in 0..p {
        let dj = model.d[j];
        for l in 0..=j {
            dinv_u[(j, l)] /= dj;
        }
    }
    u.transpose() * dinv_u
}

/// Recovers the unique (A, D) with Ω = (I−A)ᵀ D⁻¹ (I−A).
///
/// Implemented as a raw (non-pivoted) LDLᵀ factorization of the
/// index-reversed matrix, which is exactly the MCD in the natural parent
/// ordering. Small recovered entries are snapped to zero (see
/// [`ZERO_SNAP_REL`]).
pub fn decompose(omega: &DMatrix<f64>) -> Result<CholeskyModel, McdError> {
    let p = omega.nrows();
    if omega.ncols() != p {
        return Err(McdError::NotSquare { rows: p, cols: omega.ncols() });
    }
    let rev = |i: usize| p - 1 - i;
    // LDLᵀ of M = J Ω J.
    let m = DMatrix::from_fn(p, p, |r, c| omega[(rev(r), rev(c))]);
    let mut l = DMatrix::<f64>::identity(p, p);
    let mut dtil = vec![0.0; p];
    for j in 0..p {
        let mut dj = m[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * dtil[k];
        }
        if dj <= 0.0 {
            return Err(McdError::NotPositiveDefinite { index: rev(j) + 1, pivot: dj });
        }
        dtil[j] = dj;
        for i in (j + 1)..p {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)] * dtil[k];
            }
            l[(i, j)] = v / dj;
        }
    }
    // Map back: U = I − A with U[r][c] = L[rev(c)][rev(r)], d_j = 1/dtil[rev(j)].
    let mut a_rows: Vec<Vec<f64>> = (0..p).map(|j| vec![0.0; j]).collect();
    let mut max_abs = 0.0f64;
    for r in 1..p {
        for c in 0..r {
            let v = -l[(rev(c), rev(r))];
            max_abs = max_abs.max(v.abs());
            a_rows[r][c] = v;
        }
    }
    let snap = ZERO_SNAP_REL * max_abs;
    for row in &mut a_rows {
        for v in row.iter_mut() {
            if v.abs() < snap {
                *v = 0.0;
            }
        }
    }
    let d = (0..p).map(|j| 1.0 / dtil[rev(j)]).collect();
    Ok(CholeskyModel::new(a_rows, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Spectral,
    L1,
    Linf,
    Frobenius,
}

impl std::str::FromStr for NormKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "l1" => Ok(Self::L1),
            "linf" => Ok(Self::Linf),
            "frobenius" => Ok(Self::Frobenius),
            other => Err(format!("unknown norm kind: {other}")),
        }
    }
}

pub fn matrix_norm(m: &DMatrix<f64>, kind: NormKind) -> f64 {
    match kind {
        NormKind::Spectral => m.clone().svd(false, false).singular_values.max(),
        NormKind::L1 => (0..m.ncols())
            .map(|c| m.column(c).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::Linf => (0..m.nrows())
            .map(|r| m.row(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::Frobenius => m.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// Diagnostic report for the parameter-class conditions on a ground-truth
/// model: eigenvalue bounds, row/column sparsity, and the beta-min bound.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConditionReport {
    pub eig_min: f64,
    pub eig_max: f64,
    pub s0_row: usize,
    pub s0_col: usize,
    pub min_nonzero_sq: f64,
    pub beta_min_threshold: f64,
    pub passes_a1: bool,
    pub passes_a2: bool,
    pub passes_a3: bool,
    pub passes_a4: bool,
}

/// Checks the eigenvalue, sparsity and beta-min conditions for `truth`.
///
/// `s0` is the sparsity budget for the row/column conditions; when `None`
/// those two checks pass vacuously and only the observed counts are
/// reported.
pub fn check_conditions(
    truth: &CholeskyModel,
    eps0: f64,
    alpha: f64,
    c_bm: f64,
    n: usize,
    s0: Option<usize>,
) -> ConditionReport {
    assert!(eps0 > 0.0 && eps0 < 0.5, "eps0 must lie in (0, 1/2)");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let p = truth.p();
    let omega = compose(truth);
    let eig = nalgebra::SymmetricEigen::new(omega);
    let eig_min = eig.eigenvalues.min();
    let eig_max = eig.eigenvalues.max();

    let mut col_counts = vec![0usize; p];
    let mut s0_row = 0usize;
    let mut min_nonzero_sq = f64::INFINITY;
    for j in 2..=p {
        let mut row_count = 0;
        for (li, &v) in truth.a_row(j).iter().enumerate() {
            if v != 0.0 {
                row_count += 1;
                col_counts[li] += 1;
                min_nonzero_sq = min_nonzero_sq.min(v * v);
            }
        }
        s0_row = s0_row.max(row_count);
    }
    let s0_col = col_counts.into_iter().max().unwrap_or(0);
    if !min_nonzero_sq.is_finite() {
        min_nonzero_sq = 0.0;
    }

    let beta_min_threshold = 16.0 / (alpha * (1.0 - alpha) * eps0 * eps0 * (1.0 - 2.0 * eps0).powi(2))
        * c_bm
        * (p as f64).ln()
        / n as f64;

    ConditionReport {
        eig_min,
        eig_max,
        s0_row,
        s0_col,
        min_nonzero_sq,
        beta_min_threshold,
        passes_a1: eig_min >= eps0 && eig_max <= 1.0 / eps0,
        passes_a2: s0.map_or(true, |s| s0_row <= s),
        passes_a3: s0_row == 0 || min_nonzero_sq >= beta_min_threshold,
        passes_a4: s0.map_or(true, |s| s0_col <= s),
    }
}
