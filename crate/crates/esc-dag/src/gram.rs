//! Least-squares scoring over support sets.
//!
//! For a fixed response column `j` and support `S`, this module computes the
//! residual variance `d̂_S = n⁻¹‖x̃_j − P_S x̃_j‖²` and the least-squares
//! coefficients `â_S`, caching a Cholesky factor of the Gram matrix
//! `X_SᵀX_S` so that add/remove-one-column proposals cost O(|S|²) work on
//! the factor instead of a full refit.

use crate::data::{DataMatrix, SupportSet};
use thiserror::Error;

/// A Gram pivot below this fraction of the largest diagonal Gram entry marks
/// the support as numerically rank-deficient.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum GramError {
    #[error("singular Gram matrix for column {column} (support size {support_len})")]
    SingularGram { column: usize, support_len: usize },
}

/// Cached least-squares fit of one response column on one support set.
///
/// `order` holds the support indices in factorization order (insertion
/// order, not necessarily sorted); `chol` is the packed row-major lower
/// Cholesky factor of the Gram matrix in that order.
#[derive(Debug, Clone)]
pub struct FitSummary {
    column: usize,
    order: Vec<usize>,
    chol: Vec<f64>,
    xty: Vec<f64>,
    yty: f64,
    max_gram_diag: f64,
    n: usize,
    d_hat: f64,
}

#[inline]
fn tri_offset(i: usize) -> usize {
    i * (i + 1) / 2
}

impl FitSummary {
    /// Fresh fit of column `S.column()` on support `S`.
    pub fn fit(data: &DataMatrix, s: &SupportSet) -> Result<Self, GramError> {
        let column = s.column();
        let mut fit = Self {
            column,
            order: Vec::with_capacity(s.len()),
            chol: Vec::with_capacity(tri_offset(s.len() + 1)),
            xty: Vec::with_capacity(s.len()),
            yty: data.col_norm_sq(column),
            max_gram_diag: 0.0,
            n: data.n(),
            d_hat: 0.0,
        };
        for &l in s.indices() {
            fit.extend(data, l)?;
        }
        fit.d_hat = fit.compute_d_hat();
        Ok(fit)
    }

    /// Estimated residual variance d̂_S (nonnegative).
    pub fn d_hat(&self) -> f64 {
        self.d_hat
    }

    pub fn support_len(&self) -> usize {
        self.order.len()
    }

    pub fn column(&self) -> usize {
        self.column
    }

    /// Appends column `l` to the factorization; does not refresh `d_hat`.
    fn extend(&mut self, data: &DataMatrix, l: usize) -> Result<(), GramError> {
        let k = self.order.len();
        let gll = data.col_norm_sq(l);
        self.max_gram_diag = self.max_gram_diag.max(gll);
        let g: Vec<f64> = self.order.iter().map(|&m| data.dot(m, l)).collect();
        // Forward solve L c = g against the existing k x k factor.
        let mut c = g;
        for i in 0..k {
            let off = tri_offset(i);
            let mut v = c[i];
            for q in 0..i {
                v -= self.chol[off + q] * c[q];
            }
            c[i] = v / self.chol[off + i];
        }
        let schur = gll - c.iter().map(|v| v * v).sum::<f64>();
        if !(schur > SINGULAR_PIVOT_TOL * self.max_gram_diag) {
            return Err(GramError::SingularGram {
                column: self.column,
                support_len: k + 1,
            });
        }
        self.chol.extend_from_slice(&c);
        self.chol.push(schur.sqrt());
        self.xty.push(data.dot(l, self.column));
        self.order.push(l);
        Ok(())
    }

    /// New fit with column `l` added to the support.
    pub fn update_add(&self, data: &DataMatrix, l: usize) -> Result<Self, GramError> {
        debug_assert!(!self.order.contains(&l));
        let mut fit = self.clone();
        fit.extend(data, l)?;
        fit.d_hat = fit.compute_d_hat();
        Ok(fit)
    }

    /// New fit with column `l` removed from the support.
    ///
    /// Uses the rank-one identity `L₂₂' L₂₂'ᵀ = L₂₂L₂₂ᵀ + l₂₁l₂₁ᵀ` for the
    /// trailing block, which is an update (never a downdate) and so cannot
    /// lose positive definiteness; a non-finite factor still falls back to a
    /// fresh factorization.
    pub fn update_remove(&self, data: &DataMatrix, l: usize) -> Result<Self, GramError> {
        let k = self
            .order
            .iter()
            .position(|&m| m == l)
            .expect("update_remove: index not in support");
        let s = self.order.len();
        let m = s - 1 - k; // trailing block size

        let mut order = self.order.clone();
        order.remove(k);
        let mut xty = self.xty.clone();
        xty.remove(k);

        let mut chol = Vec::with_capacity(tri_offset(s));
        chol.extend_from_slice(&self.chol[..tri_offset(k)]);
        // Rotation workspace: old column k entries below the pivot.
        let mut v = Vec::with_capacity(m);
        for i in (k + 1)..s {
            let off = tri_offset(i);
            chol.extend_from_slice(&self.chol[off..off + k]);
            v.push(self.chol[off + k]);
            chol.extend_from_slice(&self.chol[off + k + 1..off + i + 1]);
        }
        // Rank-one update of the trailing block (rows k.. of the new factor).
        let base = |r: usize, c: usize| tri_offset(k + r) + k + c;
        let mut ok = true;
        'outer: for j in 0..m {
            let ljj = chol[base(j, j)];
            let vj = v[j];
            let r = (ljj * ljj + vj * vj).sqrt();
            if !r.is_finite() || r <= 0.0 {
                ok = false;
                break 'outer;
            }
            let cth = r / ljj;
            let sth = vj / ljj;
            chol[base(j, j)] = r;
            for i in (j + 1)..m {
                let idx = base(i, j);
                let newv = (chol[idx] + sth * v[i]) / cth;
                v[i] = cth * v[i] - sth * newv;
                chol[idx] = newv;
            }
        }
        if !ok || chol.iter().any(|x| !x.is_finite()) {
            let s_new = SupportSet::new(self.column, order)
                .expect("update_remove: support invariant");
            return Self::fit(data, &s_new);
        }
        let mut fit = Self {
            column: self.column,
            order,
            chol,
            xty,
            yty: self.yty,
            max_gram_diag: self.max_gram_diag,
            n: self.n,
            d_hat: 0.0,
        };
        fit.d_hat = fit.compute_d_hat();
        Ok(fit)
    }

    fn compute_d_hat(&self) -> f64 {
        let w = self.forward_solve_xty();
        let rss = self.yty - w.iter().map(|v| v * v).sum::<f64>();
        rss.max(0.0) / self.n as f64
    }

    /// Solves L w = Xᵀy.
    fn forward_solve_xty(&self) -> Vec<f64> {
        let k = self.order.len();
        let mut w = self.xty.clone();
        for i in 0..k {
            let off = tri_offset(i);
            let mut v = w[i];
            for q in 0..i {
                v -= self.chol[off + q] * w[q];
            }
            w[i] = v / self.chol[off + i];
        }
        w
    }

    /// Least-squares coefficients in sorted support-index order.
    pub fn coefficients(&self) -> Vec<f64> {
        let k = self.order.len();
        let mut a = self.forward_solve_xty();
        // Backward solve Lᵀ a = w.
        for i in (0..k).rev() {
            let mut v = a[i];
            for q in (i + 1)..k {
                v -= self.chol[tri_offset(q) + i] * a[q];
            }
            a[i] = v / self.chol[tri_offset(i) + i];
        }
        self.to_sorted_order(a)
    }

    /// Draws a vector `â + scale · L⁻ᵀ z` with `z` provided by the caller in
    /// factorization order; result in sorted support-index order.
    pub(crate) fn coefficients_plus_whitened(&self, scale: f64, z: &[f64]) -> Vec<f64> {
        let k = self.order.len();
        debug_assert_eq!(z.len(), k);
        let mut a = self.forward_solve_xty();
        for (ai, zi) in a.iter_mut().zip(z) {
            *ai += scale * zi;
        }
        for i in (0..k).rev() {
            let mut v = a[i];
            for q in (i + 1)..k {
                v -= self.chol[tri_offset(q) + i] * a[q];
            }
            a[i] = v / self.chol[tri_offset(i) + i];
        }
        self.to_sorted_order(a)
    }

    fn to_sorted_order(&self, vals: Vec<f64>) -> Vec<f64> {
        let mut pairs: Vec<(usize, f64)> =
            self.order.iter().copied().zip(vals).collect();
        pairs.sort_unstable_by_key(|&(l, _)| l);
        pairs.into_iter().map(|(_, v)| v).collect()
    }
}

/// d̂_S for a fresh fit; −∞-score inadmissibility is signalled via the error.
pub fn residual_variance(data: &DataMatrix, s: &SupportSet) -> Result<f64, GramError> {
    Ok(FitSummary::fit(data, s)?.d_hat())
}

/// â_S for a fresh fit, ordered like `s.indices()`.
pub fn least_squares(data: &DataMatrix, s: &SupportSet) -> Result<Vec<f64>, GramError> {
    Ok(FitSummary::fit(data, s)?.coefficients())
}
