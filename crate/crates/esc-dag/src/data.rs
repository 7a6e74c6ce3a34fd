//! Observation matrix and support sets.
//!
//! Columns use 1-based indices throughout: column `j` of the data matrix is
//! the response of the `j`-th autoregression and columns `1..j-1` are its
//! candidate predictors. A [`SupportSet`] marks which of those predictors
//! carry nonzero coefficients.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("data matrix must have n >= 2 rows and p >= 2 columns (got {n} x {p})")]
    TooSmall { n: usize, p: usize },
    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum SupportError {
    #[error("support column {column} out of range 2..={p}")]
    ColumnOutOfRange { column: usize, p: usize },
    #[error("support index {index} invalid for column {column} (must be in 1..{column})")]
    IndexOutOfRange { index: usize, column: usize },
    #[error("duplicate support index {index}")]
    Duplicate { index: usize },
}

/// Immutable n x p observation matrix, stored column-major for fast
/// column dot products. Safe to share across worker threads.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    cols: Vec<Vec<f64>>,
    n: usize,
    p: usize,
}

impl DataMatrix {
    pub fn from_columns(cols: Vec<Vec<f64>>) -> Result<Self, DataError> {
        let p = cols.len();
        let n = cols.first().map_or(0, Vec::len);
        if n < 2 || p < 2 {
            return Err(DataError::TooSmall { n, p });
        }
        for (c, col) in cols.iter().enumerate() {
            if col.len() != n {
                return Err(DataError::RaggedRow {
                    row: 1,
                    got: col.len(),
                    expected: n,
                });
            }
            for (r, v) in col.iter().enumerate() {
                if !v.is_finite() {
                    return Err(DataError::NonFinite { row: r + 1, col: c + 1 });
                }
            }
        }
        Ok(Self { cols, n, p })
    }

    /// Builds from row-major data (rows are observations).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DataError> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if n < 2 || p < 2 {
            return Err(DataError::TooSmall { n, p });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(DataError::RaggedRow {
                    row: r + 1,
                    got: row.len(),
                    expected: p,
                });
            }
        }
        let mut cols = vec![vec![0.0; n]; p];
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                cols[c][r] = v;
            }
        }
        Self::from_columns(cols)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Column `j` (1-based).
    pub fn col(&self, j: usize) -> &[f64] {
        &self.cols[j - 1]
    }

    /// Dot product of columns `a` and `b` (1-based).
    pub fn dot(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (&self.cols[a - 1], &self.cols[b - 1]);
        x.iter().zip(y).map(|(u, v)| u * v).sum()
    }

    pub fn col_norm_sq(&self, j: usize) -> f64 {
        self.dot(j, j)
    }

    /// Entry at 1-based (row, col).
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cols[col - 1][row - 1]
    }

    /// Scaled copy (every entry multiplied by `c`). Test and CLI helper.
    pub fn scaled(&self, c: f64) -> Self {
        let cols = self
            .cols
            .iter()
            .map(|col| col.iter().map(|v| v * c).collect())
            .collect();
        Self { cols, n: self.n, p: self.p }
    }

    /// Centers each column and rescales it to unit sample standard deviation.
    /// Columns with zero variance are left centered only.
    pub fn standardized(&self) -> Self {
        let n = self.n as f64;
        let cols = self
            .cols
            .iter()
            .map(|col| {
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                let sd = var.sqrt();
                if sd > 0.0 {
                    col.iter().map(|v| (v - mean) / sd).collect()
                } else {
                    col.iter().map(|v| v - mean).collect()
                }
            })
            .collect();
        Self { cols, n: self.n, p: self.p }
    }
}

/// Sorted index set S_j of candidate predictors for column `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportSet {
    column: usize,
    indices: Vec<usize>,
}

impl SupportSet {
    /// Normalizes `indices` to sorted order and validates ranges.
    pub fn new(column: usize, mut indices: Vec<usize>) -> Result<Self, SupportError> {
        if column < 2 {
            return Err(SupportError::ColumnOutOfRange { column, p: column });
        }
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(SupportError::Duplicate { index: w[0] });
            }
        }
        for &l in &indices {
            if l == 0 || l >= column {
                return Err(SupportError::IndexOutOfRange { index: l, column });
            }
        }
        Ok(Self { column, indices })
    }

    pub fn empty(column: usize) -> Self {
        Self { column, indices: Vec::new() }
    }

    pub fn column(&self) -> usize {
        self.column
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, l: usize) -> bool {
        self.indices.binary_search(&l).is_ok()
    }

    /// Copy with index `l` inserted (panics if already present).
    pub fn with_added(&self, l: usize) -> Self {
        debug_assert!(!self.contains(l));
        let pos = self.indices.partition_point(|&x| x < l);
        let mut indices = self.indices.clone();
        indices.insert(pos, l);
        Self { column: self.column, indices }
    }

    /// Copy with index `l` removed (panics if absent).
    pub fn with_removed(&self, l: usize) -> Self {
        let pos = self
            .indices
            .binary_search(&l)
            .expect("with_removed: index not in support");
        let mut indices = self.indices.clone();
        indices.remove(pos);
        Self { column: self.column, indices }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_matches_columns() {
        let m = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(m.n(), 3);
        assert_eq!(m.p(), 2);
        assert_eq!(m.col(1), &[1.0, 3.0, 5.0]);
        assert_eq!(m.col(2), &[2.0, 4.0, 6.0]);
        assert_eq!(m.get(2, 2), 4.0);
    }

    #[test]
    fn rejects_non_finite() {
        let err = DataMatrix::from_rows(&[vec![1.0, f64::NAN], vec![3.0, 4.0]]).unwrap_err();
        assert_eq!(err, DataError::NonFinite { row: 1, col: 2 });
    }

    #[test]
    fn rejects_too_small() {
        assert!(matches!(
            DataMatrix::from_rows(&[vec![1.0, 2.0]]),
            Err(DataError::TooSmall { .. })
        ));
    }

    #[test]
    fn support_normalizes_order() {
        let s = SupportSet::new(5, vec![3, 1, 2]).unwrap();
        assert_eq!(s.indices(), &[1, 2, 3]);
        assert!(s.contains(2));
        assert!(!s.contains(4));
    }

    #[test]
    fn support_rejects_bad_index() {
        assert!(SupportSet::new(3, vec![3]).is_err());
        assert!(SupportSet::new(3, vec![0]).is_err());
        assert!(SupportSet::new(3, vec![1, 1]).is_err());
    }

    #[test]
    fn add_remove_round_trip() {
        let s = SupportSet::new(6, vec![1, 4]).unwrap();
        let s2 = s.with_added(3);
        assert_eq!(s2.indices(), &[1, 3, 4]);
        assert_eq!(s2.with_removed(3), s);
    }
}
