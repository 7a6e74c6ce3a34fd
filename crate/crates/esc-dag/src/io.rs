//! File formats: CSV for matrices (17-significant-digit decimals, exact
//! binary64 round trips), sparse triplet CSV for Cholesky factors and
//! inclusion probabilities, JSON for configs and summaries.

use crate::data::DataMatrix;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected {expected} fields, found {found}")]
    FieldCount { path: String, line: usize, expected: usize, found: usize },
    #[error("{path}:{line}: row has {found} values but previous rows have {expected}")]
    RowLength { path: String, line: usize, expected: usize, found: usize },
    #[error("{path}:{line}: non-numeric cell `{cell}`")]
    NonNumeric { path: String, line: usize, cell: String },
    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io { path: path.display().to_string(), source }
}

/// 17-significant-digit decimal form, enough for exact binary64 round trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_cell(path: &Path, line: usize, cell: &str) -> Result<f64, IoError> {
    cell.trim().parse::<f64>().map_err(|_| IoError::NonNumeric {
        path: path.display().to_string(),
        line,
        cell: cell.to_string(),
    })
}

/// Writes a dense matrix CSV, one observation per row, no header.
pub fn write_matrix_csv(path: &Path, data: &DataMatrix) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| io_err(path, e))?,
    );
    let mut line = String::new();
    for r in 1..=data.n() {
        line.clear();
        for c in 1..=data.p() {
            if c > 1 {
                line.push(',');
            }
            let _ = write!(line, "{}", fmt_f64(data.get(r, c)));
        }
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

pub fn read_matrix_csv(path: &Path) -> Result<DataMatrix, IoError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if let Some(w) = width {
            if cells.len() != w {
                return Err(IoError::RowLength {
                    path: path.display().to_string(),
                    line: lineno,
                    expected: w,
                    found: cells.len(),
                });
            }
        } else {
            width = Some(cells.len());
        }
        let row = cells
            .iter()
            .map(|c| parse_cell(path, lineno, c))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    DataMatrix::from_rows(&rows).map_err(|e| IoError::Invalid {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Sparse lower-triangular triplets `j,l,value` with a header line.
pub fn write_triplets_csv(
    path: &Path,
    header_value: &str,
    entries: impl Iterator<Item = (usize, usize, f64)>,
) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| io_err(path, e))?,
    );
    writeln!(out, "j,l,{header_value}").map_err(|e| io_err(path, e))?;
    for (j, l, v) in entries {
        writeln!(out, "{j},{l},{}", fmt_f64(v)).map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

pub fn read_triplets_csv(path: &Path) -> Result<Vec<(usize, usize, f64)>, IoError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if lineno == 1 || line.trim().is_empty() {
            continue; // header
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(IoError::FieldCount {
                path: path.display().to_string(),
                line: lineno,
                expected: 3,
                found: cells.len(),
            });
        }
        let parse_idx = |cell: &str| -> Result<usize, IoError> {
            cell.trim().parse::<usize>().map_err(|_| IoError::Malformed {
                path: path.display().to_string(),
                line: lineno,
                message: format!("invalid index `{cell}`"),
            })
        };
        let j = parse_idx(cells[0])?;
        let l = parse_idx(cells[1])?;
        if l >= j || l == 0 {
            return Err(IoError::Malformed {
                path: path.display().to_string(),
                line: lineno,
                message: format!("triplet ({j}, {l}) is not strictly lower-triangular"),
            });
        }
        out.push((j, l, parse_cell(path, lineno, cells[2])?));
    }
    Ok(out)
}

/// Single-column CSV with a header, used for the D diagonal.
pub fn write_vector_csv(path: &Path, header: &str, values: &[f64]) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| io_err(path, e))?,
    );
    writeln!(out, "{header}").map_err(|e| io_err(path, e))?;
    for v in values {
        writeln!(out, "{}", fmt_f64(*v)).map_err(|e| io_err(path, e))?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>, IoError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if lineno == 1 || line.trim().is_empty() {
            continue;
        }
        out.push(parse_cell(path, lineno, &line)?);
    }
    Ok(out)
}

/// Reconstructs a full strictly-lower-triangular matrix (`rows[j-2]` of
/// length j−1) from triplets; `p` is inferred from the largest row index
/// unless given.
pub fn triplets_to_lower(
    entries: &[(usize, usize, f64)],
    p: Option<usize>,
) -> Result<Vec<Vec<f64>>, String> {
    let max_j = entries.iter().map(|&(j, _, _)| j).max().unwrap_or(1);
    let p = p.unwrap_or(max_j);
    if max_j > p {
        return Err(format!("triplet row {max_j} exceeds dimension {p}"));
    }
    let mut rows: Vec<Vec<f64>> = (2..=p).map(|j| vec![0.0; j - 1]).collect();
    for &(j, l, v) in entries {
        rows[j - 2][l - 1] = v;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tempfile::tempdir;

    #[test]
    fn matrix_round_trip_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..5).map(|_| rng.gen::<f64>() * 1e6 - 5e5).collect())
            .collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_matrix_csv(&path, &data).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(data, back);
    }

    #[test]
    fn matrix_read_reports_bad_cell_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1.0,2.0\n3.0,oops\n").unwrap();
        let err = read_matrix_csv(&path).unwrap_err();
        match err {
            IoError::NonNumeric { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn matrix_read_reports_row_length_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "1.0,2.0\n3.0\n").unwrap();
        let err = read_matrix_csv(&path).unwrap_err();
        match err {
            IoError::RowLength { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn triplets_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let entries = vec![(2usize, 1usize, 0.5f64), (5, 3, -0.25)];
        write_triplets_csv(&path, "value", entries.clone().into_iter()).unwrap();
        assert_eq!(read_triplets_csv(&path).unwrap(), entries);
    }

    #[test]
    fn triplets_reject_upper_entries() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "j,l,value\n2,2,0.5\n").unwrap();
        assert!(matches!(
            read_triplets_csv(&path).unwrap_err(),
            IoError::Malformed { line: 2, .. }
        ));
    }

    #[test]
    fn vector_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let values = vec![2.5, 3.125, 4.75];
        write_vector_csv(&path, "d", &values).unwrap();
        assert_eq!(read_vector_csv(&path).unwrap(), values);
    }
}
