//! CSV formats for matrices, vectors and success curves.
//!
//! Matrices are plain comma-separated rows. Vectors use a sparse layout: a
//! `length` line, a column header, then one `index,value` row per nonzero,
//! so a 1%-dense signal of length 10^5 stays small on disk. Curve files
//! come in two layouts: the reproduction format with a fixed six-column
//! header, and the sweep format that appends the mean judged error and mean
//! decode time.

use crate::error::{Error, Result};
use crate::harness::CurvePoint;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use std::fmt::Write as _;
use std::path::Path;

fn parse_number(field: &str, path: &Path, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::config(format!(
            "{}:{line}: expected a number, got {field:?}",
            path.display()
        ))
    })
}

fn parse_index(field: &str, path: &Path, line: usize) -> Result<usize> {
    field.trim().parse::<usize>().map_err(|_| {
        Error::config(format!(
            "{}:{line}: expected an index, got {field:?}",
            path.display()
        ))
    })
}

/// Writes a matrix as one comma-separated line per row.
pub fn write_matrix_csv(path: &Path, matrix: &ArrayView2<f64>) -> Result<()> {
    let mut out = String::new();
    for row in matrix.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a matrix written by [`write_matrix_csv`]: rectangular rows of
/// numbers, no header.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|field| parse_number(field, path, i + 1))
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::config(format!(
                    "{}:{}: row has {} entries, expected {}",
                    path.display(),
                    i + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::config(format!("{}: no matrix rows", path.display())));
    }
    let cols = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let shape = (flat.len() / cols, cols);
    Array2::from_shape_vec(shape, flat)
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

/// Writes a vector in the sparse `index,value` layout.
pub fn write_signal_csv(path: &Path, signal: &ArrayView1<f64>) -> Result<()> {
    let mut out = format!("length,{}\nindex,value\n", signal.len());
    for (i, v) in signal.iter().enumerate() {
        if *v != 0.0 {
            let _ = writeln!(out, "{i},{v}");
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a vector written by [`write_signal_csv`]. Unlisted entries are
/// zero; indices must stay within the declared length.
pub fn read_signal_csv(path: &Path) -> Result<Array1<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::config(format!("{}: empty file", path.display())))?;
    let length = match header.split(',').collect::<Vec<_>>().as_slice() {
        ["length", n] => parse_index(n, path, 1)?,
        _ => {
            return Err(Error::config(format!(
                "{}:1: expected a \"length,N\" line, got {header:?}",
                path.display()
            )))
        }
    };
    let mut signal = Array1::zeros(length);
    for (i, line) in lines {
        if line.trim().is_empty() || line.starts_with("index,") {
            continue;
        }
        let (index_field, value_field) = line.split_once(',').ok_or_else(|| {
            Error::config(format!(
                "{}:{}: expected index,value",
                path.display(),
                i + 1
            ))
        })?;
        let index = parse_index(index_field, path, i + 1)?;
        if index >= length {
            return Err(Error::config(format!(
                "{}:{}: index {index} outside length {length}",
                path.display(),
                i + 1
            )));
        }
        signal[index] = parse_number(value_field, path, i + 1)?;
    }
    Ok(signal)
}

/// Writes a curve in the reproduction format. The header and column order
/// are a stable interface; downstream plotting depends on them.
pub fn write_reproduce_csv(
    path: &Path,
    figure: u8,
    label: &str,
    points: &[CurvePoint],
) -> Result<()> {
    let mut out = String::from("figure,curve_label,k,trials,successes,rate\n");
    for p in points {
        let _ = writeln!(
            out,
            "{figure},{label},{},{},{},{}",
            p.k, p.trials, p.successes, p.rate
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes a curve in the sweep format, which appends the mean judged error
/// among successes and the mean decode time (the only rerun-dependent
/// column).
pub fn write_sweep_csv(path: &Path, label: &str, points: &[CurvePoint]) -> Result<()> {
    let mut out = String::from(
        "curve_label,k,trials,successes,rate,mean_relative_error,mean_runtime_seconds\n",
    );
    for p in points {
        let _ = writeln!(
            out,
            "{label},{},{},{},{},{},{}",
            p.k, p.trials, p.successes, p.rate, p.mean_relative_error, p.mean_runtime_seconds
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn temp_path(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("io_tests_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn matrices_round_trip() {
        let m = array![[1.0, -2.5, 3.0], [0.0, 4.125, -0.001]];
        let path = temp_path("matrix.csv");
        write_matrix_csv(&path, &m.view()).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_and_corrupt_matrices_are_rejected() {
        let path = temp_path("bad_matrix.csv");
        std::fs::write(&path, "1,2,3\n4,5\n").unwrap();
        assert!(read_matrix_csv(&path).is_err());
        std::fs::write(&path, "1,x,3\n").unwrap();
        assert!(read_matrix_csv(&path).is_err());
        std::fs::write(&path, "").unwrap();
        assert!(read_matrix_csv(&path).is_err());
    }

    #[test]
    fn signals_round_trip_sparsely() {
        let mut x = Array1::zeros(100);
        x[3] = -1.5;
        x[97] = 2.25;
        let path = temp_path("signal.csv");
        write_signal_csv(&path, &x.view()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().count(),
            4,
            "two nonzeros plus two header lines"
        );
        let back = read_signal_csv(&path).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        let path = temp_path("bad_signal.csv");
        std::fs::write(&path, "length,4\nindex,value\n9,1.0\n").unwrap();
        assert!(read_signal_csv(&path).is_err());
        std::fs::write(&path, "nonsense\n").unwrap();
        assert!(read_signal_csv(&path).is_err());
    }

    #[test]
    fn curve_headers_are_pinned() {
        let points = vec![CurvePoint {
            k: 57,
            trials: 50,
            successes: 41,
            rate: 0.82,
            mean_relative_error: 1e-9,
            mean_runtime_seconds: 0.25,
        }];
        let path = temp_path("curve.csv");
        write_reproduce_csv(&path, 2, "lga_128x256", &points).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "figure,curve_label,k,trials,successes,rate"
        );
        assert_eq!(lines.next().unwrap(), "2,lga_128x256,57,50,41,0.82");

        write_sweep_csv(&path, "demo", &points).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(
            "curve_label,k,trials,successes,rate,mean_relative_error,mean_runtime_seconds\n"
        ));
        assert!(text.contains("demo,57,50,41,0.82,0.000000001,0.25"));
    }
}
