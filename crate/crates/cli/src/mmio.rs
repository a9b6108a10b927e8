//! Matrix Market coordinate files. Reading goes through nalgebra-sparse; symmetric files are
//! written lower-triangle only.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use dcfunm::{BandedMatrix, DenseMatrix};
use nalgebra_sparse::io::{load_coo_from_matrix_market_file, save_to_matrix_market_file};
use nalgebra_sparse::CooMatrix;

use crate::error::{CliError, CliResult};
use crate::specs::Matrix;

/// Reads a square matrix and stores it in band form with the detected bandwidth.
pub fn read_banded(path: &Path) -> CliResult<BandedMatrix> {
    if !path.exists() {
        return Err(CliError::input(format!("input file {} does not exist", path.display())));
    }
    let coo: CooMatrix<f64> = load_coo_from_matrix_market_file(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if coo.nrows() != coo.ncols() {
        return Err(CliError::input(format!(
            "{}: matrix is {}x{}, expected square",
            path.display(),
            coo.nrows(),
            coo.ncols()
        )));
    }
    let entries: Vec<(usize, usize, f64)> = coo.triplet_iter().map(|(i, j, v)| (i, j, *v)).collect();
    Ok(BandedMatrix::from_triplets(coo.nrows(), &entries)?)
}

/// Writes every stored band entry (symmetric input in symmetric format).
pub fn write_banded(path: &Path, a: &BandedMatrix) -> CliResult<()> {
    let n = a.n();
    let entries = (0..n).flat_map(|i| a.row_range(i).map(move |j| (i, j)));
    if a.is_symmetric() {
        let lower: Vec<_> = entries.filter(|&(i, j)| j <= i).map(|(i, j)| (i, j, a.get(i, j))).collect();
        write_symmetric(path, n, &lower)
    } else {
        let mut coo = CooMatrix::new(n, n);
        for (i, j) in entries {
            coo.push(i, j, a.get(i, j));
        }
        save_to_matrix_market_file(&coo, path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

pub fn write_dense(path: &Path, a: &DenseMatrix) -> CliResult<()> {
    let n = a.nrows();
    if a == &a.transpose() {
        let lower: Vec<_> = (0..n).flat_map(|j| (j..n).map(move |i| (i, j, a[(i, j)]))).collect();
        return write_symmetric(path, n, &lower);
    }
    let mut coo = CooMatrix::new(a.nrows(), a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            coo.push(i, j, a[(i, j)]);
        }
    }
    save_to_matrix_market_file(&coo, path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &Path, m: &Matrix) -> CliResult<()> {
    match m {
        Matrix::Banded(a) => write_banded(path, a),
        Matrix::Dense(a) => write_dense(path, a),
    }
}

fn write_symmetric(path: &Path, n: usize, lower: &[(usize, usize, f64)]) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{n} {n} {}", lower.len())?;
    for &(i, j, v) in lower {
        writeln!(w, "{} {} {v:e}", i + 1, j + 1)?;
    }
    w.flush()?;
    Ok(())
}
