//! Dense reference values, computed with faer independently of the core crate where possible.

use dcfunm::{DenseMatrix, FunctionSpec};
use faer::{Mat, Side};

use crate::error::{CliError, CliResult};
use crate::run::Value;

/// Symmetric input uses a faer eigendecomposition; nonsymmetric input falls back to the
/// core's dense evaluator.
pub fn dense_funm(a: &DenseMatrix, f: &FunctionSpec, symmetric: bool) -> CliResult<DenseMatrix> {
    if !symmetric {
        return Ok(dcfunm::funm_dense(a, f)?);
    }
    let n = a.nrows();
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[(i, j)]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| CliError::numerical(format!("reference eigensolver failed: {e:?}")))?;
    let u = evd.U();
    let s = evd.S().column_vector();
    let fs: Vec<f64> = (0..n).map(|k| f.eval(s[k])).collect();
    if fs.iter().any(|x| !x.is_finite()) {
        return Err(CliError::numerical("f is not finite on the spectrum"));
    }
    let scaled = Mat::<f64>::from_fn(n, n, |i, k| u[(i, k)] * fs[k]);
    let r = &scaled * u.transpose();
    Ok(DenseMatrix::from_fn(n, n, |i, j| r[(i, j)]))
}

/// Relative Frobenius error (full), relative 2-norm error (diagonal) or relative trace error.
pub fn relative_error(v: &Value, exact: &DenseMatrix) -> f64 {
    match v {
        Value::Hss(h) => (h.to_dense() - exact).norm() / exact.norm(),
        Value::Banded(b) => (b.to_dense() - exact).norm() / exact.norm(),
        Value::Diagonal(d) => {
            let e = exact.diagonal();
            (d - &e).norm() / e.norm()
        }
        Value::Trace(t) => {
            let e = exact.trace();
            (t - e).abs() / e.abs()
        }
    }
}
