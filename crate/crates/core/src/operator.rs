//! Linear operators seen by the Krylov solver.

use alloc::boxed::Box;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::banded::BandedMatrix;
use crate::dense::{is_symmetric, DenseMatrix};
use crate::error::{Error, Result};
use crate::hss::HssMatrix;
use crate::lu::{DenseLu, Solve};

/// Largest size for which an HSS shifted solve falls back to dense LU.
pub const DEFAULT_DENSE_CAP: usize = 16384;

/// Products with `A`, `A^T` and factorizations of `A - sigma I`.
pub trait LinearOperator {
    fn size(&self) -> usize;
    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix>;
    fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix>;
    fn is_symmetric(&self) -> bool;
    fn factor_real(&self, sigma: f64) -> Result<Box<dyn Solve<f64> + '_>>;
    fn factor_complex(&self, sigma: Complex64) -> Result<Box<dyn Solve<Complex64> + '_>>;

    fn solve_shifted(&self, sigma: f64, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.factor_real(sigma)?.solve(rhs, false))
    }

    fn solve_shifted_transpose(&self, sigma: f64, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.factor_real(sigma)?.solve(rhs, true))
    }
}

fn check_rows(context: &'static str, n: usize, x: &DenseMatrix) -> Result<()> {
    if x.nrows() != n {
        return Err(Error::DimensionMismatch {
            context,
            expected: n,
            found: x.nrows(),
        });
    }
    Ok(())
}

impl LinearOperator for BandedMatrix {
    fn size(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.matvec(x)
    }

    fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.matvec_transpose(x)
    }

    fn is_symmetric(&self) -> bool {
        BandedMatrix::is_symmetric(self)
    }

    fn factor_real(&self, sigma: f64) -> Result<Box<dyn Solve<f64> + '_>> {
        Ok(Box::new(self.factor_shifted(sigma)?))
    }

    fn factor_complex(&self, sigma: Complex64) -> Result<Box<dyn Solve<Complex64> + '_>> {
        Ok(Box::new(self.factor_shifted(sigma)?))
    }
}

fn dense_factor<T: crate::lu::Scalar>(a: DMatrix<T>, sigma: Complex64) -> Result<DenseLu<T>> {
    DenseLu::new(a).map_err(|_| Error::SingularShift { shift: sigma })
}

impl LinearOperator for DenseMatrix {
    fn size(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        check_rows("dense apply", self.nrows(), x)?;
        Ok(self * x)
    }

    fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        check_rows("dense apply transpose", self.nrows(), x)?;
        Ok(self.tr_mul(x))
    }

    fn is_symmetric(&self) -> bool {
        is_symmetric(self)
    }

    fn factor_real(&self, sigma: f64) -> Result<Box<dyn Solve<f64> + '_>> {
        let n = self.nrows();
        let m = self - DenseMatrix::identity(n, n) * sigma;
        Ok(Box::new(dense_factor(m, sigma.into())?))
    }

    fn factor_complex(&self, sigma: Complex64) -> Result<Box<dyn Solve<Complex64> + '_>> {
        let n = self.nrows();
        let m = self.map(|v| Complex64::new(v, 0.0)) - DMatrix::identity(n, n) * sigma;
        Ok(Box::new(dense_factor(m, sigma)?))
    }
}

impl HssMatrix {
    /// Solves `(H - sigma I) X = rhs` through a dense LU when `n <= cap`.
    pub fn solve_shifted(&self, sigma: f64, rhs: &DenseMatrix, cap: usize) -> Result<DenseMatrix> {
        check_rows("hss_solve_shifted", self.n(), rhs)?;
        Ok(self.factor_shifted_dense(sigma, cap)?.solve(rhs, false))
    }

    pub fn factor_shifted_dense(&self, sigma: f64, cap: usize) -> Result<DenseLu<f64>> {
        let n = self.n();
        if n > cap {
            return Err(Error::DenseCapExceeded { n, cap });
        }
        dense_factor(self.to_dense() - DenseMatrix::identity(n, n) * sigma, sigma.into())
    }

    /// Approximate structural symmetry: equal bases, transposed couplings, symmetric leaves.
    pub fn is_symmetric(&self) -> bool {
        let close = |a: &DenseMatrix, b: &DenseMatrix| {
            a.shape() == b.shape() && (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
        };
        self.nodes().iter().enumerate().all(|(id, nd)| {
            let leaf = self.tree().is_leaf(id);
            close(&nd.u, &nd.v)
                && (!leaf || is_symmetric(&nd.d))
                && (leaf || close(&nd.s12.transpose(), &nd.s21))
        })
    }
}

impl LinearOperator for HssMatrix {
    fn size(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.matvec_op(x, false)
    }

    fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.matvec_op(x, true)
    }

    fn is_symmetric(&self) -> bool {
        HssMatrix::is_symmetric(self)
    }

    fn factor_real(&self, sigma: f64) -> Result<Box<dyn Solve<f64> + '_>> {
        Ok(Box::new(self.factor_shifted_dense(sigma, DEFAULT_DENSE_CAP)?))
    }

    fn factor_complex(&self, sigma: Complex64) -> Result<Box<dyn Solve<Complex64> + '_>> {
        let n = self.n();
        if n > DEFAULT_DENSE_CAP {
            return Err(Error::DenseCapExceeded {
                n,
                cap: DEFAULT_DENSE_CAP,
            });
        }
        let m = self.to_dense().map(|v| Complex64::new(v, 0.0)) - DMatrix::identity(n, n) * sigma;
        Ok(Box::new(dense_factor(m, sigma)?))
    }
}

/// `blkdiag(A1, A2)` built from two operators.
pub struct BlockDiagonal<'a> {
    pub first: &'a dyn LinearOperator,
    pub second: &'a dyn LinearOperator,
}

struct BlockSolve<'a, T: crate::lu::Scalar> {
    first: Box<dyn Solve<T> + 'a>,
    second: Box<dyn Solve<T> + 'a>,
}

impl<T: crate::lu::Scalar> Solve<T> for BlockSolve<'_, T> {
    fn size(&self) -> usize {
        self.first.size() + self.second.size()
    }

    fn solve(&self, rhs: &DMatrix<T>, transpose: bool) -> DMatrix<T> {
        let n1 = self.first.size();
        let n2 = self.second.size();
        let top = self.first.solve(&rhs.rows(0, n1).into_owned(), transpose);
        let bot = self.second.solve(&rhs.rows(n1, n2).into_owned(), transpose);
        let mut x = DMatrix::zeros(n1 + n2, rhs.ncols());
        x.rows_mut(0, n1).copy_from(&top);
        x.rows_mut(n1, n2).copy_from(&bot);
        x
    }
}

impl BlockDiagonal<'_> {
    fn split(&self, x: &DenseMatrix, transpose: bool) -> Result<DenseMatrix> {
        let (n1, n2) = (self.first.size(), self.second.size());
        check_rows("block diagonal apply", n1 + n2, x)?;
        let top = x.rows(0, n1).into_owned();
        let bot = x.rows(n1, n2).into_owned();
        let (yt, yb) = if transpose {
            (self.first.apply_transpose(&top)?, self.second.apply_transpose(&bot)?)
        } else {
            (self.first.apply(&top)?, self.second.apply(&bot)?)
        };
        let mut y = DenseMatrix::zeros(n1 + n2, x.ncols());
        y.rows_mut(0, n1).copy_from(&yt);
        y.rows_mut(n1, n2).copy_from(&yb);
        Ok(y)
    }
}

impl LinearOperator for BlockDiagonal<'_> {
    fn size(&self) -> usize {
        self.first.size() + self.second.size()
    }

    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.split(x, false)
    }

    fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.split(x, true)
    }

    fn is_symmetric(&self) -> bool {
        self.first.is_symmetric() && self.second.is_symmetric()
    }

    fn factor_real(&self, sigma: f64) -> Result<Box<dyn Solve<f64> + '_>> {
        Ok(Box::new(BlockSolve {
            first: self.first.factor_real(sigma)?,
            second: self.second.factor_real(sigma)?,
        }))
    }

    fn factor_complex(&self, sigma: Complex64) -> Result<Box<dyn Solve<Complex64> + '_>> {
        Ok(Box::new(BlockSolve {
            first: self.first.factor_complex(sigma)?,
            second: self.second.factor_complex(sigma)?,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hss::ClusterTree;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spd(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let g = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &g * g.transpose() / n as f64 + DenseMatrix::identity(n, n)
    }

    #[test]
    fn hss_shifted_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = ClusterTree::new(128, 16);
        let two = HssMatrix::block_diagonal(&tree, |r| DenseMatrix::identity(r.len(), r.len()) * 2.0);
        let rhs = DenseMatrix::from_fn(128, 2, |_, _| rng.random_range(-1.0..1.0));
        assert!((two.solve_shifted(0.0, &rhs, DEFAULT_DENSE_CAP).unwrap() - &rhs / 2.0).norm() < 1e-14);
        let diag = HssMatrix::block_diagonal(&tree, |r| {
            DenseMatrix::from_diagonal(&nalgebra::DVector::from_fn(r.len(), |i, _| (r.start + i) as f64))
        });
        assert!(matches!(diag.solve_shifted(5.0, &rhs, DEFAULT_DENSE_CAP), Err(Error::SingularShift { .. })));

        let a = spd(128, &mut rng);
        let h = HssMatrix::from_dense(&a, &tree, 1e-12).unwrap();
        let x = h.solve_shifted(-1.0, &rhs, DEFAULT_DENSE_CAP).unwrap();
        let res = h.matvec(&x).unwrap() + &x - &rhs;
        assert!(res.norm() <= 1e-10 * rhs.norm());
        assert!(matches!(h.solve_shifted(-1.0, &rhs, 64), Err(Error::DenseCapExceeded { .. })));
    }

    #[test]
    fn apply_and_solve_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = spd(40, &mut rng);
        let band = BandedMatrix::from_fn(40, 2, 1, |_, _| rng.random_range(-1.0..1.0));
        let h = HssMatrix::from_dense(&a, &ClusterTree::new(40, 10), 1e-13).unwrap();
        let bd = BlockDiagonal { first: &band, second: &h };
        let ops: [&dyn LinearOperator; 4] = [&a, &band, &h, &bd];
        let sigma = Complex64::new(0.4, 0.9);
        for op in ops {
            let n = op.size();
            let rhs = DenseMatrix::from_fn(n, 2, |_, _| rng.random_range(-1.0..1.0));
            for t in [false, true] {
                let x = op.factor_real(0.25).unwrap().solve(&rhs, t);
                let ax = if t { op.apply_transpose(&x).unwrap() } else { op.apply(&x).unwrap() };
                assert!((ax - &x * 0.25 - &rhs).norm() < 1e-10 * rhs.norm());
                let rc = rhs.map(|v| Complex64::new(v, 0.0));
                let y = op.factor_complex(sigma).unwrap().solve(&rc, t);
                let (yr, yi) = (y.map(|z| z.re), y.map(|z| z.im));
                let app = |m: &DenseMatrix| if t { op.apply_transpose(m).unwrap() } else { op.apply(m).unwrap() };
                // (A - sigma)(yr + i yi) = rhs
                let re = app(&yr) - &yr * sigma.re + &yi * sigma.im - &rhs;
                let im = app(&yi) - &yi * sigma.re - &yr * sigma.im;
                assert!(re.norm() + im.norm() < 1e-10 * rhs.norm());
            }
        }
        assert!(LinearOperator::is_symmetric(&h));
        assert!(!LinearOperator::is_symmetric(&band));
    }
}
