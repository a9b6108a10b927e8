use alloc::vec::Vec;

use nalgebra::{ComplexField, DMatrix};

/// Scalar type usable by the LU kernels: `f64` or `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy {}
impl<T: ComplexField<RealField = f64> + Copy> Scalar for T {}

/// Relative pivot threshold below which a factorization is declared singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// A factorization of a shifted matrix `A - sigma I` that can be reused for many right-hand sides.
pub trait Solve<T: Scalar> {
    fn size(&self) -> usize;

    /// Solves `(A - sigma I) X = rhs`, or the transposed system when `transpose` is set.
    /// The transpose is the plain (non-conjugated) one.
    fn solve(&self, rhs: &DMatrix<T>, transpose: bool) -> DMatrix<T>;
}

/// Dense LU with partial pivoting, stored column-major in place.
#[derive(Debug, Clone)]
pub struct DenseLu<T: Scalar> {
    n: usize,
    lu: DMatrix<T>,
    piv: Vec<usize>,
}

/// Index of the pivot that fell below the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPivot(pub usize);

impl<T: Scalar> DenseLu<T> {
    pub fn new(a: DMatrix<T>) -> Result<Self, SingularPivot> {
        assert!(a.is_square(), "DenseLu needs a square matrix");
        let n = a.nrows();
        let norm = one_norm(&a);
        let mut lu = a;
        let mut piv = Vec::with_capacity(n);
        let tol = PIVOT_TOL * norm;
        let d = lu.as_mut_slice();
        for k in 0..n {
            let mut p = k;
            let mut best = d[k + k * n].modulus();
            for i in k + 1..n {
                let v = d[i + k * n].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tol) || best == 0.0 {
                return Err(SingularPivot(k));
            }
            piv.push(p);
            if p != k {
                for j in 0..n {
                    d.swap(k + j * n, p + j * n);
                }
            }
            let inv = T::one() / d[k + k * n];
            for i in k + 1..n {
                d[i + k * n] *= inv;
            }
            for j in k + 1..n {
                let akj = d[k + j * n];
                if akj == T::zero() {
                    continue;
                }
                let (left, right) = d.split_at_mut(j * n);
                let colk = &left[k * n..k * n + n];
                let colj = &mut right[..n];
                for i in k + 1..n {
                    colj[i] -= colk[i] * akj;
                }
            }
        }
        Ok(DenseLu { n, lu, piv })
    }

    /// log of |det|.
    pub fn log_abs_det(&self) -> f64 {
        (0..self.n).map(|k| self.lu[(k, k)].modulus().ln()).sum()
    }

    pub fn inverse(&self) -> DMatrix<T> {
        self.solve(&DMatrix::identity(self.n, self.n), false)
    }

    fn solve_in_place(&self, x: &mut [T]) {
        let n = self.n;
        let d = self.lu.as_slice();
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let xk = x[k];
            if xk != T::zero() {
                for i in k + 1..n {
                    x[i] -= d[i + k * n] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            x[k] /= d[k + k * n];
            let xk = x[k];
            if xk != T::zero() {
                for i in 0..k {
                    x[i] -= d[i + k * n] * xk;
                }
            }
        }
    }

    fn solve_transpose_in_place(&self, x: &mut [T]) {
        let n = self.n;
        let d = self.lu.as_slice();
        for k in 0..n {
            let col = &d[k * n..k * n + k];
            let mut s = x[k];
            for i in 0..k {
                s -= col[i] * x[i];
            }
            x[k] = s / d[k + k * n];
        }
        for k in (0..n).rev() {
            let col = &d[k * n..(k + 1) * n];
            let mut s = x[k];
            for i in k + 1..n {
                s -= col[i] * x[i];
            }
            x[k] = s;
        }
        for k in (0..n).rev() {
            x.swap(k, self.piv[k]);
        }
    }
}

impl<T: Scalar> Solve<T> for DenseLu<T> {
    fn size(&self) -> usize {
        self.n
    }

    fn solve(&self, rhs: &DMatrix<T>, transpose: bool) -> DMatrix<T> {
        assert_eq!(rhs.nrows(), self.n, "right-hand side has the wrong number of rows");
        let mut x = rhs.clone();
        let n = self.n;
        if n == 0 {
            return x;
        }
        for col in x.as_mut_slice().chunks_mut(n) {
            if transpose {
                self.solve_transpose_in_place(col);
            } else {
                self.solve_in_place(col);
            }
        }
        x
    }
}

pub(crate) fn one_norm<T: Scalar>(a: &DMatrix<T>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}
