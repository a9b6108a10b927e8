//! Band storage, band LU and the off-diagonal split of a banded matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use num_complex::Complex64;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::lu::{Scalar, Solve, PIVOT_TOL};

/// Square matrix with `kl` sub- and `ku` superdiagonals.
///
/// Entry `(i, i + k)` for `-kl <= k <= ku` lives at `data[(k + kl) * n + i]`,
/// so every diagonal is one contiguous strip of length `n` (the unused head or
/// tail of each strip is kept at zero).
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let kl = kl.min(n.saturating_sub(1));
        let ku = ku.min(n.saturating_sub(1));
        BandedMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; (kl + ku + 1) * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zeros(n, 0, 0);
        a.data.iter_mut().for_each(|v| *v = 1.0);
        a
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut a = Self::zeros(d.len(), 0, 0);
        a.data.copy_from_slice(d);
        a
    }

    /// Tridiagonal matrix with constant sub, main and super diagonals.
    pub fn tridiagonal(n: usize, sub: f64, diag: f64, sup: f64) -> Self {
        Self::from_fn(n, 1, 1, |i, j| {
            if i == j {
                diag
            } else if i > j {
                sub
            } else {
                sup
            }
        })
    }

    pub fn from_fn(n: usize, kl: usize, ku: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut a = Self::zeros(n, kl, ku);
        for i in 0..n {
            for j in a.row_range(i) {
                a.set(i, j, f(i, j));
            }
        }
        a
    }

    /// Band copy of a dense matrix; the bandwidths are detected from the nonzero pattern.
    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::NonSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = a.nrows();
        let (mut kl, mut ku) = (0, 0);
        for j in 0..n {
            for i in 0..n {
                if a[(i, j)] != 0.0 {
                    if i > j {
                        kl = kl.max(i - j);
                    } else {
                        ku = ku.max(j - i);
                    }
                }
            }
        }
        Ok(Self::from_fn(n, kl, ku, |i, j| a[(i, j)]))
    }

    /// Band copy from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let (mut kl, mut ku) = (0, 0);
        for &(i, j, _) in entries {
            if i >= n || j >= n {
                return Err(Error::RangeOutOfBounds {
                    start: i.min(j),
                    end: i.max(j) + 1,
                    n,
                });
            }
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let mut a = Self::zeros(n, kl, ku);
        for &(i, j, v) in entries {
            let idx = a.index(i, j);
            a.data[idx] += v;
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    pub fn bandwidth(&self) -> usize {
        self.kl.max(self.ku)
    }

    /// Columns that may hold nonzeros in row `i`.
    pub fn row_range(&self, i: usize) -> Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    /// Raw diagonal-major storage.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        (j + self.kl - i) * self.n + i
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.index(i, j)]
        } else {
            0.0
        }
    }

    /// Panics if `(i, j)` lies outside the stored band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) is outside the band");
        let idx = self.index(i, j);
        self.data[idx] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) is outside the band");
        let idx = self.index(i, j);
        self.data[idx] += v;
    }

    /// Copy with (at least) the given bandwidths.
    pub fn widened(&self, kl: usize, ku: usize) -> Self {
        let mut b = Self::zeros(self.n, kl.max(self.kl), ku.max(self.ku));
        for i in 0..self.n {
            for j in self.row_range(i) {
                b.set(i, j, self.get(i, j));
            }
        }
        b
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in self.row_range(i) {
                d[(i, j)] = self.get(i, j);
            }
        }
        d
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, self.ku, self.kl, |i, j| self.get(j, i))
    }

    /// Exact symmetry of the stored values.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row_range(i).all(|j| j <= i || self.get(i, j) == self.get(j, i)))
    }

    /// Number of nonzero stored values.
    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|v| **v != 0.0).count()
    }

    pub fn diagonal(&self) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| self.get(i, i))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm1(&self) -> f64 {
        let mut col = vec![0.0; self.n];
        for i in 0..self.n {
            for j in self.row_range(i) {
                col[j] += self.get(i, j).abs();
            }
        }
        col.into_iter().fold(0.0, f64::max)
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn add_diagonal(&mut self, alpha: f64) {
        let off = self.kl * self.n;
        self.data[off..off + self.n].iter_mut().for_each(|v| *v += alpha);
    }

    /// `self + alpha * other`, widened as needed.
    pub fn add_scaled(&self, alpha: f64, other: &BandedMatrix) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                context: "banded add",
                expected: self.n,
                found: other.n,
            });
        }
        let mut c = self.widened(other.kl, other.ku);
        for i in 0..self.n {
            for j in other.row_range(i) {
                c.add_to(i, j, alpha * other.get(i, j));
            }
        }
        Ok(c)
    }

    /// Banded product; bandwidths add.
    pub fn matmul(&self, other: &BandedMatrix) -> Result<Self> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                context: "banded product",
                expected: self.n,
                found: other.n,
            });
        }
        let mut c = Self::zeros(self.n, self.kl + other.kl, self.ku + other.ku);
        for i in 0..self.n {
            for k in self.row_range(i) {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in other.row_range(k) {
                    c.add_to(i, j, aik * other.get(k, j));
                }
            }
        }
        Ok(c)
    }

    /// `A X` touching only the stored diagonals.
    pub fn matvec(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.nrows() != self.n {
            return Err(Error::DimensionMismatch {
                context: "band_matvec",
                expected: self.n,
                found: x.nrows(),
            });
        }
        let n = self.n;
        let mut y = DenseMatrix::zeros(n, x.ncols());
        for (xc, mut yc) in x.column_iter().zip(y.column_iter_mut()) {
            let xs = xc.as_slice();
            let ys = yc.as_mut_slice();
            for d in 0..=self.kl + self.ku {
                let strip = &self.data[d * n..(d + 1) * n];
                // offset k = d - kl; entry (i, i + k)
                if d >= self.kl {
                    let k = d - self.kl;
                    for i in 0..n - k {
                        ys[i] += strip[i] * xs[i + k];
                    }
                } else {
                    let k = self.kl - d;
                    for i in k..n {
                        ys[i] += strip[i] * xs[i - k];
                    }
                }
            }
        }
        Ok(y)
    }

    /// `A^T X`.
    pub fn matvec_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.nrows() != self.n {
            return Err(Error::DimensionMismatch {
                context: "band_matvec transpose",
                expected: self.n,
                found: x.nrows(),
            });
        }
        let n = self.n;
        let mut y = DenseMatrix::zeros(n, x.ncols());
        for (xc, mut yc) in x.column_iter().zip(y.column_iter_mut()) {
            let xs = xc.as_slice();
            let ys = yc.as_mut_slice();
            for d in 0..=self.kl + self.ku {
                let strip = &self.data[d * n..(d + 1) * n];
                if d >= self.kl {
                    let k = d - self.kl;
                    for i in 0..n - k {
                        ys[i + k] += strip[i] * xs[i];
                    }
                } else {
                    let k = self.kl - d;
                    for i in k..n {
                        ys[i - k] += strip[i] * xs[i];
                    }
                }
            }
        }
        Ok(y)
    }

    /// Dense copy of `A[rows, cols]` (zero-based, half open).
    pub fn extract_block(&self, rows: Range<usize>, cols: Range<usize>) -> Result<DenseMatrix> {
        for r in [&rows, &cols] {
            if r.start > r.end || r.end > self.n {
                return Err(Error::RangeOutOfBounds {
                    start: r.start,
                    end: r.end,
                    n: self.n,
                });
            }
        }
        Ok(DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.get(rows.start + i, cols.start + j)
        }))
    }

    /// Principal submatrix `A[r, r]` kept in band storage.
    pub fn principal(&self, r: Range<usize>) -> Result<Self> {
        if r.start > r.end || r.end > self.n {
            return Err(Error::RangeOutOfBounds {
                start: r.start,
                end: r.end,
                n: self.n,
            });
        }
        let s = r.start;
        Ok(Self::from_fn(r.len(), self.kl, self.ku, |i, j| self.get(s + i, s + j)))
    }

    /// Smallest `w` with `|a_ij| < eps` whenever `|i - j| > w`.
    pub fn eps_bandwidth(&self, eps: f64) -> usize {
        let mut w = 0;
        for i in 0..self.n {
            for j in self.row_range(i) {
                if self.get(i, j).abs() >= eps {
                    w = w.max(i.abs_diff(j));
                }
            }
        }
        w
    }

    /// LU factorization of `A - sigma I`.
    pub fn factor_shifted<T: Scalar + From<f64>>(&self, sigma: T) -> Result<BandLu<T>> {
        BandLu::new(self, sigma)
    }

    /// Solves `(A - sigma I) X = rhs`.
    pub fn solve_shifted(&self, sigma: f64, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.factor_shifted(sigma)?.solve(rhs, false))
    }

    /// Attempts a band Cholesky factorization; `true` when the matrix is numerically SPD.
    pub fn cholesky_probe(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        let n = self.n;
        let b = self.kl;
        // lower band of L, row-major windows: l[i][j - i + b]
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for j in i.saturating_sub(b)..=i {
                let mut s = self.get(i, j);
                for k in i.saturating_sub(b).max(j.saturating_sub(b))..j {
                    s -= l[i * w + (k + b - i)] * l[j * w + (k + b - j)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return false;
                    }
                    l[i * w + b] = s.sqrt();
                } else {
                    l[i * w + (j + b - i)] = s / l[j * w + b];
                }
            }
        }
        true
    }
}

/// Smallest `w` such that every entry with `|i - j| > w` is below `eps` in magnitude.
pub fn eps_bandwidth(f: &DenseMatrix, eps: f64) -> usize {
    let mut w = 0;
    for j in 0..f.ncols() {
        for i in 0..f.nrows() {
            if f[(i, j)].abs() >= eps {
                w = w.max(i.abs_diff(j));
            }
        }
    }
    w
}

/// Band LU with partial pivoting of `A - sigma I`.
///
/// Row `i` keeps the window of columns `i - kl ..= i + kl + ku`, which holds
/// both the original band and the fill created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu<T: Scalar> {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    ab: Vec<T>,
    lmul: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar + From<f64>> BandLu<T> {
    pub fn new(a: &BandedMatrix, sigma: T) -> Result<Self> {
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        let w = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            w,
            ab: vec![T::zero(); n * w],
            lmul: vec![T::zero(); n * kl],
            piv: vec![0; n],
        };
        let mut norm = 0.0f64;
        let mut colsum = vec![0.0f64; n];
        for i in 0..n {
            for j in a.row_range(i) {
                let mut v = <T as From<f64>>::from(a.get(i, j));
                if i == j {
                    v -= sigma;
                }
                colsum[j] += v.modulus();
                *lu.at(i, j) = v;
            }
        }
        for v in colsum {
            norm = norm.max(v);
        }
        let tol = PIVOT_TOL * norm;
        let singular = || Error::SingularShift {
            shift: Complex64::new(sigma.real(), sigma.imaginary()),
        };
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.at(k, k).modulus();
            for i in k + 1..=last {
                let v = lu.at(i, k).modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tol) || best == 0.0 {
                return Err(singular());
            }
            lu.piv[k] = p;
            let jend = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jend {
                    let t = *lu.at(k, j);
                    *lu.at(k, j) = *lu.at(p, j);
                    *lu.at(p, j) = t;
                }
            }
            let inv = T::one() / *lu.at(k, k);
            for i in k + 1..=last {
                let l = *lu.at(i, k) * inv;
                lu.lmul[k * kl + (i - k - 1)] = l;
                *lu.at(i, k) = T::zero();
                if l == T::zero() {
                    continue;
                }
                for j in k + 1..=jend {
                    let ukj = *lu.at(k, j);
                    *lu.at(i, j) -= l * ukj;
                }
            }
        }
        Ok(lu)
    }
}

impl<T: Scalar> BandLu<T> {
    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.ab[i * self.w + (j + self.kl - i)]
    }

    #[inline]
    fn u(&self, i: usize, j: usize) -> T {
        self.ab[i * self.w + (j + self.kl - i)]
    }

    fn solve_col(&self, x: &mut [T]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                x[i] -= self.lmul[k * kl + (i - k - 1)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.u(k, j) * x[j];
            }
            x[k] = s / self.u(k, k);
        }
    }

    fn solve_col_transpose(&self, x: &mut [T]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let mut s = x[k];
            for j in k.saturating_sub(kl + ku)..k {
                s -= self.u(j, k) * x[j];
            }
            x[k] = s / self.u(k, k);
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                s -= self.lmul[k * kl + (i - k - 1)] * x[i];
            }
            x[k] = s;
            x.swap(k, self.piv[k]);
        }
    }
}

impl<T: Scalar> Solve<T> for BandLu<T> {
    fn size(&self) -> usize {
        self.n
    }

    fn solve(&self, rhs: &DMatrix<T>, transpose: bool) -> DMatrix<T> {
        assert_eq!(rhs.nrows(), self.n, "right-hand side has the wrong number of rows");
        let mut x = rhs.clone();
        if self.n == 0 {
            return x;
        }
        for col in x.as_mut_slice().chunks_mut(self.n) {
            if transpose {
                self.solve_col_transpose(col);
            } else {
                self.solve_col(col);
            }
        }
        x
    }
}

/// `A = blkdiag(top, bottom) + B J C^T` for a split after row/column `split`.
#[derive(Debug, Clone)]
pub struct OffdiagSplit {
    pub split: usize,
    pub top: BandedMatrix,
    pub bottom: BandedMatrix,
    pub b: DenseMatrix,
    pub j: DenseMatrix,
    pub c: DenseMatrix,
    pub spd: bool,
}

impl OffdiagSplit {
    pub fn rank(&self) -> usize {
        self.j.nrows()
    }

    /// The block-diagonal part as one banded matrix.
    pub fn block_diagonal(&self) -> BandedMatrix {
        let s = self.split;
        let n = s + self.bottom.n();
        let kl = self.top.kl.max(self.bottom.kl);
        let ku = self.top.ku.max(self.bottom.ku);
        BandedMatrix::from_fn(n, kl, ku, |i, j| {
            if i < s && j < s {
                self.top.get(i, j)
            } else if i >= s && j >= s {
                self.bottom.get(i - s, j - s)
            } else {
                0.0
            }
        })
    }

    /// `blkdiag(top, bottom) + B J C^T` as a dense matrix.
    pub fn reassemble(&self) -> DenseMatrix {
        self.block_diagonal().to_dense() + &self.b * &self.j * self.c.transpose()
    }
}

/// Splits `A` into its diagonal blocks `A[..s, ..s]`, `A[s.., s..]` and a low-rank off-diagonal part.
///
/// The general variant uses unit-vector factors over the coupling window and
/// `J = [[0, A12], [A21, 0]]`. The SPD variant writes the coupling block as
/// `K = P S Q^T` and uses `B = C = [P S^{1/2}; -Q S^{1/2}]`, `J = -I`, moving
/// `P S P^T` and `Q S Q^T` onto the diagonal blocks. The coupling window is
/// clipped at the matrix boundary, so every `1 <= s <= n - 1` is accepted.
pub fn offdiag_split(a: &BandedMatrix, s: usize, spd_variant: bool) -> Result<OffdiagSplit> {
    let n = a.n;
    if s == 0 || s >= n {
        return Err(Error::InvalidSplitIndex { split: s, n });
    }
    if spd_variant && !a.is_symmetric() {
        return Err(Error::SpdVariantOnNonsymmetric);
    }
    let b = a.bandwidth();
    let t0 = s.saturating_sub(b);
    let b1 = (s + b).min(n);
    let top_idx = t0..s;
    let bot_idx = s..b1;
    let k12 = a.extract_block(top_idx.clone(), bot_idx.clone())?;
    let k21 = a.extract_block(bot_idx.clone(), top_idx.clone())?;
    let mut top = a.principal(0..s)?;
    let mut bottom = a.principal(s..n)?;
    let (tl, bl) = (top_idx.len(), bot_idx.len());

    if b == 0 || (k12.iter().all(|v| *v == 0.0) && k21.iter().all(|v| *v == 0.0)) {
        return Ok(OffdiagSplit {
            split: s,
            top,
            bottom,
            b: DenseMatrix::zeros(n, 0),
            j: DenseMatrix::zeros(0, 0),
            c: DenseMatrix::zeros(n, 0),
            spd: spd_variant,
        });
    }

    if !spd_variant {
        let r = tl + bl;
        let mut bf = DenseMatrix::zeros(n, r);
        for (col, i) in top_idx.clone().chain(bot_idx.clone()).enumerate() {
            bf[(i, col)] = 1.0;
        }
        let mut j = DenseMatrix::zeros(r, r);
        j.view_mut((0, tl), (tl, bl)).copy_from(&k12);
        j.view_mut((tl, 0), (bl, tl)).copy_from(&k21);
        return Ok(OffdiagSplit {
            split: s,
            top,
            bottom,
            c: bf.clone(),
            b: bf,
            j,
            spd: false,
        });
    }

    let svd = k12.clone().svd(true, true);
    let p = svd.u.expect("svd u");
    let qt = svd.v_t.expect("svd v_t");
    let r = svd.singular_values.len();
    let sq = svd.singular_values.map(|v| v.sqrt());
    let mut bf = DenseMatrix::zeros(n, r);
    for c in 0..r {
        for (row, i) in top_idx.clone().enumerate() {
            bf[(i, c)] = p[(row, c)] * sq[c];
        }
        for (row, i) in bot_idx.clone().enumerate() {
            bf[(i, c)] = -qt[(c, row)] * sq[c];
        }
    }
    // diagonal corrections P S P^T and Q S Q^T
    let sdiag = DMatrix::from_diagonal(&svd.singular_values);
    let corr_top = crate::dense::symmetrize(&(&p * &sdiag * p.transpose()));
    let corr_bot = crate::dense::symmetrize(&(qt.transpose() * &sdiag * &qt));
    for r0 in 0..tl {
        for c0 in 0..tl {
            top.add_to(t0 + r0, t0 + c0, corr_top[(r0, c0)]);
        }
    }
    for r0 in 0..bl {
        for c0 in 0..bl {
            bottom.add_to(r0, c0, corr_bot[(r0, c0)]);
        }
    }
    Ok(OffdiagSplit {
        split: s,
        top,
        bottom,
        c: bf.clone(),
        b: bf,
        j: -DenseMatrix::identity(r, r),
        spd: true,
    })
}
