#![allow(dead_code)]

use dcfunm::nalgebra::DMatrix;
use dcfunm::BandedMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dense(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_banded(n: usize, kl: usize, ku: usize, rng: &mut ChaCha8Rng) -> BandedMatrix {
    BandedMatrix::from_fn(n, kl, ku, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_symmetric_banded(n: usize, b: usize, rng: &mut ChaCha8Rng) -> BandedMatrix {
    let mut a = BandedMatrix::zeros(n, b, b);
    for i in 0..n {
        for j in i..(i + b + 1).min(n) {
            let v = rng.random_range(-1.0..1.0);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    a
}

/// Symmetric tridiagonal with standard normal entries, scaled to spectral norm one.
pub fn normalized_tridiag(n: usize, seed: u64) -> BandedMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    let mut a = BandedMatrix::zeros(n, 1, 1);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(&mut r);
        a.set(i, i, d);
        if i + 1 < n {
            let e: f64 = StandardNormal.sample(&mut r);
            a.set(i, i + 1, e);
            a.set(i + 1, i, e);
        }
    }
    let (lo, hi) = dcfunm::spectral_interval(&a);
    a.scale(1.0 / lo.abs().max(hi.abs()));
    a
}

pub fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub fn from_faer(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// `f(A)` for symmetric `A` from a faer eigendecomposition.
pub fn sym_funm(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let m = to_faer(a);
    let evd = m.self_adjoint_eigen(faer::Side::Lower).expect("eigendecomposition");
    let u = evd.U();
    let s = evd.S().column_vector();
    let n = a.nrows();
    let mut us = u.to_owned();
    for j in 0..n {
        let fj = f(s[j]);
        for i in 0..n {
            us[(i, j)] *= fj;
        }
    }
    let prod = &us * u.transpose();
    from_faer(prod.as_ref())
}

pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let m = to_faer(a);
    let s = m.self_adjoint_eigenvalues(faer::Side::Lower).expect("eigenvalues");
    s.to_vec()
}

/// Two-norm of a symmetric matrix.
pub fn sym_norm2(a: &DMatrix<f64>) -> f64 {
    let s = (a + a.transpose()) * 0.5;
    sym_eigenvalues(&s).into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Spectral norm via faer singular values.
pub fn norm2(a: &DMatrix<f64>) -> f64 {
    let m = to_faer(a);
    m.singular_values().expect("svd").into_iter().fold(0.0, f64::max)
}

/// Truncated Taylor series of `exp`, for matrices of modest norm.
pub fn taylor_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.norm().max(1.0);
    let s = norm.log2().ceil().max(0.0) as i32;
    let scaled = a / 2f64.powi(s);
    let mut term = DMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `sum_k c_k A^k` by explicit powers.
pub fn poly_powers(c: &[f64], a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut p = DMatrix::identity(n, n);
    let mut out = DMatrix::zeros(n, n);
    for &ck in c {
        out += &p * ck;
        p = &p * a;
    }
    out
}

pub fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
