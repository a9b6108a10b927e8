//! Dense matrix-function kernels.
//!
//! `exp` always goes through Padé scaling and squaring. Other functions use the
//! symmetric eigendecomposition when the argument is symmetric, and a small set
//! of matrix iterations otherwise.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::function::{horner, FunctionSpec};
use crate::lu::{one_norm, DenseLu, Solve};

pub type DenseMatrix = DMatrix<f64>;

/// Relative asymmetry below which a matrix is treated as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues closer than this to zero are singular for sign and heaviside.
pub const SIGN_GAP: f64 = 1e-12;
const ITER_TOL: f64 = 1e-14;
const ITER_CAP: usize = 100;

const THETA_13: f64 = 5.371920351148152;
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub(crate) fn check_square(a: &DenseMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

/// Symmetry test relative to the largest entry.
pub fn is_symmetric(a: &DenseMatrix) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.nrows();
    let tol = SYMMETRY_TOL * a.amax();
    for j in 0..n {
        for i in j + 1..n {
            if (a[(i, j)] - a[(j, i)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

pub(crate) fn symmetrize(a: &DenseMatrix) -> DenseMatrix {
    (a + a.transpose()) * 0.5
}

/// f(A) for a dense square matrix.
pub fn funm_dense(a: &DenseMatrix, f: &FunctionSpec) -> Result<DenseMatrix> {
    let n = check_square(a)?;
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    let sym = is_symmetric(a);
    match f {
        FunctionSpec::Polynomial(c) => Ok(polyvalm(c, a)),
        FunctionSpec::Exp => {
            let e = expm(a)?;
            Ok(if sym { symmetrize(&e) } else { e })
        }
        _ if sym => funm_symmetric(&symmetrize(a), f),
        FunctionSpec::Sqrt => Ok(denman_beavers(a)?.0),
        FunctionSpec::InvSqrt => Ok(denman_beavers(a)?.1),
        FunctionSpec::Sign => sign_newton(a),
        FunctionSpec::Heaviside => {
            let s = sign_newton(a)?;
            Ok((DenseMatrix::identity(n, n) - s) * 0.5)
        }
        FunctionSpec::FermiDirac { beta, mu } => {
            let shifted = (a - DenseMatrix::identity(n, n) * *mu) * *beta;
            let e = expm(&shifted)? + DenseMatrix::identity(n, n);
            solve_dense(e, &DenseMatrix::identity(n, n))
        }
        FunctionSpec::Rational { num, den } => solve_dense(polyvalm(den, a), &polyvalm(num, a)),
        FunctionSpec::Scalar(_) => Err(Error::NonSymmetricWithScalarCallback),
    }
}

fn solve_dense(a: DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let lu = DenseLu::new(a).map_err(|_| Error::SpectrumOnSingularity { value: f64::NAN })?;
    Ok(lu.solve(b, false))
}

/// Eigenvalues of a symmetric matrix (ascending).
pub fn sym_eigenvalues(a: &DenseMatrix) -> Result<DVector<f64>> {
    check_square(a)?;
    let mut ev = symmetrize(a).symmetric_eigenvalues();
    ev.as_mut_slice().sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

/// f at an eigenvalue, with the domain checks of the matrix kernels.
pub fn eval_on_spectrum(f: &FunctionSpec, lambda: f64, scale: f64) -> Result<f64> {
    let singular = Err(Error::SpectrumOnSingularity { value: lambda });
    let v = match f {
        FunctionSpec::Sqrt => {
            if lambda < -1e-13 * scale {
                return singular;
            }
            lambda.max(0.0).sqrt()
        }
        FunctionSpec::InvSqrt => {
            if lambda <= 1e-15 * scale {
                return singular;
            }
            1.0 / lambda.sqrt()
        }
        FunctionSpec::Sign | FunctionSpec::Heaviside => {
            if lambda.abs() <= SIGN_GAP {
                return singular;
            }
            f.eval(lambda)
        }
        FunctionSpec::Rational { num, den } => {
            let q = horner(den, lambda);
            let size: f64 = den
                .iter()
                .enumerate()
                .map(|(k, c)| c.abs() * lambda.abs().powi(k as i32))
                .sum();
            if q.abs() <= 1e-14 * size {
                return singular;
            }
            horner(num, lambda) / q
        }
        _ => f.eval(lambda),
    };
    if v.is_finite() {
        Ok(v)
    } else {
        singular
    }
}

/// Sum of f over the eigenvalues of a symmetric matrix.
pub fn trace_symmetric(a: &DenseMatrix, f: &FunctionSpec) -> Result<f64> {
    let ev = sym_eigenvalues(a)?;
    let scale = ev.amax();
    let mut s = 0.0;
    for &l in ev.iter() {
        s += eval_on_spectrum(f, l, scale)?;
    }
    Ok(s)
}

fn funm_symmetric(a: &DenseMatrix, f: &FunctionSpec) -> Result<DenseMatrix> {
    let eig = a.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax();
    let fl: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| eval_on_spectrum(f, l, scale))
        .collect::<Result<_>>()?;
    let q = &eig.eigenvectors;
    let mut qf = q.clone();
    for (j, mut col) in qf.column_iter_mut().enumerate() {
        col *= fl[j];
    }
    Ok(symmetrize(&(qf * q.transpose())))
}

/// Horner evaluation of a polynomial at a matrix.
pub fn polyvalm(c: &[f64], a: &DenseMatrix) -> DenseMatrix {
    let n = a.nrows();
    let mut r = DenseMatrix::zeros(n, n);
    for &ck in c.iter().rev() {
        r = &r * a;
        for i in 0..n {
            r[(i, i)] += ck;
        }
    }
    r
}

/// Matrix exponential by Padé-13 scaling and squaring.
pub fn expm(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = check_square(a)?;
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::InvalidParameter("non-finite matrix entries"));
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-s);
    let b = &PADE_13;
    let id = DenseMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let lu = DenseLu::new(&v - &u).map_err(|_| Error::InvalidParameter("Pade denominator is singular"))?;
    let mut r = lu.solve(&(v + u), false);
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn inverse_logdet(a: &DenseMatrix) -> Result<(DenseMatrix, f64)> {
    let lu = DenseLu::new(a.clone()).map_err(|_| Error::SpectrumOnSingularity { value: 0.0 })?;
    Ok((lu.inverse(), lu.log_abs_det()))
}

/// Scaled Denman–Beavers iteration. Returns `(A^{1/2}, A^{-1/2})`.
pub fn denman_beavers(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = check_square(a)?;
    let mut y = a.clone();
    let mut z = DenseMatrix::identity(n, n);
    let mut scaling = true;
    let mut prev = f64::INFINITY;
    for _ in 0..ITER_CAP {
        let (yi, ly) = inverse_logdet(&y)?;
        let (zi, lz) = inverse_logdet(&z)?;
        let g = if scaling {
            (-(ly + lz) / (2.0 * n as f64)).exp()
        } else {
            1.0
        };
        let yn = (&y * g + zi / g) * 0.5;
        let zn = (&z * g + yi / g) * 0.5;
        let rel = (&yn - &y).norm() / yn.norm();
        y = yn;
        z = zn;
        if !rel.is_finite() {
            break;
        }
        if rel < 1e-2 {
            scaling = false;
        }
        if rel <= ITER_TOL || (rel <= 1e-10 && rel >= prev) {
            return Ok((y, z));
        }
        prev = rel;
    }
    Err(Error::IterationLimit {
        method: "Denman-Beavers",
        iterations: ITER_CAP,
    })
}

/// Newton iteration with determinantal scaling for the matrix sign.
pub fn sign_newton(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = check_square(a)?;
    let mut x = a.clone();
    let mut scaling = true;
    let mut prev = f64::INFINITY;
    for _ in 0..ITER_CAP {
        let (xi, ld) = inverse_logdet(&x)?;
        let mu = if scaling { (-ld / n as f64).exp() } else { 1.0 };
        let xn = (&x * mu + xi / mu) * 0.5;
        let rel = (&xn - &x).norm() / xn.norm();
        x = xn;
        if !rel.is_finite() {
            break;
        }
        if rel < 1e-2 {
            scaling = false;
        }
        if rel <= ITER_TOL || (rel <= 1e-10 && rel >= prev) {
            return Ok(x);
        }
        prev = rel;
    }
    Err(Error::IterationLimit {
        method: "Newton sign",
        iterations: ITER_CAP,
    })
}

/// The (1,2) block of f([[G, K], [0, H]]).
pub fn funm_block12(
    g: &DenseMatrix,
    h: &DenseMatrix,
    k: &DenseMatrix,
    f: &FunctionSpec,
) -> Result<DenseMatrix> {
    let p = check_square(g)?;
    let q = check_square(h)?;
    if k.nrows() != p {
        return Err(Error::DimensionMismatch {
            context: "funm_block12 rows of K",
            expected: p,
            found: k.nrows(),
        });
    }
    if k.ncols() != q {
        return Err(Error::DimensionMismatch {
            context: "funm_block12 columns of K",
            expected: q,
            found: k.ncols(),
        });
    }
    let mut m = DenseMatrix::zeros(p + q, p + q);
    m.view_mut((0, 0), (p, p)).copy_from(g);
    m.view_mut((0, p), (p, q)).copy_from(k);
    m.view_mut((p, p), (q, q)).copy_from(h);
    let fm = funm_dense(&m, f)?;
    Ok(fm.view((0, p), (p, q)).into_owned())
}

/// f(ARcomp) - f(Acomp) for symmetric arguments.
pub fn sym_update_x(acomp: &DenseMatrix, arcomp: &DenseMatrix, f: &FunctionSpec) -> Result<DenseMatrix> {
    let n = check_square(acomp)?;
    check_square(arcomp)?;
    if arcomp.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "sym_update_x",
            expected: n,
            found: arcomp.nrows(),
        });
    }
    if !is_symmetric(acomp) || !is_symmetric(arcomp) {
        return Err(Error::NonSymmetric {
            context: "sym_update_x",
        });
    }
    Ok(funm_dense(arcomp, f)? - funm_dense(acomp, f)?)
}
