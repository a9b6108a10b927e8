//! Test-matrix generators and a Chebyshev interpolation baseline.
//!
//! Random instances use `ChaCha8Rng::seed_from_u64(seed)` and draw uniform
//! `f64` values with `Rng::random_range`, so a seed fixes the matrix bit for bit.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::banded::BandedMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::function::FunctionSpec;

/// Grünwald–Letnikov weights `g_0, ..., g_n`.
pub fn grunwald_weights(alpha: f64, n: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(n + 1);
    g.push(-1.0);
    for k in 1..=n {
        let prev = g[k - 1];
        g.push(-prev * (alpha - (k as f64) + 1.0) / k as f64);
    }
    g
}

/// `A = T_n + T_n^T` for the two-sided fractional diffusion operator of order `alpha`.
pub fn gen_fractional(n: usize, alpha: f64) -> Result<DenseMatrix> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let g = grunwald_weights(alpha, n);
    let dx = 1.0 / (n as f64 + 1.0);
    let scale = dx.powf(-alpha);
    let t = |i: usize, j: usize| if i + 1 >= j { g[i + 1 - j] * scale } else { 0.0 };
    Ok(DenseMatrix::from_fn(n, n, |i, j| t(i, j) + t(j, i)))
}

/// Precision matrix of a Gaussian Markov random field on `n` sorted uniform points in `(0, 1)`.
pub fn gen_gmrf(n: usize, phi: f64, delta: f64, seed: u64) -> Result<BandedMatrix> {
    if !(phi > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidParameter("phi and delta must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    pts.sort_by(f64::total_cmp);
    Ok(gmrf_from_points(&pts, phi, delta))
}

/// GMRF precision matrix for points given in increasing order.
pub fn gmrf_from_points(pts: &[f64], phi: f64, delta: f64) -> BandedMatrix {
    let n = pts.len();
    let mut entries = Vec::new();
    let mut deg = alloc::vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if pts[j] - pts[i] >= delta {
                break;
            }
            entries.push((i, j, -phi));
            entries.push((j, i, -phi));
            deg[i] += 1;
            deg[j] += 1;
        }
    }
    for (i, d) in deg.iter().enumerate() {
        entries.push((i, i, 1.0 + phi * *d as f64));
    }
    BandedMatrix::from_triplets(n, &entries).expect("indices are in range")
}

/// One-dimensional Anderson model: uniform `[0, 1]` diagonal, `-1` off the diagonal.
pub fn gen_anderson(n: usize, seed: u64) -> BandedMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = BandedMatrix::tridiagonal(n, -1.0, 0.0, -1.0);
    for i in 0..n {
        a.set(i, i, rng.random_range(0.0..=1.0));
    }
    a
}

/// Parameters of the model Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams {
    pub nb: usize,
    pub ns: usize,
    pub big_delta: f64,
    pub small_delta: f64,
    pub c: f64,
    pub n_od: f64,
}

impl Default for HamiltonianParams {
    fn default() -> Self {
        HamiltonianParams {
            nb: 5,
            ns: 1600,
            big_delta: 1e-1,
            small_delta: 1e-4,
            c: 1e-1,
            n_od: 5000.0,
        }
    }
}

/// Model Hamiltonian with `nb` blocks of size `ns`; entry `(i, j), (i', j')` sits at
/// row `ns (i - 1) + j`, column `ns (i' - 1) + j'`.
pub fn gen_hamiltonian(p: &HamiltonianParams) -> DenseMatrix {
    let n = p.nb * p.ns;
    DenseMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / p.ns, r % p.ns);
        let (ip, jp) = (c / p.ns, c % p.ns);
        let dj = j.abs_diff(jp) as f64;
        if i == ip && j == jp {
            i as f64 * p.big_delta + j as f64 * p.small_delta
        } else if i == ip {
            p.c * (-dj).exp()
        } else {
            p.c / (p.n_od * (i.abs_diff(ip) as f64 + 1.0)) * (-dj).exp()
        }
    })
}

/// `tridiag(-1, 2, -1)`.
pub fn gen_a1(n: usize) -> BandedMatrix {
    BandedMatrix::tridiagonal(n, -1.0, 2.0, -1.0)
}

/// `A1` with the `(0, 0)` entry set to 10.
pub fn gen_a2(n: usize) -> BandedMatrix {
    let mut a = gen_a1(n);
    if n > 0 {
        a.set(0, 0, 10.0);
    }
    a
}

/// Tridiagonal with `linspace(2, 3, n)` on the diagonal and `-1` beside it.
pub fn gen_a3(n: usize) -> BandedMatrix {
    let mut a = BandedMatrix::tridiagonal(n, -1.0, 0.0, -1.0);
    for i in 0..n {
        let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
        a.set(i, i, 2.0 + t);
    }
    a
}

/// The three spectral-adaptivity matrices `A1`, `A2`, `A3`.
pub fn gen_test_suite(n: usize) -> [(&'static str, BandedMatrix); 3] {
    [("A1", gen_a1(n)), ("A2", gen_a2(n)), ("A3", gen_a3(n))]
}

/// Gershgorin interval of a banded matrix, tightened by Sturm bisection for symmetric tridiagonal input.
pub fn spectral_interval(a: &BandedMatrix) -> (f64, f64) {
    let n = a.n();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = a.row_range(i).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
        lo = lo.min(a.get(i, i) - r);
        hi = hi.max(a.get(i, i) + r);
    }
    if a.bandwidth() <= 1 && a.is_symmetric() {
        let tol = 1e-14 * lo.abs().max(hi.abs()).max(1.0);
        let lmin = bisect_eigenvalue(a, 0, lo, hi, tol);
        let lmax = bisect_eigenvalue(a, n - 1, lo, hi, tol);
        return (lmin, lmax);
    }
    (lo, hi)
}

/// Number of eigenvalues below `x` of a symmetric tridiagonal matrix.
fn sturm_count(a: &BandedMatrix, x: f64) -> usize {
    let n = a.n();
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..n {
        let e2 = if i > 0 { a.get(i, i - 1).powi(2) } else { 0.0 };
        q = a.get(i, i) - x - if i > 0 { e2 / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (a.get(i, i).abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue of a symmetric tridiagonal matrix, bracketed by `[lo, hi]`.
fn bisect_eigenvalue(a: &BandedMatrix, k: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    lo -= tol;
    hi += tol;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sturm_count(a, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Coefficients of the degree-`d` Chebyshev interpolant of `f` on `[a, b]` at first-kind nodes.
pub fn chebyshev_coeffs(f: &FunctionSpec, a: f64, b: f64, d: usize) -> Vec<f64> {
    let m = d + 1;
    let theta: Vec<f64> = (0..m).map(|j| PI * (j as f64 + 0.5) / m as f64).collect();
    let fx: Vec<f64> = theta
        .iter()
        .map(|t| f.eval(0.5 * (a + b) + 0.5 * (b - a) * t.cos()))
        .collect();
    (0..m)
        .map(|k| {
            let s: f64 = theta.iter().zip(&fx).map(|(t, v)| v * (k as f64 * t).cos()).sum();
            let c = 2.0 * s / m as f64;
            if k == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

/// Clenshaw evaluation of a Chebyshev series on `[a, b]`.
pub fn chebyshev_eval(c: &[f64], a: f64, b: f64, x: f64) -> f64 {
    let t = (2.0 * x - a - b) / (b - a);
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Maximum of `|f - p_d|` over `samples` equispaced points and the Chebyshev nodes of `[a, b]`.
pub fn chebyshev_error(f: &FunctionSpec, a: f64, b: f64, d: usize, samples: usize) -> f64 {
    let c = chebyshev_coeffs(f, a, b, d);
    let samples = samples.max(2);
    let grid = (0..samples).map(|i| a + (b - a) * i as f64 / (samples - 1) as f64);
    let nodes = (0..4 * (d + 1)).map(|j| 0.5 * (a + b) + 0.5 * (b - a) * (PI * (j as f64 + 0.5) / (4 * (d + 1)) as f64).cos());
    grid.chain(nodes)
        .map(|x| (f.eval(x) - chebyshev_eval(&c, a, b, x)).abs())
        .fold(0.0, f64::max)
}

/// `p(A)` for the degree-`d` Chebyshev interpolant `p` of `f` on `[lo, hi]`,
/// by the three-term recurrence on `X = (2A - (lo + hi) I) / (hi - lo)`.
pub fn chebyshev_funm(a: &BandedMatrix, f: &FunctionSpec, interval: (f64, f64), d: usize) -> Result<BandedMatrix> {
    let (lo, hi) = interval;
    if !(hi > lo) {
        return Err(Error::InvalidParameter("empty Chebyshev interval"));
    }
    let n = a.n();
    let c = chebyshev_coeffs(f, lo, hi, d);
    let mut x = a.clone();
    x.scale(2.0 / (hi - lo));
    x.add_diagonal(-(lo + hi) / (hi - lo));
    let mut t_prev = BandedMatrix::identity(n);
    let mut p = t_prev.clone();
    p.scale(c[0]);
    if d == 0 {
        return Ok(p);
    }
    let mut t_cur = x.clone();
    p = p.add_scaled(c[1], &t_cur)?;
    for &ck in &c[2..] {
        let mut next = x.matmul(&t_cur)?;
        next.scale(2.0);
        let next = next.add_scaled(-1.0, &t_prev)?;
        p = p.add_scaled(ck, &next)?;
        t_prev = t_cur;
        t_cur = next;
    }
    Ok(p)
}
