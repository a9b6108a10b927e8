//! Block-diagonal splitting for banded matrices.
//!
//! `A = D + B - C` where `D` holds consecutive diagonal blocks, `B` holds
//! blocks straddling each boundary of `D`, and `C` holds the two halves of each
//! `B` block. The approximation is `f(D) + f(B) - f(C)`, evaluated blockwise.

use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::DVector;

use crate::banded::{eps_bandwidth, BandedMatrix};
use crate::dense::{funm_dense, DenseMatrix};
use crate::error::{Error, Result};
use crate::function::FunctionSpec;

/// Diagonal blocks and, for every boundary, the pair of index windows `(J1, J2)`
/// with `J1` ending and `J2` starting at the boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub blocks: Vec<Range<usize>>,
    pub windows: Vec<(Range<usize>, Range<usize>)>,
}

impl SplitPlan {
    /// Blocks of size `s` (the last one possibly shorter) and windows of `s / 2`
    /// on each side of every boundary, clipped at `n`.
    pub fn fixed(n: usize, s: usize, b: usize) -> Result<Self> {
        if s < 2 || s % 2 != 0 {
            return Err(Error::InvalidBlockSize {
                s,
                reason: "block size must be even and at least 2",
            });
        }
        if s < 2 * b {
            return Err(Error::InvalidBlockSize {
                s,
                reason: "block size must be at least twice the bandwidth",
            });
        }
        if s > n {
            return Err(Error::InvalidBlockSize {
                s,
                reason: "block size exceeds the matrix size",
            });
        }
        let blocks: Vec<_> = (0..n).step_by(s).map(|i| i..(i + s).min(n)).collect();
        let windows = blocks
            .iter()
            .skip(1)
            .map(|r| {
                let h = r.start;
                (h - s / 2..h, h..(h + s / 2).min(n))
            })
            .collect();
        Ok(SplitPlan { blocks, windows })
    }

    /// Number of polynomial steps a window of half-width `s / 2` reproduces for bandwidth `b`.
    pub fn steps(s: usize, b: usize) -> usize {
        if b == 0 {
            usize::MAX
        } else {
            s / (2 * b)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitMode {
    Fixed(usize),
    Adaptive { eps: f64, n_min: usize },
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub f: BandedMatrix,
    pub plan: SplitPlan,
    /// Blocks that reached the end of the matrix without passing the bandwidth test.
    pub exhausted: usize,
    /// Boundary updates whose windows hit the block limits before the border test passed.
    pub unconverged: usize,
}

impl SplitResult {
    pub fn nnz(&self) -> usize {
        self.f.nnz()
    }
}

trait Sink {
    /// Adds `sign * m` to the square block starting at `(off, off)`.
    fn add(&mut self, off: usize, m: &DenseMatrix, sign: f64);
}

struct BlockSink {
    parts: Vec<(usize, DenseMatrix, f64)>,
}

impl Sink for BlockSink {
    fn add(&mut self, off: usize, m: &DenseMatrix, sign: f64) {
        self.parts.push((off, m.clone(), sign));
    }
}

impl BlockSink {
    fn assemble(self, n: usize) -> BandedMatrix {
        let bw = self.parts.iter().map(|(_, m, _)| m.nrows().saturating_sub(1)).max().unwrap_or(0);
        let mut out = BandedMatrix::zeros(n, bw, bw);
        for (off, m, sign) in &self.parts {
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    out.add_to(off + i, off + j, sign * m[(i, j)]);
                }
            }
        }
        out
    }
}

struct DiagSink {
    d: DVector<f64>,
}

impl Sink for DiagSink {
    fn add(&mut self, off: usize, m: &DenseMatrix, sign: f64) {
        for i in 0..m.nrows() {
            self.d[off + i] += sign * m[(i, i)];
        }
    }
}

fn block(a: &BandedMatrix, r: Range<usize>) -> Result<DenseMatrix> {
    a.extract_block(r.clone(), r)
}

fn f_block(a: &BandedMatrix, r: Range<usize>, f: &FunctionSpec) -> Result<DenseMatrix> {
    funm_dense(&block(a, r)?, f)
}

fn run_fixed(a: &BandedMatrix, plan: &SplitPlan, f: &FunctionSpec, sink: &mut dyn Sink) -> Result<()> {
    for r in &plan.blocks {
        sink.add(r.start, &f_block(a, r.clone(), f)?, 1.0);
    }
    for (j1, j2) in &plan.windows {
        sink.add(j1.start, &f_block(a, j1.start..j2.end, f)?, 1.0);
        sink.add(j1.start, &f_block(a, j1.clone(), f)?, -1.0);
        sink.add(j2.start, &f_block(a, j2.clone(), f)?, -1.0);
    }
    Ok(())
}

/// `f(D) + f(B) - f(C)` with blocks of size `s`.
pub fn split_funm_fixed(a: &BandedMatrix, s: usize, f: &FunctionSpec) -> Result<BandedMatrix> {
    let plan = SplitPlan::fixed(a.n(), s, a.bandwidth())?;
    let mut sink = BlockSink { parts: Vec::new() };
    run_fixed(a, &plan, f, &mut sink)?;
    Ok(sink.assemble(a.n()))
}

fn check_adaptive(a: &BandedMatrix, eps: f64, n_min: usize) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive"));
    }
    if n_min == 0 || n_min > a.n() {
        return Err(Error::InvalidParameter("n_min must lie in [1, n]"));
    }
    Ok(())
}

fn border_small(p: &DenseMatrix, eps: f64) -> bool {
    let (r, c) = p.shape();
    if r == 0 {
        return true;
    }
    let small = |v: f64| v.abs() < eps;
    p.row(0).iter().all(|v| small(*v))
        && p.row(r - 1).iter().all(|v| small(*v))
        && p.column(0).iter().all(|v| small(*v))
        && p.column(c - 1).iter().all(|v| small(*v))
}

fn run_adaptive(
    a: &BandedMatrix,
    eps: f64,
    n_min: usize,
    f: &FunctionSpec,
    sink: &mut dyn Sink,
) -> Result<(SplitPlan, usize, usize)> {
    let n = a.n();
    let mut blocks = Vec::new();
    let mut exhausted = 0;
    let (mut i, mut s) = (0, n_min);
    while i < n {
        let len = s.min(n - i);
        let fb = f_block(a, i..i + len, f)?;
        let passed = eps_bandwidth(&fb, eps) <= len / 2;
        if passed || len == n - i {
            if !passed {
                exhausted += 1;
                log::warn!("block at {} reached the end of the matrix without passing the bandwidth test", i);
            }
            sink.add(i, &fb, 1.0);
            blocks.push(i..i + len);
            i += len;
            s = (s / 2).max(n_min);
        } else {
            s = (2 * s).min(n - i);
        }
    }

    let mut windows = Vec::with_capacity(blocks.len().saturating_sub(1));
    let mut unconverged = 0;
    for pair in blocks.windows(2) {
        let (lo, hi) = (pair[0].clone(), pair[1].clone());
        let h = lo.end;
        let step_l = (lo.len() / 4).max(1);
        let step_r = (hi.len() / 4).max(1);
        let mut start = h - lo.len().div_ceil(2);
        let mut end = h + hi.len().div_ceil(2);
        loop {
            let p = f_block(a, start..end, f)? - blkdiag(&f_block(a, start..h, f)?, &f_block(a, h..end, f)?);
            let at_limit = start == lo.start && end == hi.end;
            if border_small(&p, eps) || at_limit {
                if !border_small(&p, eps) {
                    unconverged += 1;
                    log::warn!("update at boundary {} did not pass the border test", h);
                }
                sink.add(start, &p, 1.0);
                windows.push((start..h, h..end));
                break;
            }
            start = start.saturating_sub(step_l).max(lo.start);
            end = (end + step_r).min(hi.end);
        }
    }
    Ok((SplitPlan { blocks, windows }, exhausted, unconverged))
}

fn blkdiag(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut(a.shape(), b.shape()).copy_from(b);
    m
}

/// Adaptive splitting: block sizes grow until `f` of each block has
/// `eps`-approximate bandwidth at most half its size; boundary windows grow
/// until the border of each update is below `eps`.
pub fn split_funm_adaptive(a: &BandedMatrix, eps: f64, f: &FunctionSpec, n_min: usize) -> Result<SplitResult> {
    check_adaptive(a, eps, n_min)?;
    let mut sink = BlockSink { parts: Vec::new() };
    let (plan, exhausted, unconverged) = run_adaptive(a, eps, n_min, f, &mut sink)?;
    Ok(SplitResult {
        f: sink.assemble(a.n()),
        plan,
        exhausted,
        unconverged,
    })
}

/// Diagonal of the splitting approximation.
pub fn split_diag(a: &BandedMatrix, mode: SplitMode, f: &FunctionSpec) -> Result<DVector<f64>> {
    let mut sink = DiagSink {
        d: DVector::zeros(a.n()),
    };
    match mode {
        SplitMode::Fixed(s) => {
            let plan = SplitPlan::fixed(a.n(), s, a.bandwidth())?;
            run_fixed(a, &plan, f, &mut sink)?;
        }
        SplitMode::Adaptive { eps, n_min } => {
            check_adaptive(a, eps, n_min)?;
            run_adaptive(a, eps, n_min, f, &mut sink)?;
        }
    }
    Ok(sink.d)
}

/// Trace of the splitting approximation.
pub fn split_trace(a: &BandedMatrix, mode: SplitMode, f: &FunctionSpec) -> Result<f64> {
    Ok(split_diag(a, mode, f)?.sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::{krylov_update, KrylovOptions, PoleSequence};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64) -> BandedMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandedMatrix::from_fn(n, kl, ku, |_, _| rng.random_range(-1.0..1.0));
        a.scale(1.0 / a.norm1());
        a
    }

    fn sym_tridiag(n: usize, seed: u64) -> BandedMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, rng.random_range(-1.0..1.0));
            if i + 1 < n {
                let w = rng.random_range(-1.0..1.0);
                a.set(i, i + 1, w);
                a.set(i + 1, i, w);
            }
        }
        a
    }

    fn rel(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn plan_tiles_and_straddles() {
        let p = SplitPlan::fixed(10, 4, 1).unwrap();
        assert_eq!(p.blocks, alloc::vec![0..4, 4..8, 8..10]);
        assert_eq!(p.windows, alloc::vec![(2..4, 4..6), (6..8, 8..10)]);
        assert!(SplitPlan::fixed(10, 3, 1).is_err());
        assert!(SplitPlan::fixed(10, 2, 2).is_err());
        assert!(SplitPlan::fixed(10, 12, 1).is_err());
        assert_eq!(SplitPlan::steps(8, 2), 2);
    }

    #[test]
    fn fixed_low_degree_exactness() {
        let a = random_banded(40, 1, 1, 1);
        let d = a.to_dense();
        let lin = split_funm_fixed(&a, 4, &FunctionSpec::monomial(1)).unwrap();
        assert!((lin.to_dense() - &d).norm() < 1e-15);
        let sq = split_funm_fixed(&a, 4, &FunctionSpec::monomial(2)).unwrap();
        assert!((sq.to_dense() - &d * &d).norm() < 1e-12);
        let diag = split_diag(&a, SplitMode::Fixed(4), &FunctionSpec::monomial(3)).unwrap();
        assert!((diag - (&d * &d * &d).diagonal()).norm() < 1e-12);
        let c = split_diag(&a, SplitMode::Fixed(4), &FunctionSpec::polynomial([2.5])).unwrap();
        assert!(c.iter().all(|v| (v - 2.5).abs() < 1e-15));
        assert!((split_trace(&a, SplitMode::Fixed(4), &FunctionSpec::polynomial([2.5])).unwrap() - 100.0).abs() < 1e-12);
        assert!((split_trace(&a, SplitMode::Fixed(4), &FunctionSpec::monomial(1)).unwrap() - d.trace()).abs() < 1e-14);
    }

    #[test]
    fn fixed_exp_error_is_small() {
        let mut a = sym_tridiag(256, 2);
        let norm = a.to_dense().symmetric_eigenvalues().amax();
        a.scale(1.0 / norm);
        let d = a.to_dense();
        let exact = funm_dense(&d, &FunctionSpec::Exp).unwrap();
        let approx = split_funm_fixed(&a, 32, &FunctionSpec::Exp).unwrap();
        assert!(rel(&approx.to_dense(), &exact) < 1e-12);
    }

    #[test]
    fn diagonal_beats_full_on_nonsymmetric() {
        let a = random_banded(256, 2, 2, 3);
        let d = a.to_dense();
        let exact = funm_dense(&d, &FunctionSpec::Exp).unwrap();
        let full = split_funm_fixed(&a, 8, &FunctionSpec::Exp).unwrap().to_dense();
        let diag = split_diag(&a, SplitMode::Fixed(8), &FunctionSpec::Exp).unwrap();
        let full_err = (&full - &exact).norm();
        let diag_err = (&diag - exact.diagonal()).norm();
        assert!(diag_err <= full_err);
        assert!((full.diagonal() - &diag).norm() < 1e-13);
    }

    #[test]
    fn single_split_equals_windowed_krylov_update() {
        let a = sym_tridiag(64, 4);
        let d = a.to_dense();
        let f = FunctionSpec::Exp;
        let approx = split_funm_fixed(&a, 32, &f).unwrap().to_dense();
        // windowed projection: f(A(W, W)) - blkdiag(f(A(W1, W1)), f(A(W2, W2))) on W = 16..48
        let top = funm_dense(&d.view((0, 0), (32, 32)).into_owned(), &f).unwrap();
        let bot = funm_dense(&d.view((32, 32), (32, 32)).into_owned(), &f).unwrap();
        let mut expect = blkdiag(&top, &bot);
        let w = funm_dense(&d.view((16, 16), (32, 32)).into_owned(), &f).unwrap();
        let c = blkdiag(
            &funm_dense(&d.view((16, 16), (16, 16)).into_owned(), &f).unwrap(),
            &funm_dense(&d.view((32, 32), (16, 16)).into_owned(), &f).unwrap(),
        );
        let mut v = expect.view_mut((16, 16), (32, 32));
        v += w - c;
        assert!((&approx - &expect).norm() <= 1e-10 * expect.norm());

        // the Krylov space after 16 polynomial steps is the window itself
        let sp = crate::banded::offdiag_split(&a, 32, false).unwrap();
        let opts = KrylovOptions {
            max_poles: 16,
            tol: 0.0,
            ..Default::default()
        };
        let upd = krylov_update(&sp.block_diagonal(), &sp.b, &sp.j, &sp.c, &PoleSequence::polynomial(), &f, &opts).unwrap();
        assert_eq!(upd.u.ncols(), 32);
        let kry = blkdiag(&top, &bot) + upd.to_dense();
        assert!((&approx - &kry).norm() <= 1e-10 * kry.norm());
    }

    #[test]
    fn adaptive_examples() {
        let diag = BandedMatrix::from_diagonal(&[0.1, 0.5, 1.0, 2.0, 3.0, 0.2, 0.7, 1.5]);
        let r = split_funm_adaptive(&diag, 1e-10, &FunctionSpec::Exp, 2).unwrap();
        assert!(r.plan.blocks.iter().all(|b| b.len() == 2));
        for i in 0..8 {
            assert!((r.f.get(i, i) - diag.get(i, i).exp()).abs() < 1e-14 * diag.get(i, i).exp());
        }
        let a = random_banded(50, 1, 2, 5);
        let r = split_funm_adaptive(&a, 1e-10, &FunctionSpec::monomial(1), 4).unwrap();
        assert!((r.f.to_dense() - a.to_dense()).norm() < 1e-15);
        assert!(split_funm_adaptive(&a, 0.0, &FunctionSpec::Exp, 4).is_err());
        assert!(split_funm_adaptive(&a, 1e-3, &FunctionSpec::Exp, 51).is_err());
    }

    #[test]
    fn adaptive_matches_dense_and_diag_mode() {
        let mut a = sym_tridiag(300, 6);
        let norm = a.to_dense().symmetric_eigenvalues().amax();
        a.scale(3.0 / norm);
        let exact = funm_dense(&a.to_dense(), &FunctionSpec::Exp).unwrap();
        let r = split_funm_adaptive(&a, 1e-10, &FunctionSpec::Exp, 8).unwrap();
        assert!(rel(&r.f.to_dense(), &exact) < 1e-8);
        assert_eq!(r.unconverged, 0);
        let mode = SplitMode::Adaptive { eps: 1e-10, n_min: 8 };
        let d = split_diag(&a, mode, &FunctionSpec::Exp).unwrap();
        assert!((d - r.f.diagonal()).norm() < 1e-13);
    }
}
