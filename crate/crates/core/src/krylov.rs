//! Block rational Krylov projection for `f(A + B J C^T) - f(A)`.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrixView, DVector};
use num_complex::Complex64;

use crate::dense::{funm_block12, symmetrize, sym_update_x, DenseMatrix};
use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::lu::Solve;
use crate::operator::LinearOperator;

/// Columns whose norm drops below this fraction of their norm before
/// orthogonalization are treated as linearly dependent.
pub const DEFLATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pole {
    Infinity,
    Finite(Complex64),
}

impl Pole {
    pub fn real(x: f64) -> Self {
        Pole::Finite(Complex64::new(x, 0.0))
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Pole::Finite(Complex64::new(re, im))
    }

    fn is_complex(&self) -> bool {
        matches!(self, Pole::Finite(z) if z.im != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleKind {
    Polynomial,
    Extended,
    Rational,
}

/// Poles used cyclically. Nonreal poles must be followed by their conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSequence {
    kind: PoleKind,
    poles: Vec<Pole>,
}

impl PoleSequence {
    pub fn polynomial() -> Self {
        PoleSequence {
            kind: PoleKind::Polynomial,
            poles: vec![Pole::Infinity],
        }
    }

    /// `B, A^{-1} B, A B, A^{-2} B, ...`: poles `inf, 0, inf, 0, ...`.
    pub fn extended() -> Self {
        PoleSequence {
            kind: PoleKind::Extended,
            poles: vec![Pole::Infinity, Pole::real(0.0)],
        }
    }

    pub fn rational(poles: Vec<Pole>) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::InvalidParameter("empty pole list"));
        }
        let mut i = 0;
        while i < poles.len() {
            if let Pole::Finite(z) = poles[i] {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::InvalidParameter("pole is not finite"));
                }
                if z.im != 0.0 {
                    match poles.get(i + 1) {
                        Some(Pole::Finite(w)) if *w == z.conj() => i += 1,
                        _ => return Err(Error::PolesNotConjugateClosed),
                    }
                }
            }
            i += 1;
        }
        Ok(PoleSequence {
            kind: PoleKind::Rational,
            poles,
        })
    }

    pub fn kind(&self) -> PoleKind {
        self.kind
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn pole(&self, i: usize) -> Pole {
        self.poles[i % self.poles.len()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Lag `d` of the stopping test.
    pub lag: usize,
    pub tol: f64,
    /// Maximum number of poles consumed.
    pub max_poles: usize,
    /// Divide the lag estimate by `||X_m||_F`.
    pub relative: bool,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            lag: 1,
            tol: 1e-8,
            max_poles: 60,
            relative: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateStatus {
    /// The lag estimate fell below the tolerance.
    Tolerance,
    /// The bases stopped growing; the projection is exact up to roundoff.
    Invariant,
    /// `max_poles` was reached without passing the lag test.
    MaxIterations,
}

/// `f(A + R) - f(A) ~ U X V^T`.
#[derive(Debug, Clone)]
pub struct UpdateResult {
    pub u: DenseMatrix,
    pub x: DenseMatrix,
    pub v: DenseMatrix,
    /// `V` is the same basis as `U`.
    pub symmetric: bool,
    /// Block steps taken.
    pub steps: usize,
    /// Poles consumed (a conjugate pair counts twice).
    pub poles_used: usize,
    pub est_history: Vec<f64>,
    pub status: UpdateStatus,
    pub matvecs: usize,
    pub solves: usize,
}

impl UpdateResult {
    pub fn converged(&self) -> bool {
        self.status != UpdateStatus::MaxIterations
    }

    pub fn rank(&self) -> usize {
        self.x.nrows().max(self.x.ncols())
    }

    /// Dense `U X V^T`.
    pub fn to_dense(&self) -> DenseMatrix {
        &self.u * &self.x * self.v.transpose()
    }
}

/// `trace(U X V^T) = trace(X V^T U)`.
pub fn update_trace(r: &UpdateResult) -> f64 {
    if r.symmetric {
        return r.x.trace();
    }
    let vtu = r.v.tr_mul(&r.u);
    (&r.x * vtu).trace()
}

/// Diagonal of `U X V^T` by a row-wise contraction.
pub fn update_diag(r: &UpdateResult) -> DVector<f64> {
    let ux = &r.u * &r.x;
    DVector::from_fn(r.u.nrows(), |i, _| ux.row(i).dot(&r.v.row(i)))
}

enum Factor<'a> {
    Real(Box<dyn Solve<f64> + 'a>),
    Complex(Box<dyn Solve<Complex64> + 'a>),
}

struct FactorCache<'a> {
    entries: Vec<(Complex64, Factor<'a>)>,
}

impl<'a> FactorCache<'a> {
    fn get(&mut self, op: &'a dyn LinearOperator, z: Complex64) -> Result<&Factor<'a>> {
        if let Some(pos) = self.entries.iter().position(|(p, _)| *p == z) {
            return Ok(&self.entries[pos].1);
        }
        let f = if z.im == 0.0 {
            Factor::Real(op.factor_real(z.re)?)
        } else {
            Factor::Complex(op.factor_complex(z)?)
        };
        self.entries.push((z, f));
        Ok(&self.entries.last().expect("just pushed").1)
    }
}

/// Incrementally built orthonormal basis together with `A` times the basis.
struct Basis {
    n: usize,
    transpose: bool,
    q: Vec<f64>,
    aq: Vec<f64>,
    cols: usize,
    last: DenseMatrix,
    matvecs: usize,
    solves: usize,
}

impl Basis {
    fn new(n: usize, transpose: bool) -> Self {
        Basis {
            n,
            transpose,
            q: Vec::new(),
            aq: Vec::new(),
            cols: 0,
            last: DenseMatrix::zeros(n, 0),
            matvecs: 0,
            solves: 0,
        }
    }

    fn q(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.q, self.n, self.cols)
    }

    fn aq(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.aq, self.n, self.cols)
    }

    fn matrix(&self) -> DenseMatrix {
        self.q().into_owned()
    }

    /// Orthonormalizes the columns of `w` against the basis (two Gram–Schmidt passes)
    /// and appends the ones that survive deflation.
    fn push_block(&mut self, w: &DenseMatrix) -> DenseMatrix {
        let start = self.cols;
        for col in w.column_iter() {
            let norm0 = col.norm();
            if norm0 == 0.0 || !norm0.is_finite() {
                continue;
            }
            let mut v = col.into_owned();
            for _ in 0..2 {
                if self.cols > 0 {
                    let h = self.q().tr_mul(&v);
                    v -= self.q() * h;
                }
            }
            let nv = v.norm();
            if nv <= DEFLATION_TOL * norm0 {
                continue;
            }
            v /= nv;
            self.q.extend_from_slice(v.as_slice());
            self.cols += 1;
        }
        DenseMatrix::from_column_slice(self.n, self.cols - start, &self.q[start * self.n..])
    }

    /// One block step with the given pole; returns the number of new columns.
    fn extend<'a>(
        &mut self,
        op: &'a dyn LinearOperator,
        cache: &mut FactorCache<'a>,
        pole: Pole,
        start: Option<&DenseMatrix>,
    ) -> Result<usize> {
        let src = match start {
            Some(b) => b.clone(),
            None => self.last.clone(),
        };
        if src.ncols() == 0 {
            self.last = src;
            return Ok(0);
        }
        let blocks: Vec<DenseMatrix> = match pole {
            Pole::Infinity if start.is_some() => vec![src],
            Pole::Infinity => {
                self.matvecs += src.ncols();
                vec![if self.transpose {
                    op.apply_transpose(&src)?
                } else {
                    op.apply(&src)?
                }]
            }
            Pole::Finite(z) => {
                self.solves += src.ncols();
                match cache.get(op, z)? {
                    Factor::Real(f) => vec![f.solve(&src, self.transpose)],
                    Factor::Complex(f) => {
                        let y = f.solve(&src.map(|v| Complex64::new(v, 0.0)), self.transpose);
                        vec![y.map(|c| c.im), y.map(|c| c.re)]
                    }
                }
            }
        };
        let before = self.cols;
        let mut continuation = None;
        for b in &blocks {
            let added = self.push_block(b);
            if continuation.is_none() && added.ncols() > 0 {
                continuation = Some(added);
            }
        }
        let added = self.cols - before;
        if added > 0 {
            let newq = DenseMatrix::from_column_slice(self.n, added, &self.q[before * self.n..]);
            self.matvecs += added;
            let anew = op.apply(&newq)?;
            self.aq.extend_from_slice(anew.as_slice());
        }
        self.last = continuation.unwrap_or_else(|| DenseMatrix::zeros(self.n, 0));
        Ok(added)
    }

    /// `Q^T A Q`.
    fn compression(&self) -> DenseMatrix {
        self.q().tr_mul(&self.aq())
    }
}

/// Orthonormal basis of the block rational Krylov space after `m` poles and `U^T A U`.
pub fn block_rational_arnoldi(
    op: &dyn LinearOperator,
    b: &DenseMatrix,
    poles: &PoleSequence,
    m: usize,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if b.nrows() != op.size() {
        return Err(Error::DimensionMismatch {
            context: "block_rational_arnoldi",
            expected: op.size(),
            found: b.nrows(),
        });
    }
    let mut cache = FactorCache { entries: Vec::new() };
    let mut basis = Basis::new(op.size(), false);
    let mut used = 0;
    let mut first = true;
    while used < m {
        let pole = poles.pole(used);
        basis.extend(op, &mut cache, pole, if first { Some(b) } else { None })?;
        used += if pole.is_complex() { 2 } else { 1 };
        first = false;
    }
    Ok((basis.matrix(), basis.compression()))
}

fn padded_diff(x: &DenseMatrix, prev: &DenseMatrix) -> f64 {
    let mut d = x.clone();
    let (r, c) = prev.shape();
    let mut view = d.view_mut((0, 0), (r, c));
    view -= prev;
    d.norm()
}

fn is_close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && (a - b).norm() <= tol * a.norm().max(b.norm())
}

/// Approximates `f(A + B J C^T) - f(A)` by projection onto block rational Krylov spaces.
pub fn krylov_update(
    op: &dyn LinearOperator,
    b: &DenseMatrix,
    j: &DenseMatrix,
    c: &DenseMatrix,
    poles: &PoleSequence,
    f: &FunctionSpec,
    opts: &KrylovOptions,
) -> Result<UpdateResult> {
    let n = op.size();
    for (ctx, m) in [("krylov_update B", b), ("krylov_update C", c)] {
        if m.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: ctx,
                expected: n,
                found: m.nrows(),
            });
        }
    }
    if j.shape() != (b.ncols(), c.ncols()) {
        return Err(Error::DimensionMismatch {
            context: "krylov_update J",
            expected: b.ncols(),
            found: j.nrows(),
        });
    }
    let symmetric = op.is_symmetric() && is_close(b, c, 1e-14) && j.is_square() && is_close(j, &j.transpose(), 1e-13);
    let j = if symmetric { symmetrize(j) } else { j.clone() };

    let mut result = UpdateResult {
        u: DenseMatrix::zeros(n, 0),
        x: DenseMatrix::zeros(0, 0),
        v: DenseMatrix::zeros(n, 0),
        symmetric,
        steps: 0,
        poles_used: 0,
        est_history: Vec::new(),
        status: UpdateStatus::Invariant,
        matvecs: 0,
        solves: 0,
    };
    if b.ncols() == 0 || c.ncols() == 0 || j.iter().all(|v| *v == 0.0) {
        return Ok(result);
    }

    let mut cache = FactorCache { entries: Vec::new() };
    let mut ub = Basis::new(n, false);
    let mut vb = Basis::new(n, true);
    let lag = opts.lag.max(1);
    let mut history: VecDeque<DenseMatrix> = VecDeque::new();
    let mut x = DenseMatrix::zeros(0, 0);
    let mut status = UpdateStatus::MaxIterations;
    let mut steps = 0;
    let mut used = 0;
    while used < opts.max_poles.max(1) {
        let pole = poles.pole(used);
        let start_u = if steps == 0 { Some(b) } else { None };
        let added_u = ub.extend(op, &mut cache, pole, start_u)?;
        let added_v = if symmetric {
            0
        } else {
            let start_v = if steps == 0 { Some(c) } else { None };
            vb.extend(op, &mut cache, pole, start_v)?
        };
        used += if pole.is_complex() { 2 } else { 1 };
        steps += 1;

        let u = ub.q();
        let g = symmetrize_if(ub.compression(), symmetric);
        let utb = u.tr_mul(b);
        x = if symmetric {
            let r = &utb * &j * utb.transpose();
            sym_update_x(&g, &symmetrize(&(&g + r)), f)?
        } else {
            let v = vb.q();
            let vtb = v.tr_mul(b);
            let ctv = c.tr_mul(&v);
            let h = vb.compression() + &vtb * &j * &ctv;
            let k = &utb * &j * &ctv;
            funm_block12(&g, &h, &k, f)?
        };

        if steps > lag {
            let prev = &history[history.len() - lag];
            let mut est = padded_diff(&x, prev);
            if opts.relative {
                est /= x.norm().max(f64::MIN_POSITIVE);
            }
            result.est_history.push(est);
            if est < opts.tol {
                status = UpdateStatus::Tolerance;
                break;
            }
        }
        if (added_u == 0 && added_v == 0) || ub.cols >= n || (!symmetric && vb.cols >= n) {
            status = UpdateStatus::Invariant;
            break;
        }
        history.push_back(x.clone());
        if history.len() > lag {
            history.pop_front();
        }
    }
    if status == UpdateStatus::MaxIterations {
        log::debug!("krylov_update stopped after {} poles without meeting the tolerance", used);
    }
    result.u = ub.matrix();
    result.v = if symmetric { result.u.clone() } else { vb.matrix() };
    result.x = x;
    result.steps = steps;
    result.poles_used = used;
    result.status = status;
    result.matvecs = ub.matvecs + vb.matvecs;
    result.solves = ub.solves + vb.solves;
    Ok(result)
}

fn symmetrize_if(g: DenseMatrix, sym: bool) -> DenseMatrix {
    if sym {
        symmetrize(&g)
    } else {
        g
    }
}
