//! Divide-and-conquer evaluation of `f(A)` for banded and HSS matrices.
//!
//! `A` is split as `blkdiag(A11, A22) + B J C^T`; the two diagonal blocks are
//! handled recursively and the correction `f(A) - f(blkdiag(A11, A22))` is
//! computed with [`krylov_update`].

use alloc::vec::Vec;

use nalgebra::DVector;
#[allow(unused_imports)]
use num_traits::Float;

use crate::banded::{offdiag_split, BandedMatrix, OffdiagSplit};
use crate::dense::{funm_dense, is_symmetric, trace_symmetric, DenseMatrix};
use crate::error::{Error, Result};
use crate::function::FunctionSpec;
use crate::hss::{ClusterTree, HssMatrix};
use crate::krylov::{krylov_update, update_diag, update_trace, KrylovOptions, PoleSequence, UpdateStatus};
use crate::operator::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    Full,
    Diagonal,
    Trace,
}

#[derive(Debug, Clone)]
pub struct DcConfig {
    pub poles: PoleSequence,
    pub f: FunctionSpec,
    pub lag: usize,
    /// Krylov stopping tolerance and HSS recompression tolerance.
    pub eps: f64,
    pub n_min: usize,
    pub flag: Flag,
    /// Use the symmetric rank-`b` split instead of the rank-`2b` one.
    pub spd_rank_b: bool,
    pub max_poles: usize,
}

impl DcConfig {
    pub fn new(f: FunctionSpec, poles: PoleSequence) -> Self {
        DcConfig {
            poles,
            f,
            lag: 1,
            eps: 1e-8,
            n_min: 64,
            flag: Flag::Full,
            spd_rank_b: false,
            max_poles: KrylovOptions::default().max_poles,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_min == 0 {
            return Err(Error::InvalidParameter("n_min must be at least 1"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive"));
        }
        Ok(())
    }

    fn krylov_options(&self) -> KrylovOptions {
        KrylovOptions {
            lag: self.lag,
            tol: self.eps,
            max_poles: self.max_poles,
            relative: false,
        }
    }
}

#[derive(Debug, Clone)]
pub enum DcOutput {
    Full(HssMatrix),
    Diagonal(DVector<f64>),
    Trace(f64),
}

impl DcOutput {
    pub fn as_full(&self) -> Option<&HssMatrix> {
        match self {
            DcOutput::Full(h) => Some(h),
            _ => None,
        }
    }

    pub fn as_diagonal(&self) -> Option<&DVector<f64>> {
        match self {
            DcOutput::Diagonal(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_trace(&self) -> Option<f64> {
        match self {
            DcOutput::Trace(t) => Some(*t),
            _ => None,
        }
    }
}

/// One low-rank update at an internal node.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateRecord {
    pub level: usize,
    pub offset: usize,
    pub size: usize,
    /// Rank of `B J C^T` (columns of `B`).
    pub update_rank: usize,
    pub steps: usize,
    pub poles_used: usize,
    pub matvecs: usize,
    pub solves: usize,
    pub basis_rank: usize,
    pub status: UpdateStatus,
    /// Maximal HSS rank after the recompression (full flag only).
    pub hss_rank: Option<usize>,
    /// The rank-`b` split was requested but not used here.
    pub spd_fallback: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DcReport {
    pub updates: Vec<UpdateRecord>,
    pub dense_evals: usize,
}

impl DcReport {
    pub fn krylov_steps(&self) -> usize {
        self.updates.iter().map(|u| u.steps).sum()
    }

    pub fn not_converged(&self) -> usize {
        self.updates
            .iter()
            .filter(|u| u.status == UpdateStatus::MaxIterations)
            .count()
    }

    pub fn max_basis_rank(&self) -> usize {
        self.updates.iter().map(|u| u.basis_rank).max().unwrap_or(0)
    }

    /// Per-level totals `(level, steps, matvecs, solves, max basis rank)`.
    pub fn per_level(&self) -> Vec<(usize, usize, usize, usize, usize)> {
        let depth = self.updates.iter().map(|u| u.level + 1).max().unwrap_or(0);
        let mut out: Vec<_> = (0..depth).map(|l| (l, 0, 0, 0, 0)).collect();
        for u in &self.updates {
            let e = &mut out[u.level];
            e.1 += u.steps;
            e.2 += u.matvecs;
            e.3 += u.solves;
            e.4 = e.4.max(u.basis_rank);
        }
        out
    }
}

/// Input accepted by [`dc_funm`].
#[derive(Debug, Clone, Copy)]
pub enum DcInput<'a> {
    Banded(&'a BandedMatrix),
    Hss(&'a HssMatrix),
}

impl<'a> From<&'a BandedMatrix> for DcInput<'a> {
    fn from(a: &'a BandedMatrix) -> Self {
        DcInput::Banded(a)
    }
}

impl<'a> From<&'a HssMatrix> for DcInput<'a> {
    fn from(a: &'a HssMatrix) -> Self {
        DcInput::Hss(a)
    }
}

/// Approximates `f(A)`, its diagonal or its trace depending on `cfg.flag`.
pub fn dc_funm<'a>(a: impl Into<DcInput<'a>>, cfg: &DcConfig) -> Result<DcOutput> {
    dc_funm_report(a, cfg).map(|(o, _)| o)
}

/// [`dc_funm`] together with per-node cost records.
pub fn dc_funm_report<'a>(a: impl Into<DcInput<'a>>, cfg: &DcConfig) -> Result<(DcOutput, DcReport)> {
    cfg.validate()?;
    let mut report = DcReport::default();
    let out = match a.into() {
        DcInput::Banded(a) => {
            let tree = ClusterTree::new(a.n(), cfg.n_min);
            banded_rec(a, &tree, 0, 0, cfg, &mut report)?
        }
        DcInput::Hss(h) => hss_rec(h, 0, 0, cfg, &mut report)?,
    };
    Ok((out, report))
}

fn dense_base(a: &DenseMatrix, cfg: &DcConfig, report: &mut DcReport) -> Result<DcOutput> {
    report.dense_evals += 1;
    let fa = || {
        let fa = funm_dense(a, &cfg.f)?;
        match fa.iter().all(|x| x.is_finite()) {
            true => Ok(fa),
            false => Err(Error::NonFinite("f of a diagonal block")),
        }
    };
    Ok(match cfg.flag {
        Flag::Full => DcOutput::Full(HssMatrix::from_leaf(fa()?)?),
        Flag::Diagonal => DcOutput::Diagonal(fa()?.diagonal()),
        Flag::Trace if is_symmetric(a) => DcOutput::Trace(trace_symmetric(a, &cfg.f)?),
        Flag::Trace => DcOutput::Trace(fa()?.trace()),
    })
}

fn split_banded(a: &BandedMatrix, s: usize, cfg: &DcConfig) -> Result<(OffdiagSplit, bool)> {
    if !cfg.spd_rank_b {
        return Ok((offdiag_split(a, s, false)?, false));
    }
    if !a.is_symmetric() {
        log::warn!("rank-b split requested for a nonsymmetric block of size {}; using the rank-2b split", a.n());
        return Ok((offdiag_split(a, s, false)?, true));
    }
    let sp = offdiag_split(a, s, true)?;
    if sp.top.cholesky_probe() && sp.bottom.cholesky_probe() {
        Ok((sp, false))
    } else {
        log::warn!("corrected diagonal block is not positive definite at size {}; using the rank-2b split", a.n());
        Ok((offdiag_split(a, s, false)?, true))
    }
}

#[allow(clippy::too_many_arguments)]
fn combine(
    op: &dyn LinearOperator,
    b: &DenseMatrix,
    j: &DenseMatrix,
    c: &DenseMatrix,
    first: DcOutput,
    second: DcOutput,
    record: UpdateRecord,
    cfg: &DcConfig,
    report: &mut DcReport,
) -> Result<DcOutput> {
    let upd = krylov_update(op, b, j, c, &cfg.poles, &cfg.f, &cfg.krylov_options())?;
    let mut record = UpdateRecord {
        update_rank: b.ncols(),
        steps: upd.steps,
        poles_used: upd.poles_used,
        matvecs: upd.matvecs,
        solves: upd.solves,
        basis_rank: upd.rank(),
        status: upd.status,
        ..record
    };
    let out = match (first, second) {
        (DcOutput::Full(f1), DcOutput::Full(f2)) => {
            let h = HssMatrix::blkdiag(&f1, &f2)?.add_lowrank(&upd.u, &upd.x, &upd.v, cfg.eps)?;
            record.hss_rank = Some(h.max_rank());
            DcOutput::Full(h)
        }
        (DcOutput::Diagonal(d1), DcOutput::Diagonal(d2)) => {
            let mut d = DVector::zeros(d1.len() + d2.len());
            d.rows_mut(0, d1.len()).copy_from(&d1);
            d.rows_mut(d1.len(), d2.len()).copy_from(&d2);
            DcOutput::Diagonal(d + update_diag(&upd))
        }
        (DcOutput::Trace(t1), DcOutput::Trace(t2)) => DcOutput::Trace(t1 + t2 + update_trace(&upd)),
        _ => unreachable!("children share the flag"),
    };
    if upd.status == UpdateStatus::MaxIterations {
        log::warn!(
            "update at level {} offset {} did not reach eps after {} poles",
            record.level,
            record.offset,
            upd.poles_used
        );
    }
    report.updates.push(record);
    Ok(out)
}

fn blank_record(level: usize, offset: usize, size: usize) -> UpdateRecord {
    UpdateRecord {
        level,
        offset,
        size,
        update_rank: 0,
        steps: 0,
        poles_used: 0,
        matvecs: 0,
        solves: 0,
        basis_rank: 0,
        status: UpdateStatus::Invariant,
        hss_rank: None,
        spd_fallback: false,
    }
}

fn banded_rec(
    a: &BandedMatrix,
    tree: &ClusterTree,
    level: usize,
    offset: usize,
    cfg: &DcConfig,
    report: &mut DcReport,
) -> Result<DcOutput> {
    let Some((t1, t2)) = tree.children() else {
        return dense_base(&a.to_dense(), cfg, report);
    };
    let s = t1.n();
    let (sp, fallback) = split_banded(a, s, cfg)?;
    let first = banded_rec(&sp.top, &t1, level + 1, offset, cfg, report)?;
    let second = banded_rec(&sp.bottom, &t2, level + 1, offset + s, cfg, report)?;
    let op = sp.block_diagonal();
    let mut record = blank_record(level, offset, a.n());
    record.spd_fallback = fallback;
    combine(&op, &sp.b, &sp.j, &sp.c, first, second, record, cfg, report)
}

fn hss_rec(h: &HssMatrix, level: usize, offset: usize, cfg: &DcConfig, report: &mut DcReport) -> Result<DcOutput> {
    if h.depth() == 0 {
        return dense_base(&h.nodes()[0].d, cfg, report);
    }
    let (mut h1, mut h2) = h.children()?;
    let (mut b, mut j, mut c) = h.offdiag_factors()?;
    let mut record = blank_record(level, offset, h.n());
    if cfg.spd_rank_b {
        match spd_split_hss(h, &h1, &h2, cfg.eps)? {
            Some((n1, n2, bb, jj)) => {
                h1 = n1;
                h2 = n2;
                c = bb.clone();
                b = bb;
                j = jj;
            }
            None => {
                log::warn!("rank-b split not applicable at HSS level {}; using the full coupling", level);
                record.spd_fallback = true;
            }
        }
    }
    let n1 = h1.n();
    let first = hss_rec(&h1, level + 1, offset, cfg, report)?;
    let second = hss_rec(&h2, level + 1, offset + n1, cfg, report)?;
    let op = HssMatrix::blkdiag(&h1, &h2)?;
    combine(&op, &b, &j, &c, first, second, record, cfg, report)
}

/// Symmetric rank-`k` split of an HSS matrix with `U = V` at the top level:
/// `U1 S12 U2^T = (U1 P) S (U2 Q)^T`, `B = [U1 P S^{1/2}; -U2 Q S^{1/2}]`, `J = -I`.
#[allow(clippy::type_complexity)]
fn spd_split_hss(
    h: &HssMatrix,
    h1: &HssMatrix,
    h2: &HssMatrix,
    eps: f64,
) -> Result<Option<(HssMatrix, HssMatrix, DenseMatrix, DenseMatrix)>> {
    if !h.is_symmetric() {
        return Ok(None);
    }
    let (b, j, _) = h.offdiag_factors()?;
    let (n1, n2) = (h1.n(), h2.n());
    let k1 = h.nodes()[1].u.ncols();
    let k2 = h.nodes()[2].u.ncols();
    let s12 = j.view((0, k1), (k1, k2)).into_owned();
    let u1 = b.view((0, 0), (n1, k1)).into_owned();
    let u2 = b.view((n1, k1), (n2, k2)).into_owned();
    if k1 == 0 || k2 == 0 {
        return Ok(Some((h1.clone(), h2.clone(), DenseMatrix::zeros(n1 + n2, 0), DenseMatrix::zeros(0, 0))));
    }
    let svd = s12.svd(true, true);
    let p = &u1 * svd.u.expect("svd u");
    let q = &u2 * svd.v_t.expect("svd v_t").transpose();
    let sv = &svd.singular_values;
    let r = sv.len();
    let sigma = DenseMatrix::from_diagonal(sv);
    let mut bf = DenseMatrix::zeros(n1 + n2, r);
    for k in 0..r {
        let w = sv[k].sqrt();
        bf.view_mut((0, k), (n1, 1)).copy_from(&(p.column(k) * w));
        bf.view_mut((n1, k), (n2, 1)).copy_from(&(-q.column(k) * w));
    }
    let c1 = h1.add_lowrank(&p, &sigma, &p, eps)?;
    let c2 = h2.add_lowrank(&q, &sigma, &q, eps)?;
    Ok(Some((c1, c2, bf, -DenseMatrix::identity(r, r))))
}
