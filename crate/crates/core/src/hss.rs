//! Hierarchically semiseparable matrices on perfect binary cluster trees.
//!
//! Nodes are stored in heap order: node `(level, i)` has id `2^level - 1 + i`
//! and children `2 id + 1`, `2 id + 2`. Every non-root node carries a row basis
//! `u` and a column basis `v`: explicit for leaves, a translation operator
//! `[R_1; R_2]` (stacked over the two children) for internal nodes. Internal
//! nodes hold the coupling matrices of their two children, `s12` and `s21`, so
//! that `A(I_c1, I_c2) = U_c1 s12 V_c2^T` and `A(I_c2, I_c1) = U_c2 s21 V_c1^T`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Consecutive index sets on a perfect binary tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterTree {
    n: usize,
    /// `levels[l]` holds the `2^l + 1` breakpoints of level `l`.
    levels: Vec<Vec<usize>>,
}

impl ClusterTree {
    /// Midpoint tree: the first child gets `ceil(m / 2)` indices; the depth is
    /// the smallest `L` with `ceil(n / 2^L) <= n_min`.
    pub fn new(n: usize, n_min: usize) -> Self {
        let n_min = n_min.max(1);
        let mut depth = 0;
        while n.div_ceil(1 << depth) > n_min {
            depth += 1;
        }
        let mut levels = vec![vec![0, n]];
        for l in 0..depth {
            let prev = &levels[l];
            let mut next = Vec::with_capacity(2 * prev.len() - 1);
            next.push(0);
            for w in prev.windows(2) {
                let m = w[1] - w[0];
                next.push(w[0] + m.div_ceil(2));
                next.push(w[1]);
            }
            levels.push(next);
        }
        ClusterTree { n, levels }
    }

    /// Builds a tree from explicit breakpoints, one list per level.
    pub fn from_breakpoints(levels: Vec<Vec<usize>>) -> Result<Self> {
        if levels.is_empty() || levels[0].len() != 2 || levels[0][0] != 0 {
            return Err(Error::TreeMismatch("root level must be [0, n]"));
        }
        let n = levels[0][1];
        for (l, bp) in levels.iter().enumerate() {
            if bp.len() != (1 << l) + 1 {
                return Err(Error::TreeMismatch("wrong number of breakpoints on a level"));
            }
            if bp[0] != 0 || bp[bp.len() - 1] != n || bp.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::TreeMismatch("breakpoints must be nondecreasing from 0 to n"));
            }
            if l > 0 && (0..bp.len()).step_by(2).any(|i| bp[i] != levels[l - 1][i / 2]) {
                return Err(Error::TreeMismatch("children must partition their parent"));
            }
        }
        Ok(ClusterTree { n, levels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn breakpoints(&self, level: usize) -> &[usize] {
        &self.levels[level]
    }

    pub fn node_count(&self) -> usize {
        (1 << (self.depth() + 1)) - 1
    }

    pub fn level_of(id: usize) -> usize {
        (usize::BITS - 1 - (id + 1).leading_zeros()) as usize
    }

    pub fn range(&self, id: usize) -> Range<usize> {
        let l = Self::level_of(id);
        let i = id + 1 - (1 << l);
        self.levels[l][i]..self.levels[l][i + 1]
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        Self::level_of(id) == self.depth()
    }

    pub fn leaves(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.levels[self.depth()].windows(2).map(|w| w[0]..w[1])
    }

    /// The two subtrees below the root, re-indexed from zero.
    pub fn children(&self) -> Option<(ClusterTree, ClusterTree)> {
        if self.depth() == 0 {
            return None;
        }
        let mid = self.levels[1][1];
        let mut l1 = Vec::new();
        let mut l2 = Vec::new();
        for l in 1..self.levels.len() {
            let bp = &self.levels[l];
            let half = bp.len() / 2;
            l1.push(bp[..=half].to_vec());
            l2.push(bp[half..].iter().map(|v| v - mid).collect());
        }
        Some((
            ClusterTree { n: mid, levels: l1 },
            ClusterTree {
                n: self.n - mid,
                levels: l2,
            },
        ))
    }

    /// Parent tree whose root children are `a` and `b`.
    pub fn join(a: &ClusterTree, b: &ClusterTree) -> Result<ClusterTree> {
        if a.depth() != b.depth() {
            return Err(Error::TreeMismatch("subtrees have different depths"));
        }
        let n = a.n + b.n;
        let mut levels = vec![vec![0, n]];
        for (la, lb) in a.levels.iter().zip(&b.levels) {
            let mut bp = la.clone();
            bp.extend(lb[1..].iter().map(|v| v + a.n));
            levels.push(bp);
        }
        Ok(ClusterTree { n, levels })
    }
}

/// One node of an [`HssMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct HssNode {
    /// Leaf: explicit row basis. Internal: translation from the children's bases. Root: no columns.
    pub u: DenseMatrix,
    /// Same for the column basis.
    pub v: DenseMatrix,
    /// Diagonal block (leaves only).
    pub d: DenseMatrix,
    /// Coupling between the first and second child (internal nodes only).
    pub s12: DenseMatrix,
    /// Coupling between the second and first child (internal nodes only).
    pub s21: DenseMatrix,
}

impl HssNode {
    fn empty() -> Self {
        HssNode {
            u: DenseMatrix::zeros(0, 0),
            v: DenseMatrix::zeros(0, 0),
            d: DenseMatrix::zeros(0, 0),
            s12: DenseMatrix::zeros(0, 0),
            s21: DenseMatrix::zeros(0, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HssMatrix {
    tree: ClusterTree,
    nodes: Vec<HssNode>,
}

fn c1(id: usize) -> usize {
    2 * id + 1
}

fn c2(id: usize) -> usize {
    2 * id + 2
}

fn hcat(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    m
}

fn vcat(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    m
}

fn blkdiag2(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut(a.shape(), b.shape()).copy_from(b);
    m
}

fn rows(a: &DenseMatrix, r: Range<usize>) -> DenseMatrix {
    a.rows(r.start, r.len()).into_owned()
}

/// Thin QR that tolerates empty shapes: `a = q * r` with orthonormal `q`.
fn thin_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (m, k) = a.shape();
    if m == 0 || k == 0 {
        return (DenseMatrix::zeros(m, 0), DenseMatrix::zeros(0, k));
    }
    let qr = a.clone().qr();
    (qr.q(), qr.r())
}

/// Orthonormal basis `q` (k x r) of the dominant column space of `w` and the
/// reduced row factor `q^T w`, dropping singular values whose tail norm is at most `tol`.
fn truncate(w: &DenseMatrix, tol: f64) -> (DenseMatrix, DenseMatrix) {
    let (k, c) = w.shape();
    if k == 0 || c == 0 {
        return (DenseMatrix::zeros(k, 0), DenseMatrix::zeros(0, c));
    }
    // right factor of an LQ decomposition does not change the column space
    let small = if c > k {
        thin_qr(&w.transpose()).1.transpose()
    } else {
        w.clone()
    };
    let svd = small.svd(true, false);
    let u = svd.u.expect("svd u");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let mut tail = 0.0;
    let mut r = order.len();
    while r > 0 {
        let s = sv[order[r - 1]];
        if (tail + s * s).sqrt() > tol {
            break;
        }
        tail += s * s;
        r -= 1;
    }
    let mut q = DenseMatrix::zeros(k, r);
    for (j, &o) in order[..r].iter().enumerate() {
        q.set_column(j, &u.column(o));
    }
    let reduced = q.transpose() * w;
    (q, reduced)
}

impl HssMatrix {
    /// Assembles a matrix from raw nodes after checking every dimension.
    pub fn from_parts(tree: ClusterTree, nodes: Vec<HssNode>) -> Result<Self> {
        if nodes.len() != tree.node_count() {
            return Err(Error::DimensionMismatch {
                context: "HSS node count",
                expected: tree.node_count(),
                found: nodes.len(),
            });
        }
        let h = HssMatrix { tree, nodes };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        let mismatch = |context, expected, found| Err(Error::DimensionMismatch { context, expected, found });
        for id in 0..self.nodes.len() {
            let nd = &self.nodes[id];
            let size = self.tree.range(id).len();
            if self.tree.is_leaf(id) {
                if nd.d.shape() != (size, size) {
                    return mismatch("HSS leaf block", size, nd.d.nrows());
                }
                if nd.u.nrows() != size || nd.v.nrows() != size {
                    return mismatch("HSS leaf basis rows", size, nd.u.nrows());
                }
            } else {
                let (a, b) = (&self.nodes[c1(id)], &self.nodes[c2(id)]);
                if nd.u.nrows() != a.u.ncols() + b.u.ncols() {
                    return mismatch("HSS row translation", a.u.ncols() + b.u.ncols(), nd.u.nrows());
                }
                if nd.v.nrows() != a.v.ncols() + b.v.ncols() {
                    return mismatch("HSS column translation", a.v.ncols() + b.v.ncols(), nd.v.nrows());
                }
                if nd.s12.shape() != (a.u.ncols(), b.v.ncols()) {
                    return mismatch("HSS coupling s12", a.u.ncols(), nd.s12.nrows());
                }
                if nd.s21.shape() != (b.u.ncols(), a.v.ncols()) {
                    return mismatch("HSS coupling s21", b.u.ncols(), nd.s21.nrows());
                }
            }
            if id == 0 && (nd.u.ncols() != 0 || nd.v.ncols() != 0) {
                return mismatch("HSS root basis columns", 0, nd.u.ncols());
            }
        }
        Ok(())
    }

    /// Depth-zero matrix holding a single dense block.
    pub fn from_leaf(d: DenseMatrix) -> Result<Self> {
        if d.nrows() != d.ncols() {
            return Err(Error::NonSquare {
                rows: d.nrows(),
                cols: d.ncols(),
            });
        }
        let n = d.nrows();
        Ok(HssMatrix {
            tree: ClusterTree::new(n, n.max(1)),
            nodes: vec![HssNode {
                u: DenseMatrix::zeros(n, 0),
                v: DenseMatrix::zeros(n, 0),
                d,
                s12: DenseMatrix::zeros(0, 0),
                s21: DenseMatrix::zeros(0, 0),
            }],
        })
    }

    /// Block diagonal matrix with the given leaf blocks and rank-zero couplings.
    pub fn block_diagonal(tree: &ClusterTree, mut leaf: impl FnMut(Range<usize>) -> DenseMatrix) -> Self {
        let mut nodes = vec![HssNode::empty(); tree.node_count()];
        for id in (0..tree.node_count()).rev() {
            let r = tree.range(id);
            if tree.is_leaf(id) {
                nodes[id].d = leaf(r.clone());
                nodes[id].u = DenseMatrix::zeros(r.len(), 0);
                nodes[id].v = DenseMatrix::zeros(r.len(), 0);
            } else {
                nodes[id].u = DenseMatrix::zeros(0, 0);
                nodes[id].v = DenseMatrix::zeros(0, 0);
            }
        }
        HssMatrix {
            tree: tree.clone(),
            nodes,
        }
    }

    pub fn zeros(tree: &ClusterTree) -> Self {
        Self::block_diagonal(tree, |r| DenseMatrix::zeros(r.len(), r.len()))
    }

    pub fn identity(tree: &ClusterTree) -> Self {
        Self::block_diagonal(tree, |r| DenseMatrix::identity(r.len(), r.len()))
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn nodes(&self) -> &[HssNode] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    /// Largest basis size over all nodes.
    pub fn max_rank(&self) -> usize {
        self.nodes.iter().map(|nd| nd.u.ncols().max(nd.v.ncols())).max().unwrap_or(0)
    }

    /// Number of stored scalars.
    pub fn storage(&self) -> usize {
        self.nodes
            .iter()
            .map(|nd| nd.u.len() + nd.v.len() + nd.d.len() + nd.s12.len() + nd.s21.len())
            .sum()
    }

    /// Compression of a dense matrix by truncated SVDs of the projected block rows and columns.
    pub fn from_dense(a: &DenseMatrix, tree: &ClusterTree, eps: f64) -> Result<Self> {
        let n = tree.n();
        if a.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                context: "hss_from_dense",
                expected: n,
                found: a.nrows(),
            });
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("hss_from_dense input"));
        }
        let count = tree.node_count();
        let tol = if count > 1 {
            eps * a.norm() / ((2 * (count - 1)) as f64).sqrt()
        } else {
            0.0
        };
        let at = a.transpose();
        let mut nodes = vec![HssNode::empty(); count];
        // explicit bases and projected full block rows U^T A(I, :) / columns V^T A(:, I)^T
        let mut ue: Vec<DenseMatrix> = vec![DenseMatrix::zeros(0, 0); count];
        let mut ve: Vec<DenseMatrix> = vec![DenseMatrix::zeros(0, 0); count];
        let mut pu: Vec<DenseMatrix> = vec![DenseMatrix::zeros(0, 0); count];
        let mut pv: Vec<DenseMatrix> = vec![DenseMatrix::zeros(0, 0); count];
        let complement = |m: &DenseMatrix, r: &Range<usize>| {
            hcat(
                &m.columns(0, r.start).into_owned(),
                &m.columns(r.end, n - r.end).into_owned(),
            )
        };
        for id in (1..count).rev() {
            let r = tree.range(id);
            for (mat, e, p, is_u) in [(a, &mut ue, &mut pu, true), (&at, &mut ve, &mut pv, false)] {
                let (block, fullrow) = if tree.is_leaf(id) {
                    let fr = rows(mat, r.clone());
                    (complement(&fr, &r), fr)
                } else {
                    let fr = vcat(&p[c1(id)], &p[c2(id)]);
                    (complement(&fr, &r), fr)
                };
                let (q, _) = truncate(&block, tol);
                p[id] = q.transpose() * fullrow;
                e[id] = if tree.is_leaf(id) {
                    q.clone()
                } else {
                    blkdiag2(&e[c1(id)], &e[c2(id)]) * &q
                };
                if is_u {
                    nodes[id].u = q;
                } else {
                    nodes[id].v = q;
                }
            }
            if tree.is_leaf(id) {
                nodes[id].d = a.view((r.start, r.start), (r.len(), r.len())).into_owned();
            }
        }
        if count == 1 {
            nodes[0].d = a.clone();
            nodes[0].u = DenseMatrix::zeros(n, 0);
            nodes[0].v = DenseMatrix::zeros(n, 0);
        }
        for id in 0..count {
            if tree.is_leaf(id) {
                continue;
            }
            let (r1, r2) = (tree.range(c1(id)), tree.range(c2(id)));
            // U_c1^T A(I_c1, I_c2) V_c2
            nodes[id].s12 = pu[c1(id)].columns(r2.start, r2.len()) * &ve[c2(id)];
            nodes[id].s21 = pu[c2(id)].columns(r1.start, r1.len()) * &ve[c1(id)];
            if id == 0 {
                let (k1, k2) = (nodes[c1(0)].u.ncols(), nodes[c2(0)].u.ncols());
                let (l1, l2) = (nodes[c1(0)].v.ncols(), nodes[c2(0)].v.ncols());
                nodes[0].u = DenseMatrix::zeros(k1 + k2, 0);
                nodes[0].v = DenseMatrix::zeros(l1 + l2, 0);
            }
        }
        Ok(HssMatrix {
            tree: tree.clone(),
            nodes,
        })
    }

    /// Explicit row and column bases of every node (empty for the root).
    fn explicit_bases(&self) -> (Vec<DenseMatrix>, Vec<DenseMatrix>) {
        let count = self.nodes.len();
        let mut ue = vec![DenseMatrix::zeros(0, 0); count];
        let mut ve = vec![DenseMatrix::zeros(0, 0); count];
        for id in (1..count).rev() {
            if self.tree.is_leaf(id) {
                ue[id] = self.nodes[id].u.clone();
                ve[id] = self.nodes[id].v.clone();
            } else {
                ue[id] = blkdiag2(&ue[c1(id)], &ue[c2(id)]) * &self.nodes[id].u;
                ve[id] = blkdiag2(&ve[c1(id)], &ve[c2(id)]) * &self.nodes[id].v;
            }
        }
        (ue, ve)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.n();
        let mut a = DenseMatrix::zeros(n, n);
        let (ue, ve) = self.explicit_bases();
        for id in 0..self.nodes.len() {
            let nd = &self.nodes[id];
            if self.tree.is_leaf(id) {
                let r = self.tree.range(id);
                a.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&nd.d);
            } else {
                let (r1, r2) = (self.tree.range(c1(id)), self.tree.range(c2(id)));
                let b12 = &ue[c1(id)] * &nd.s12 * ve[c2(id)].transpose();
                let b21 = &ue[c2(id)] * &nd.s21 * ve[c1(id)].transpose();
                a.view_mut((r1.start, r2.start), (r1.len(), r2.len())).copy_from(&b12);
                a.view_mut((r2.start, r1.start), (r2.len(), r1.len())).copy_from(&b21);
            }
        }
        a
    }

    /// `H X`, or `H^T X` when `transpose` is set, by one upward and one downward sweep.
    pub fn matvec_op(&self, x: &DenseMatrix, transpose: bool) -> Result<DenseMatrix> {
        let n = self.n();
        if x.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: "hss_matvec",
                expected: n,
                found: x.nrows(),
            });
        }
        let r = x.ncols();
        let count = self.nodes.len();
        fn pick(nd: &HssNode, first: bool) -> &DenseMatrix {
            if first {
                &nd.u
            } else {
                &nd.v
            }
        }
        let in_basis = |nd| pick(nd, transpose);
        let out_basis = |nd| pick(nd, !transpose);
        let mut xh = vec![DenseMatrix::zeros(0, r); count];
        for id in (1..count).rev() {
            let nd = &self.nodes[id];
            xh[id] = if self.tree.is_leaf(id) {
                let rg = self.tree.range(id);
                in_basis(nd).transpose() * x.rows(rg.start, rg.len())
            } else {
                in_basis(nd).transpose() * vcat(&xh[c1(id)], &xh[c2(id)])
            };
        }
        let mut y = DenseMatrix::zeros(n, r);
        let mut yh = vec![DenseMatrix::zeros(0, r); count];
        for id in 0..count {
            let nd = &self.nodes[id];
            if self.tree.is_leaf(id) {
                let rg = self.tree.range(id);
                let xs = x.rows(rg.start, rg.len());
                let mut ys = if transpose {
                    nd.d.transpose() * xs
                } else {
                    &nd.d * xs
                };
                if id > 0 {
                    ys += out_basis(nd) * &yh[id];
                }
                y.rows_mut(rg.start, rg.len()).copy_from(&ys);
            } else {
                let (a, b) = (c1(id), c2(id));
                let (ka, kb) = (out_basis(&self.nodes[a]).ncols(), out_basis(&self.nodes[b]).ncols());
                let (mut ya, mut yb) = if transpose {
                    (nd.s21.transpose() * &xh[b], nd.s12.transpose() * &xh[a])
                } else {
                    (&nd.s12 * &xh[b], &nd.s21 * &xh[a])
                };
                if id > 0 {
                    let down = out_basis(nd) * &yh[id];
                    ya += down.rows(0, ka);
                    yb += down.rows(ka, kb);
                }
                yh[a] = ya;
                yh[b] = yb;
            }
        }
        Ok(y)
    }

    pub fn matvec(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.matvec_op(x, false)
    }

    /// Factors `B J C^T` of the two top-level off-diagonal blocks.
    pub fn offdiag_factors(&self) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
        if self.depth() == 0 {
            return Err(Error::DegenerateTree);
        }
        let (ue, ve) = self.explicit_bases();
        let b = blkdiag2(&ue[1], &ue[2]);
        let c = blkdiag2(&ve[1], &ve[2]);
        let root = &self.nodes[0];
        let (k1, k2) = (ue[1].ncols(), ue[2].ncols());
        let (l1, l2) = (ve[1].ncols(), ve[2].ncols());
        let mut j = DenseMatrix::zeros(k1 + k2, l1 + l2);
        j.view_mut((0, l1), (k1, l2)).copy_from(&root.s12);
        j.view_mut((k1, 0), (k2, l1)).copy_from(&root.s21);
        Ok((b, j, c))
    }

    /// The two diagonal sub-blocks below the root as standalone HSS matrices.
    pub fn children(&self) -> Result<(HssMatrix, HssMatrix)> {
        let (t1, t2) = self.tree.children().ok_or(Error::DegenerateTree)?;
        let mut n1 = Vec::with_capacity(t1.node_count());
        let mut n2 = Vec::with_capacity(t2.node_count());
        for l in 1..=self.depth() {
            let first = (1 << l) - 1;
            let half = 1 << (l - 1);
            n1.extend_from_slice(&self.nodes[first..first + half]);
            n2.extend_from_slice(&self.nodes[first + half..first + 2 * half]);
        }
        for nd in [&mut n1[0], &mut n2[0]] {
            nd.u = DenseMatrix::zeros(nd.u.nrows(), 0);
            nd.v = DenseMatrix::zeros(nd.v.nrows(), 0);
        }
        Ok((
            HssMatrix { tree: t1, nodes: n1 },
            HssMatrix { tree: t2, nodes: n2 },
        ))
    }

    /// Copy with the top-level couplings set to zero.
    pub fn without_root_coupling(&self) -> HssMatrix {
        let mut h = self.clone();
        if h.depth() > 0 {
            let root = &mut h.nodes[0];
            root.s12.fill(0.0);
            root.s21.fill(0.0);
        }
        h
    }

    /// Parent matrix `[[H1, 0], [0, H2]]` on the joined tree.
    pub fn blkdiag(h1: &HssMatrix, h2: &HssMatrix) -> Result<HssMatrix> {
        let tree = ClusterTree::join(&h1.tree, &h2.tree)?;
        let mut nodes = Vec::with_capacity(tree.node_count());
        nodes.push(HssNode {
            u: DenseMatrix::zeros(0, 0),
            v: DenseMatrix::zeros(0, 0),
            d: DenseMatrix::zeros(0, 0),
            s12: DenseMatrix::zeros(0, 0),
            s21: DenseMatrix::zeros(0, 0),
        });
        for l in 0..=h1.depth() {
            let first = (1 << l) - 1;
            let width = 1 << l;
            nodes.extend_from_slice(&h1.nodes[first..first + width]);
            nodes.extend_from_slice(&h2.nodes[first..first + width]);
        }
        Ok(HssMatrix { tree, nodes })
    }

    /// Frobenius norm; exact when all bases are orthonormal.
    fn norm_orthonormal(&self) -> f64 {
        self.nodes
            .iter()
            .map(|nd| nd.d.norm_squared() + nd.s12.norm_squared() + nd.s21.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `H + U X V^T`, recompressed with tolerance `eps` relative to the norm of the sum.
    pub fn add_lowrank(&self, u: &DenseMatrix, x: &DenseMatrix, v: &DenseMatrix, eps: f64) -> Result<HssMatrix> {
        let n = self.n();
        if u.nrows() != n || v.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: "hss_add_lowrank factor rows",
                expected: n,
                found: if u.nrows() != n { u.nrows() } else { v.nrows() },
            });
        }
        if x.shape() != (u.ncols(), v.ncols()) {
            return Err(Error::DimensionMismatch {
                context: "hss_add_lowrank core",
                expected: u.ncols(),
                found: x.nrows(),
            });
        }
        let finite = |m: &DenseMatrix| m.iter().all(|x| x.is_finite());
        if !(finite(u) && finite(x) && finite(v)) {
            return Err(Error::NonFinite("hss_add_lowrank factors"));
        }
        if !self.nodes.iter().all(|nd| [&nd.u, &nd.v, &nd.d, &nd.s12, &nd.s21].into_iter().all(finite)) {
            return Err(Error::NonFinite("hss_add_lowrank operand"));
        }
        let (p, q) = (u.ncols(), v.ncols());
        let mut h = self.clone();
        for id in 0..h.nodes.len() {
            let rg = h.tree.range(id);
            let leaf = h.tree.is_leaf(id);
            let nd = &mut h.nodes[id];
            if leaf {
                let ul = rows(u, rg.clone());
                let vl = rows(v, rg.clone());
                nd.d += &ul * x * vl.transpose();
                if id > 0 {
                    nd.u = hcat(&nd.u, &ul);
                    nd.v = hcat(&nd.v, &vl);
                }
                continue;
            }
            nd.s12 = blkdiag2(&nd.s12, x);
            nd.s21 = blkdiag2(&nd.s21, x);
            let (ka, la) = (self.nodes[c1(id)].u.ncols(), self.nodes[c1(id)].v.ncols());
            nd.u = augment_translation(&nd.u, ka, p, id > 0);
            nd.v = augment_translation(&nd.v, la, q, id > 0);
        }
        h.recompress(eps);
        Ok(h)
    }

    /// Re-orthogonalizes all bases and truncates them with the cutoff
    /// `eps * ||H||_F / sqrt(number of bases)`.
    pub fn recompress(&mut self, eps: f64) {
        if self.depth() == 0 {
            return;
        }
        self.orthogonalize(0);
        let count = self.nodes.len();
        let tol = eps * self.norm_orthonormal() / ((2 * (count - 1)) as f64).sqrt();
        if !tol.is_finite() {
            return;
        }
        self.compress(0, None, None, tol);
    }

    // Returns the triangular factors T with old basis = new basis * T.
    fn orthogonalize(&mut self, id: usize) -> (DenseMatrix, DenseMatrix) {
        if self.tree.is_leaf(id) {
            let (qu, tu) = thin_qr(&self.nodes[id].u);
            let (qv, tv) = thin_qr(&self.nodes[id].v);
            self.nodes[id].u = qu;
            self.nodes[id].v = qv;
            return (tu, tv);
        }
        let (tu1, tv1) = self.orthogonalize(c1(id));
        let (tu2, tv2) = self.orthogonalize(c2(id));
        let nd = &mut self.nodes[id];
        nd.s12 = &tu1 * &nd.s12 * tv2.transpose();
        nd.s21 = &tu2 * &nd.s21 * tv1.transpose();
        let ku1 = tu1.ncols();
        let kv1 = tv1.ncols();
        let u_new = vcat(
            &(&tu1 * nd.u.rows(0, ku1)),
            &(&tu2 * nd.u.rows(ku1, nd.u.nrows() - ku1)),
        );
        let v_new = vcat(
            &(&tv1 * nd.v.rows(0, kv1)),
            &(&tv2 * nd.v.rows(kv1, nd.v.nrows() - kv1)),
        );
        if id == 0 {
            nd.u = u_new;
            nd.v = v_new;
            return (DenseMatrix::zeros(0, 0), DenseMatrix::zeros(0, 0));
        }
        let (qu, tu) = thin_qr(&u_new);
        let (qv, tv) = thin_qr(&v_new);
        nd.u = qu;
        nd.v = qv;
        (tu, tv)
    }

    fn compress(&mut self, id: usize, wu: Option<DenseMatrix>, wv: Option<DenseMatrix>, tol: f64) {
        if self.tree.is_leaf(id) {
            return;
        }
        let (a, b) = (c1(id), c2(id));
        let ka = self.nodes[a].u.ncols();
        let la = self.nodes[a].v.ncols();
        let nd = &self.nodes[id];
        let ru = (nd.u.rows(0, ka).into_owned(), nd.u.rows(ka, nd.u.nrows() - ka).into_owned());
        let rv = (nd.v.rows(0, la).into_owned(), nd.v.rows(la, nd.v.nrows() - la).into_owned());
        let with_parent = |s: DenseMatrix, r: &DenseMatrix, w: &Option<DenseMatrix>| match w {
            Some(w) => hcat(&s, &(r * w)),
            None => s,
        };
        let wu_a = with_parent(nd.s12.clone(), &ru.0, &wu);
        let wu_b = with_parent(nd.s21.clone(), &ru.1, &wu);
        let wv_a = with_parent(nd.s21.transpose(), &rv.0, &wv);
        let wv_b = with_parent(nd.s12.transpose(), &rv.1, &wv);
        let (qu_a, wu_a) = truncate(&wu_a, tol);
        let (qu_b, wu_b) = truncate(&wu_b, tol);
        let (qv_a, wv_a) = truncate(&wv_a, tol);
        let (qv_b, wv_b) = truncate(&wv_b, tol);

        self.nodes[a].u = &self.nodes[a].u * &qu_a;
        self.nodes[b].u = &self.nodes[b].u * &qu_b;
        self.nodes[a].v = &self.nodes[a].v * &qv_a;
        self.nodes[b].v = &self.nodes[b].v * &qv_b;
        let nd = &mut self.nodes[id];
        nd.s12 = qu_a.transpose() * &nd.s12 * &qv_b;
        nd.s21 = qu_b.transpose() * &nd.s21 * &qv_a;
        if id > 0 {
            nd.u = vcat(&(qu_a.transpose() * &ru.0), &(qu_b.transpose() * &ru.1));
            nd.v = vcat(&(qv_a.transpose() * &rv.0), &(qv_b.transpose() * &rv.1));
        } else {
            nd.u = DenseMatrix::zeros(qu_a.ncols() + qu_b.ncols(), 0);
            nd.v = DenseMatrix::zeros(qv_a.ncols() + qv_b.ncols(), 0);
        }
        self.compress(a, Some(wu_a), Some(wv_a), tol);
        self.compress(b, Some(wu_b), Some(wv_b), tol);
    }
}

/// `[[R1, 0], [0, I], [R2, 0], [0, I]]` for an internal node (first child has `k1` columns);
/// the root keeps zero columns.
fn augment_translation(r: &DenseMatrix, k1: usize, p: usize, has_columns: bool) -> DenseMatrix {
    let k = if has_columns { r.ncols() } else { 0 };
    let r1 = r.rows(0, k1);
    let r2 = r.rows(k1, r.nrows() - k1);
    let rows_total = r.nrows() + 2 * p;
    let cols = if has_columns { k + p } else { 0 };
    let mut m = DenseMatrix::zeros(rows_total, cols);
    if has_columns {
        m.view_mut((0, 0), (k1, k)).copy_from(&r1.columns(0, k));
        m.view_mut((k1 + p, 0), (r2.nrows(), k)).copy_from(&r2.columns(0, k));
        for i in 0..p {
            m[(k1 + i, k + i)] = 1.0;
            m[(k1 + p + r2.nrows() + i, k + i)] = 1.0;
        }
    }
    m
}

/// `build_cluster_tree`.
pub fn build_cluster_tree(n: usize, n_min: usize) -> ClusterTree {
    ClusterTree::new(n, n_min)
}

impl From<&HssMatrix> for DMatrix<f64> {
    fn from(h: &HssMatrix) -> Self {
        h.to_dense()
    }
}
