//! Binary container for [`HssMatrix`].
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      4 bytes  "HSSM"
//! version    u32      1
//! n          u64
//! depth      u32
//! levels     for l in 0..=depth: 2^l + 1 breakpoints, u64 each
//! nodes      in heap order (root 0, children 2i+1, 2i+2); per node the matrices
//!            u, v, d, s12, s21, each as u64 rows, u64 cols, rows*cols f64 row-major
//! ```

use std::io::{Read, Write};

use dcfunm::{ClusterTree, DenseMatrix, HssMatrix, HssNode};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"HSSM";
pub const VERSION: u32 = 1;

pub fn write_hss<W: Write>(mut w: W, h: &HssMatrix) -> CliResult<()> {
    let tree = h.tree();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(h.n() as u64).to_le_bytes())?;
    w.write_all(&(tree.depth() as u32).to_le_bytes())?;
    for l in 0..=tree.depth() {
        for &b in tree.breakpoints(l) {
            w.write_all(&(b as u64).to_le_bytes())?;
        }
    }
    for nd in h.nodes() {
        for m in [&nd.u, &nd.v, &nd.d, &nd.s12, &nd.s21] {
            write_mat(&mut w, m)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_hss<R: Read>(mut r: R) -> CliResult<HssMatrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CliError::input("not an HSS container (bad magic)"));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(CliError::input(format!("unsupported HSS container version {version}")));
    }
    let n = read_u64(&mut r)? as usize;
    let depth = read_u32(&mut r)? as usize;
    if depth > 40 {
        return Err(CliError::input(format!("implausible tree depth {depth}")));
    }
    let mut levels = Vec::with_capacity(depth + 1);
    for l in 0..=depth {
        let bp = (0..(1usize << l) + 1)
            .map(|_| read_u64(&mut r).map(|b| b as usize))
            .collect::<CliResult<Vec<_>>>()?;
        levels.push(bp);
    }
    let tree = ClusterTree::from_breakpoints(levels)?;
    if tree.n() != n {
        return Err(CliError::input("tree size does not match header"));
    }
    let mut nodes = Vec::with_capacity(tree.node_count());
    for _ in 0..tree.node_count() {
        nodes.push(HssNode {
            u: read_mat(&mut r, n)?,
            v: read_mat(&mut r, n)?,
            d: read_mat(&mut r, n)?,
            s12: read_mat(&mut r, n)?,
            s21: read_mat(&mut r, n)?,
        });
    }
    Ok(HssMatrix::from_parts(tree, nodes)?)
}

fn write_mat<W: Write>(w: &mut W, m: &DenseMatrix) -> CliResult<()> {
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_mat<R: Read>(r: &mut R, n: usize) -> CliResult<DenseMatrix> {
    let rows = read_u64(r)? as usize;
    let cols = read_u64(r)? as usize;
    if rows > n || cols > n {
        return Err(CliError::input(format!("block {rows}x{cols} exceeds matrix size {n}")));
    }
    let mut buf = vec![0u8; rows * cols * 8];
    r.read_exact(&mut buf)?;
    let vals = buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    Ok(DenseMatrix::from_row_iterator(rows, cols, vals))
}

fn read_u32<R: Read>(r: &mut R) -> CliResult<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> CliResult<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
