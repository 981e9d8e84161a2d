//! Compressed sparse row storage for the shared constraint matrix and the
//! sparse-dense products that dominate the solver's runtime.
//!
//! A [`SparseMatrix`] keeps an explicit transpose next to the forward CSR
//! arrays so that both `A X` and `Aᵀ Y` run as row-oriented kernels.
//! Dense blocks are column-major: column `j` holds problem `j`'s vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Columns processed together by the multi-vector kernel.
const KERNEL_COLUMNS: usize = 4;
/// Below this many multiply-adds the product runs on the calling thread.
const PARALLEL_WORK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
struct Csr {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    values: Vec<f64>,
}

impl Csr {
    fn transpose(&self) -> Csr {
        let nnz = self.values.len();
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0u32; nnz];
        let mut values = vec![0.0; nnz];
        for row in 0..self.n_rows {
            for k in self.row_offsets[row]..self.row_offsets[row + 1] {
                let c = self.col_indices[k] as usize;
                let dst = next[c];
                col_indices[dst] = row as u32;
                values[dst] = self.values[k];
                next[c] += 1;
            }
        }
        Csr {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    #[inline]
    fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    fn spmv(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (idx, val) = self.row(i);
            let mut s = 0.0;
            for (&k, &v) in idx.iter().zip(val) {
                s += v * x[k as usize];
            }
            *o = s;
        }
    }

    /// Product for up to `KERNEL_COLUMNS` columns at once. Each output entry is
    /// accumulated in the same order as [`Csr::spmv`], so results are
    /// bit-identical to the single-vector kernel.
    fn spmm_chunk(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n_cols;
        let m = self.n_rows;
        let width = out.len() / m.max(1);
        if m == 0 {
            return;
        }
        if width == KERNEL_COLUMNS {
            let (x0, rest) = x.split_at(n);
            let (x1, rest) = rest.split_at(n);
            let (x2, x3) = rest.split_at(n);
            let (o0, rest) = out.split_at_mut(m);
            let (o1, rest) = rest.split_at_mut(m);
            let (o2, o3) = rest.split_at_mut(m);
            for i in 0..m {
                let (idx, val) = self.row(i);
                let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
                for (&k, &v) in idx.iter().zip(val) {
                    let k = k as usize;
                    s0 += v * x0[k];
                    s1 += v * x1[k];
                    s2 += v * x2[k];
                    s3 += v * x3[k];
                }
                o0[i] = s0;
                o1[i] = s1;
                o2[i] = s2;
                o3[i] = s3;
            }
        } else {
            for (xc, oc) in x.chunks(n.max(1)).zip(out.chunks_mut(m)) {
                self.spmv(xc, oc);
            }
        }
    }
}

/// Sparse matrix in CSR layout with an eagerly built transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    forward: Csr,
    transposed: Csr,
}

/// Which operand of the product to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    /// `A X`
    Plain,
    /// `Aᵀ X`, served by the stored transpose.
    Transpose,
}

impl SparseMatrix {
    /// Builds a CSR matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and entries that end up exactly zero are dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n_rows >= u32::MAX as usize || n_cols >= u32::MAX as usize {
            return Err(Error::DimensionOverflow { n_rows, n_cols });
        }
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::IndexOutOfRange {
                    row: r,
                    col: c,
                    n_rows,
                    n_cols,
                });
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            let (r, c, mut v) = sorted[i];
            i += 1;
            while i < sorted.len() && sorted[i].0 == r && sorted[i].1 == c {
                v += sorted[i].2;
                i += 1;
            }
            if v != 0.0 {
                row_offsets[r + 1] += 1;
                col_indices.push(c as u32);
                values.push(v);
            }
        }
        for r in 0..n_rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        let forward = Csr {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        };
        let transposed = forward.transpose();
        Ok(SparseMatrix { forward, transposed })
    }

    /// Builds from dense row-major rows; handy for small fixtures.
    pub fn from_dense(rows: &[Vec<f64>], n_cols: usize) -> Result<Self> {
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(rows.len(), n_cols, &trip)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self::from_triplets(n_rows, n_cols, &[]).expect("empty matrix is always valid")
    }

    pub fn n_rows(&self) -> usize {
        self.forward.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.forward.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.forward.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.forward.row_offsets
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.forward.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.forward.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        self.forward.row(i)
    }

    /// Row indices and values of column `j` (read from the stored transpose).
    pub fn column(&self, j: usize) -> (&[u32], &[f64]) {
        self.transposed.row(j)
    }

    /// The transpose as a standalone matrix (swaps the two stored halves).
    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix {
            forward: self.transposed.clone(),
            transposed: self.forward.clone(),
        }
    }

    /// Triplets in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            out.extend(idx.iter().zip(val).map(|(&j, &v)| (i, j as usize, v)));
        }
        out
    }

    /// Returns a copy with `row` appended as the last row.
    pub fn with_appended_row(&self, row: &[(usize, f64)]) -> Result<SparseMatrix> {
        let m = self.n_rows();
        let mut trip = self.triplets();
        trip.extend(row.iter().map(|&(j, v)| (m, j, v)));
        SparseMatrix::from_triplets(m + 1, self.n_cols(), &trip)
    }

    /// Euclidean norm of each row.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| self.row(i).1.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    fn csr(&self, op: Op) -> &Csr {
        match op {
            Op::Plain => &self.forward,
            Op::Transpose => &self.transposed,
        }
    }

    /// Output and input lengths of the product under `op`.
    pub fn shape(&self, op: Op) -> (usize, usize) {
        let c = self.csr(op);
        (c.n_rows, c.n_cols)
    }

    /// `out = op(A) x` for a single vector.
    pub fn spmv(&self, op: Op, x: &[f64], out: &mut [f64]) -> Result<()> {
        let csr = self.csr(op);
        if x.len() != csr.n_cols || out.len() != csr.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "spmv: operator is {}x{}, got x of length {} and out of length {}",
                csr.n_rows,
                csr.n_cols,
                x.len(),
                out.len()
            )));
        }
        csr.spmv(x, out);
        Ok(())
    }
}

/// Column-major dense block; column `j` is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseBlock {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseBlock {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_columns(n_rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(n_rows * columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != n_rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has length {}, expected {n_rows}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Ok(DenseBlock {
            n_rows,
            n_cols: columns.len(),
            data,
        })
    }

    pub fn from_column_major(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "block {n_rows}x{n_cols} needs {} values, got {}",
                n_rows * n_cols,
                data.len()
            )));
        }
        Ok(DenseBlock { n_rows, n_cols, data })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Reshapes to an all-zero `n_rows × n_cols` block, reusing the
    /// allocation when it is large enough.
    pub fn reset(&mut self, n_rows: usize, n_cols: usize) {
        self.n_rows = n_rows;
        self.n_cols = n_cols;
        self.data.clear();
        self.data.resize(n_rows * n_cols, 0.0);
    }

    /// Values the current allocation can hold without growing.
    pub fn capacity(&self) -> usize {
        self.data.capacity()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    /// Leading `width` columns as one contiguous slice.
    pub fn leading(&self, width: usize) -> &[f64] {
        &self.data[..width * self.n_rows]
    }

    pub fn leading_mut(&mut self, width: usize) -> &mut [f64] {
        &mut self.data[..width * self.n_rows]
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b || self.n_rows == 0 {
            return;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let m = self.n_rows;
        let (head, tail) = self.data.split_at_mut(hi * m);
        head[lo * m..(lo + 1) * m].swap_with_slice(&mut tail[..m]);
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n_rows.max(1)).take(self.n_cols)
    }
}

/// `out[:, ..active_width] = op(A) x[:, ..active_width]`. Columns at or beyond
/// `active_width` in `out` are left untouched.
pub fn spmm_into(a: &SparseMatrix, x: &DenseBlock, op: Op, active_width: usize, out: &mut DenseBlock) -> Result<()> {
    let csr = a.csr(op);
    if x.n_rows != csr.n_cols || out.n_rows != csr.n_rows {
        return Err(Error::DimensionMismatch(format!(
            "spmm: operator is {}x{}, input block has {} rows, output block has {} rows",
            csr.n_rows, csr.n_cols, x.n_rows, out.n_rows
        )));
    }
    if active_width > x.n_cols || active_width > out.n_cols {
        return Err(Error::DimensionMismatch(format!(
            "spmm: active width {active_width} exceeds block widths {} / {}",
            x.n_cols, out.n_cols
        )));
    }
    if csr.n_rows == 0 || active_width == 0 {
        return Ok(());
    }
    let (m, n) = (csr.n_rows, csr.n_cols);
    let xs = &x.data[..active_width * n];
    let os = &mut out.data[..active_width * m];
    let step_in = KERNEL_COLUMNS * n;
    let step_out = KERNEL_COLUMNS * m;
    if n == 0 {
        os.iter_mut().for_each(|v| *v = 0.0);
    } else if csr.values.len().max(m) * active_width >= PARALLEL_WORK && active_width > KERNEL_COLUMNS {
        os.par_chunks_mut(step_out)
            .zip(xs.par_chunks(step_in))
            .for_each(|(o, xc)| csr.spmm_chunk(xc, o));
    } else {
        for (o, xc) in os.chunks_mut(step_out).zip(xs.chunks(step_in)) {
            csr.spmm_chunk(xc, o);
        }
    }
    Ok(())
}

/// Allocating wrapper around [`spmm_into`] over all columns.
pub fn spmm(a: &SparseMatrix, x: &DenseBlock, op: Op) -> Result<DenseBlock> {
    let (rows, _) = a.shape(op);
    let mut out = DenseBlock::zeros(rows, x.n_cols);
    spmm_into(a, x, op, x.n_cols, &mut out)?;
    Ok(out)
}

/// Inflation applied to the power-iteration estimate of `‖A‖₂`.
pub const NORM_INFLATION: f64 = 1.01;
const NORM_RTOL: f64 = 1e-4;
const NORM_MAX_ITERS: usize = 5000;

/// Upper estimate of the spectral norm, inflated by [`NORM_INFLATION`].
///
/// Power iteration on `AᵀA` runs from the normalized all-ones vector and
/// from a fixed pseudo-random vector; the larger estimate wins. The second
/// start covers matrices for which all-ones is an eigenvector of a smaller
/// singular value. The result is never below the largest row or column norm.
pub fn spectral_norm(a: &SparseMatrix) -> Result<f64> {
    if a.nnz() == 0 {
        return Err(Error::ZeroMatrix);
    }
    let n = a.n_cols();
    let ones = vec![1.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(NORM_SEED);
    let random: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut estimate = power_iteration(a, ones)?.max(power_iteration(a, random)?);
    let row_max = a.row_norms().into_iter().fold(0.0, f64::max);
    let col_max = (0..n)
        .map(|j| a.column(j).1.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    estimate = estimate.max(row_max).max(col_max);
    Ok(estimate * NORM_INFLATION)
}

const NORM_SEED: u64 = 0x5eed;

/// `‖A v‖/‖v‖` after power iteration from `v`; zero when `A v = 0`.
fn power_iteration(a: &SparseMatrix, mut v: Vec<f64>) -> Result<f64> {
    let nv = norm2(&v);
    if nv == 0.0 {
        return Ok(0.0);
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut av = vec![0.0; a.n_rows()];
    a.spmv(Op::Plain, &v, &mut av)?;
    let mut atav = vec![0.0; a.n_cols()];
    let mut estimate = norm2(&av);
    for _ in 0..NORM_MAX_ITERS {
        a.spmv(Op::Transpose, &av, &mut atav)?;
        let nrm = norm2(&atav);
        if nrm == 0.0 {
            break;
        }
        for (vi, wi) in v.iter_mut().zip(&atav) {
            *vi = wi / nrm;
        }
        a.spmv(Op::Plain, &v, &mut av)?;
        let next = norm2(&av);
        let converged = (next - estimate).abs() <= NORM_RTOL * next;
        estimate = next;
        if converged {
            break;
        }
    }
    Ok(estimate)
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
