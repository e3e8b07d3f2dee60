//! Sparse linear operators over a dual scalar mode (exact `i64` / `f64`).
//!
//! Storage is compressed sparse row in canonical form: column indices sorted
//! within each row, no duplicates, no stored zeros. Canonical form makes the
//! derived equality entrywise equality, which is what `exact_eq` needs.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LinOp<S: Scalar> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<S>,
}

impl<S: Scalar> LinOp<S> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        LinOp {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        LinOp {
            nrows: dim,
            ncols: dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![S::ONE; dim],
        }
    }

    pub fn from_diag(diag: &[S]) -> Self {
        let dim = diag.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, &v) in diag.iter().enumerate() {
            if !v.is_zero() {
                cols.push(i);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        LinOp { nrows: dim, ncols: dim, row_ptr, cols, vals }
    }

    /// Builds from (row, col, value) triplets; duplicate positions are summed
    /// with checked arithmetic and zero results are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, S)>,
    ) -> Result<Self> {
        let mut t: Vec<(usize, usize, S)> = triplets.into_iter().collect();
        for &(r, c, _) in &t {
            if r >= nrows || c >= ncols {
                return Err(Error::DimMismatch(format!(
                    "triplet ({r},{c}) outside {nrows}x{ncols}"
                )));
            }
        }
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<S> = Vec::with_capacity(t.len());
        let mut i = 0;
        while i < t.len() {
            let (r, c, mut v) = t[i];
            i += 1;
            while i < t.len() && t[i].0 == r && t[i].1 == c {
                v = v.add_checked(t[i].2)?;
                i += 1;
            }
            if !v.is_zero() {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(LinOp { nrows, ncols, row_ptr, cols, vals })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.cols[lo..hi].binary_search(&col) {
            Ok(k) => self.vals[lo + k],
            Err(_) => S::ZERO,
        }
    }

    /// Iterates entries as (row, col, value), row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn row(&self, r: usize) -> (&[usize], &[S]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    /// Adjoint: all constructed operators are real in the word basis.
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![S::ZERO; self.nnz()];
        let mut next = counts.clone();
        for (r, c, v) in self.iter() {
            let k = next[c];
            cols[k] = r;
            vals[k] = v;
            next[c] += 1;
        }
        LinOp {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            cols,
            vals,
        }
    }

    pub fn scale(&self, s: S) -> Result<Self> {
        if s.is_zero() {
            return Ok(Self::zeros(self.nrows, self.ncols));
        }
        let mut out = self.clone();
        for v in &mut out.vals {
            *v = v.mul_checked(s)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Result<Self> {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v = v.neg_checked()?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimMismatch(format!(
                "add {}x{} with {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::with_capacity(self.nnz() + other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = other.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                let (c, v) = if j >= cb.len() || (i < ca.len() && ca[i] < cb[j]) {
                    let out = (ca[i], va[i]);
                    i += 1;
                    out
                } else if i >= ca.len() || cb[j] < ca[i] {
                    let out = (cb[j], vb[j]);
                    j += 1;
                    out
                } else {
                    let out = (ca[i], va[i].add_checked(vb[j])?);
                    i += 1;
                    j += 1;
                    out
                };
                if !v.is_zero() {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        Ok(LinOp { nrows: self.nrows, ncols: self.ncols, row_ptr, cols, vals })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg()?)
    }

    /// Sparse matrix product with a dense per-row accumulator.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimMismatch(format!(
                "matmul {}x{} with {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let ncols = other.ncols;
        let mut acc: Vec<S> = vec![S::ZERO; ncols];
        let mut stamp: Vec<u64> = vec![0; ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.nrows {
            let generation = r as u64 + 1;
            touched.clear();
            let (ca, va) = self.row(r);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&c, &b) in cb.iter().zip(vb) {
                    if stamp[c] != generation {
                        stamp[c] = generation;
                        acc[c] = S::ZERO;
                        touched.push(c);
                    }
                    acc[c] = acc[c].add_checked(a.mul_checked(b)?)?;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if !acc[c].is_zero() {
                    cols.push(c);
                    vals.push(acc[c]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        Ok(LinOp { nrows: self.nrows, ncols, row_ptr, cols, vals })
    }

    /// Kronecker product with first-leg-major indexing:
    /// index(v, w) = idx(v) * dim2 + idx(w).
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let nrows = self
            .nrows
            .checked_mul(other.nrows)
            .ok_or_else(|| Error::InvalidParam("kron dimensions overflow".into()))?;
        let ncols = self
            .ncols
            .checked_mul(other.ncols)
            .ok_or_else(|| Error::InvalidParam("kron dimensions overflow".into()))?;
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut cols = Vec::with_capacity(self.nnz() * other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() * other.nnz());
        for ra in 0..self.nrows {
            let (ca, va) = self.row(ra);
            for rb in 0..other.nrows {
                let (cb, vb) = other.row(rb);
                if !ca.is_empty() && !cb.is_empty() {
                    for (&c1, &v1) in ca.iter().zip(va) {
                        for (&c2, &v2) in cb.iter().zip(vb) {
                            cols.push(c1 * other.ncols + c2);
                            vals.push(v1.mul_checked(v2)?);
                        }
                    }
                }
                row_ptr[ra * other.nrows + rb + 1] = cols.len();
            }
        }
        Ok(LinOp { nrows, ncols, row_ptr, cols, vals })
    }

    /// Leading k-by-k principal block. The word bases are ordered by length,
    /// so this is exactly the depth compression Q_k A Q_k restricted to the
    /// depth sub-basis.
    pub fn compress_block(&self, keep: usize) -> Result<Self> {
        if keep > self.nrows || keep > self.ncols {
            return Err(Error::DimMismatch(format!(
                "block of {keep} from {}x{}",
                self.nrows, self.ncols
            )));
        }
        let mut row_ptr = vec![0usize; keep + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..keep {
            let (ca, va) = self.row(r);
            for (&c, &v) in ca.iter().zip(va) {
                if c < keep {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        Ok(LinOp { nrows: keep, ncols: keep, row_ptr, cols, vals })
    }

    /// Depth compression for operators on a tensor square: keeps index pairs
    /// (a, b) with a, b < keep and remaps (a, b) to a * keep + b.
    pub fn tensor_compress(&self, outer: usize, keep: usize) -> Result<Self> {
        let dim2 = outer * outer;
        if self.nrows != dim2 || self.ncols != dim2 {
            return Err(Error::DimMismatch(format!(
                "tensor_compress expects {dim2}x{dim2}, got {}x{}",
                self.nrows, self.ncols
            )));
        }
        if keep > outer {
            return Err(Error::DimMismatch(format!("keep {keep} > outer {outer}")));
        }
        let mut triplets = Vec::new();
        for (r, c, v) in self.iter() {
            let (ra, rb) = (r / outer, r % outer);
            if ra >= keep || rb >= keep {
                continue;
            }
            let (ca, cb) = (c / outer, c % outer);
            if ca >= keep || cb >= keep {
                continue;
            }
            triplets.push((ra * keep + rb, ca * keep + cb, v));
        }
        Self::from_triplets(keep * keep, keep * keep, triplets)
    }

    /// Extracts the (br, bc) block of an operator laid out on a grid of
    /// rdim-by-cdim blocks.
    pub fn block(&self, br: usize, bc: usize, rdim: usize, cdim: usize) -> Result<Self> {
        let (r0, c0) = (br * rdim, bc * cdim);
        if r0 + rdim > self.nrows || c0 + cdim > self.ncols {
            return Err(Error::DimMismatch(format!(
                "block ({br},{bc}) of size {rdim}x{cdim} outside {}x{}",
                self.nrows, self.ncols
            )));
        }
        let mut row_ptr = vec![0usize; rdim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..rdim {
            let (ca, va) = self.row(r0 + r);
            let lo = ca.partition_point(|&c| c < c0);
            let hi = ca.partition_point(|&c| c < c0 + cdim);
            for k in lo..hi {
                cols.push(ca[k] - c0);
                vals.push(va[k]);
            }
            row_ptr[r + 1] = cols.len();
        }
        Ok(LinOp { nrows: rdim, ncols: cdim, row_ptr, cols, vals })
    }

    /// Assembles a block matrix from equally-sized blocks placed on a
    /// (block_rows x block_cols) grid.
    pub fn assemble_blocks(
        block_rows: usize,
        block_cols: usize,
        rdim: usize,
        cdim: usize,
        blocks: &[(usize, usize, &LinOp<S>)],
    ) -> Result<Self> {
        let mut triplets = Vec::new();
        for &(br, bc, op) in blocks {
            if br >= block_rows || bc >= block_cols {
                return Err(Error::DimMismatch(format!("block ({br},{bc}) outside grid")));
            }
            if op.nrows != rdim || op.ncols != cdim {
                return Err(Error::DimMismatch(format!(
                    "block ({br},{bc}) is {}x{}, expected {rdim}x{cdim}",
                    op.nrows, op.ncols
                )));
            }
            for (r, c, v) in op.iter() {
                triplets.push((br * rdim + r, bc * cdim + c, v));
            }
        }
        Self::from_triplets(block_rows * rdim, block_cols * cdim, triplets)
    }

    /// Checked matrix-vector product (used for exact vacuum moments).
    pub fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.ncols {
            return Err(Error::DimMismatch(format!(
                "apply {}x{} to vector of length {}",
                self.nrows,
                self.ncols,
                x.len()
            )));
        }
        let mut y = vec![S::ZERO; self.nrows];
        for (r, c, v) in self.iter() {
            y[r] = y[r].add_checked(v.mul_checked(x[c])?)?;
        }
        Ok(y)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r == c)
    }

    pub fn diagonal(&self) -> Vec<S> {
        let dim = self.nrows.min(self.ncols);
        (0..dim).map(|i| self.get(i, i)).collect()
    }

    pub fn to_f64(&self) -> LinOp<f64> {
        LinOp {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: self.vals.iter().map(|v| v.to_f64()).collect(),
        }
    }
}

impl LinOp<i64> {
    /// Entrywise equality in exact mode. Canonical storage makes this a
    /// structural comparison; differing shapes are simply unequal.
    pub fn exact_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl LinOp<f64> {
    /// y = A x without allocation; f64 only, used by the norm engine.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        y.fill(0.0);
        for r in 0..self.nrows {
            let (cs, vs) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cs.iter().zip(vs) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
    }
}

/// Bracket [A, B] = BA - AB for square operators of equal dimension.
///
/// This is the sign convention under which the commutation table of the
/// creators reads [l_k, r_k^T] = P_vac and the derivation takes the
/// generators to +P_vac (x) x_k; the opposite convention flips both signs.
pub fn commutator<S: Scalar>(a: &LinOp<S>, b: &LinOp<S>) -> Result<LinOp<S>> {
    if !a.is_square() || !b.is_square() || a.nrows() != b.nrows() {
        return Err(Error::DimMismatch(format!(
            "commutator of {}x{} with {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    b.matmul(a)?.sub(&a.matmul(b)?)
}

/// Forms sum_i coeff_i * ops_i in float mode (search candidates).
pub fn linear_combination(terms: &[(f64, &LinOp<f64>)]) -> Result<LinOp<f64>> {
    let Some(&(_, first)) = terms.first() else {
        return Err(Error::InvalidParam("empty linear combination".into()));
    };
    let (nr, nc) = (first.nrows(), first.ncols());
    let mut triplets = Vec::new();
    for &(coeff, op) in terms {
        if op.nrows() != nr || op.ncols() != nc {
            return Err(Error::DimMismatch("linear combination shapes differ".into()));
        }
        if coeff == 0.0 {
            continue;
        }
        triplets.extend(op.iter().map(|(r, c, v)| (r, c, coeff * v)));
    }
    LinOp::from_triplets(nr, nc, triplets)
}
