//! Exact rank of the linear span of a family of operators.
//!
//! Each operator is flattened to a row vector and reduced by fraction-free
//! elimination. Intermediate values live in arbitrary-precision integers so
//! the cross-multiplication steps cannot overflow; rows are divided by their
//! content after each reduction to keep entries small.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::linop::LinOp;

const MAX_FLAT_LEN: usize = 1 << 22;

/// Dimension of span{ops} over the rationals, exact.
pub fn rank_of_span(ops: &[LinOp<i64>]) -> Result<usize> {
    let Some(first) = ops.first() else {
        return Ok(0);
    };
    let (nr, nc) = (first.nrows(), first.ncols());
    let flat_len = nr
        .checked_mul(nc)
        .filter(|&l| l <= MAX_FLAT_LEN)
        .ok_or_else(|| Error::InvalidParam("rank_of_span: matrices too large to flatten".into()))?;

    // Invariant: every echelon row is zero at every other row's lead column,
    // so one elimination pass per incoming row is complete.
    let mut echelon: Vec<(usize, Vec<BigInt>)> = Vec::new();
    for op in ops {
        if op.nrows() != nr || op.ncols() != nc {
            return Err(Error::DimMismatch("rank_of_span: shapes differ".into()));
        }
        let mut row = vec![BigInt::zero(); flat_len];
        for (r, c, v) in op.iter() {
            row[r * nc + c] = BigInt::from(v);
        }
        for (lead, pivot) in &echelon {
            eliminate(&mut row, *lead, pivot);
        }
        if let Some(lead) = row.iter().position(|x| !x.is_zero()) {
            normalize(&mut row);
            for (_, existing) in echelon.iter_mut() {
                eliminate(existing, lead, &row);
            }
            let at = echelon.partition_point(|(l, _)| *l < lead);
            echelon.insert(at, (lead, row));
        }
    }
    Ok(echelon.len())
}

/// Rank of a single operator as a matrix, by exact elimination on its rows.
/// Zero rows and columns are compacted away first, which matters for the
/// large sparse finite-rank operators this is applied to.
pub fn matrix_rank(op: &LinOp<i64>) -> Result<usize> {
    let mut used_cols: Vec<usize> = op.iter().map(|(_, c, _)| c).collect();
    used_cols.sort_unstable();
    used_cols.dedup();
    if used_cols.is_empty() {
        return Ok(0);
    }
    let col_of = |c: usize| used_cols.binary_search(&c).expect("collected above");

    let mut echelon: Vec<(usize, Vec<BigInt>)> = Vec::new();
    for r in 0..op.nrows() {
        let (cs, vs) = op.row(r);
        if cs.is_empty() {
            continue;
        }
        let mut row = vec![BigInt::zero(); used_cols.len()];
        for (&c, &v) in cs.iter().zip(vs) {
            row[col_of(c)] = BigInt::from(v);
        }
        for (lead, pivot) in &echelon {
            eliminate(&mut row, *lead, pivot);
        }
        if let Some(lead) = row.iter().position(|x| !x.is_zero()) {
            normalize(&mut row);
            for (_, existing) in echelon.iter_mut() {
                eliminate(existing, lead, &row);
            }
            let at = echelon.partition_point(|(l, _)| *l < lead);
            echelon.insert(at, (lead, row));
        }
    }
    Ok(echelon.len())
}

fn eliminate(row: &mut Vec<BigInt>, lead: usize, pivot: &[BigInt]) {
    let coeff = row[lead].clone();
    if coeff.is_zero() {
        return;
    }
    let scale = pivot[lead].clone();
    for (x, p) in row.iter_mut().zip(pivot) {
        *x = &*x * &scale - p * &coeff;
    }
    normalize(row);
}

fn normalize(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for x in row.iter() {
        if !x.is_zero() {
            g = g.gcd(&x.abs());
        }
    }
    if g > BigInt::from(1) {
        for x in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spans_one() {
        assert_eq!(rank_of_span(&[LinOp::identity(4)]).unwrap(), 1);
    }

    #[test]
    fn scalar_multiple_is_dependent() {
        let a = LinOp::from_triplets(2, 2, [(0, 1, 3i64), (1, 0, -2)]).unwrap();
        let b = a.scale(2).unwrap();
        assert_eq!(rank_of_span(&[a, b]).unwrap(), 1);
    }

    #[test]
    fn matrix_units_span_everything() {
        let mut units = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                units.push(LinOp::from_triplets(3, 3, [(r, c, 1i64)]).unwrap());
            }
        }
        assert_eq!(rank_of_span(&units).unwrap(), 9);
    }

    #[test]
    fn dependent_sum_detected() {
        let a = LinOp::from_triplets(2, 2, [(0, 0, 1i64)]).unwrap();
        let b = LinOp::from_triplets(2, 2, [(1, 1, 1i64)]).unwrap();
        let c = a.add(&b).unwrap();
        assert_eq!(rank_of_span(&[a, b, c]).unwrap(), 2);
    }

    #[test]
    fn empty_family() {
        assert_eq!(rank_of_span(&[]).unwrap(), 0);
    }
}
