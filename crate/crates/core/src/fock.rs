//! Truncated full Fock space: word enumeration and the generating operators.
//!
//! The basis consists of all words over {1..n} of length at most d, ordered
//! by length then lexicographically, with the empty (vacuum) word first.
//! Every infinite-dimensional operator X is represented by its truncation
//! Q_d X Q_d; identities built from m length-changing factors are asserted
//! only after compressing to depth d - m, below which truncation artifacts
//! are provably absent.

use crate::error::{Error, Result};
use crate::linop::LinOp;
use crate::scalar::Scalar;

/// Hard cap on the number of enumerated words.
pub const WORD_CAP: usize = 2_000_000;

#[derive(Debug, Clone)]
pub struct FockBasis {
    n: usize,
    d: usize,
    /// level_dims[k] = number of words of length <= k.
    level_dims: Vec<usize>,
    words: Vec<Vec<u8>>,
}

/// Enumerates the truncated basis. Deterministic; length-then-lex order.
pub fn build_basis(n: usize, d: usize) -> Result<FockBasis> {
    FockBasis::with_cap(n, d, WORD_CAP)
}

impl FockBasis {
    pub fn with_cap(n: usize, d: usize, cap: usize) -> Result<Self> {
        if n < 1 || n > 120 {
            return Err(Error::InvalidParam(format!("letter count {n} outside 1..=120")));
        }
        if d < 2 {
            return Err(Error::InvalidParam(format!("depth {d} must be at least 2")));
        }
        let mut level_dims = vec![1usize];
        let mut dim = 1usize;
        let mut level = 1usize;
        for _ in 1..=d {
            level = level.checked_mul(n).ok_or(Error::DimCap { dim: usize::MAX, cap })?;
            dim = dim.checked_add(level).ok_or(Error::DimCap { dim: usize::MAX, cap })?;
            if dim > cap {
                return Err(Error::DimCap { dim, cap });
            }
            level_dims.push(dim);
        }
        let mut words: Vec<Vec<u8>> = Vec::with_capacity(dim);
        words.push(Vec::new());
        let mut start = 0usize;
        for _ in 1..=d {
            let end = words.len();
            for i in start..end {
                for a in 1..=n as u8 {
                    let mut w = Vec::with_capacity(words[i].len() + 1);
                    w.extend_from_slice(&words[i]);
                    w.push(a);
                    words.push(w);
                }
            }
            start = end;
        }
        Ok(FockBasis { n, d, level_dims, words })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        *self.level_dims.last().unwrap()
    }

    /// Number of words of length <= k.
    pub fn level_dim(&self, k: usize) -> usize {
        self.level_dims[k.min(self.d)]
    }

    pub fn word(&self, index: usize) -> &[u8] {
        &self.words[index]
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    /// Position of a word in the enumeration, or None if it is too long or
    /// uses letters outside 1..=n.
    pub fn index_of(&self, word: &[u8]) -> Option<usize> {
        if word.len() > self.d || word.iter().any(|&a| a == 0 || a as usize > self.n) {
            return None;
        }
        let offset = if word.is_empty() { 0 } else { self.level_dims[word.len() - 1] };
        let mut within = 0usize;
        for &a in word {
            within = within * self.n + (a as usize - 1);
        }
        Some(offset + within)
    }

    /// e_w -> e_{jw}, zero on words of maximal length.
    pub fn left_creation(&self, j: usize) -> LinOp<i64> {
        self.creation(j, true)
    }

    /// e_w -> e_{wj}, zero on words of maximal length.
    pub fn right_creation(&self, j: usize) -> LinOp<i64> {
        self.creation(j, false)
    }

    fn creation(&self, j: usize, left: bool) -> LinOp<i64> {
        assert!(j >= 1 && j <= self.n, "letter {j} outside 1..={}", self.n);
        let mut triplets = Vec::with_capacity(self.level_dim(self.d - 1));
        for (col, w) in self.words.iter().enumerate() {
            if w.len() == self.d {
                break;
            }
            let mut longer = Vec::with_capacity(w.len() + 1);
            if left {
                longer.push(j as u8);
                longer.extend_from_slice(w);
            } else {
                longer.extend_from_slice(w);
                longer.push(j as u8);
            }
            let row = self.index_of(&longer).expect("extension stays within depth");
            triplets.push((row, col, 1i64));
        }
        LinOp::from_triplets(self.dim(), self.dim(), triplets).expect("0/1 entries cannot overflow")
    }

    /// Free semicircular generator x_j = l_j + l_j^T.
    pub fn semicircular_x(&self, j: usize) -> LinOp<i64> {
        let l = self.left_creation(j);
        l.add(&l.transpose()).expect("0/1 supports are disjoint")
    }

    /// Commutant generator y_j = r_j + r_j^T.
    pub fn semicircular_y(&self, j: usize) -> LinOp<i64> {
        let r = self.right_creation(j);
        r.add(&r.transpose()).expect("0/1 supports are disjoint")
    }

    /// Diagonal projection onto words of length <= k.
    pub fn level_projection(&self, k: usize) -> LinOp<i64> {
        assert!(k <= self.d);
        let keep = self.level_dim(k);
        let mut diag = vec![0i64; self.dim()];
        for e in diag.iter_mut().take(keep) {
            *e = 1;
        }
        LinOp::from_diag(&diag)
    }

    /// Rank-one projection onto the vacuum.
    pub fn vacuum_projection(&self) -> LinOp<i64> {
        self.level_projection(0)
    }

    pub fn vacuum_vector(&self) -> Vec<i64> {
        let mut v = vec![0i64; self.dim()];
        v[0] = 1;
        v
    }

    /// Q_k A Q_k restricted to the depth-k sub-basis. Operators on H are
    /// compressed to the leading block; operators on the tensor square are
    /// compressed on each leg.
    pub fn compress<S: Scalar>(&self, a: &LinOp<S>, k: usize) -> Result<LinOp<S>> {
        if k > self.d {
            return Err(Error::MarginViolation(format!(
                "compression depth {k} exceeds basis depth {}",
                self.d
            )));
        }
        let dim = self.dim();
        let keep = self.level_dim(k);
        if a.nrows() == dim && a.ncols() == dim {
            a.compress_block(keep)
        } else if a.nrows() == dim * dim && a.ncols() == dim * dim {
            a.tensor_compress(dim, keep)
        } else {
            Err(Error::DimMismatch(format!(
                "compress expects an operator on H or on H tensor H, got {}x{}",
                a.nrows(),
                a.ncols()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::commutator;

    #[test]
    fn basis_dimensions() {
        assert_eq!(build_basis(2, 3).unwrap().dim(), 15);
        assert_eq!(build_basis(1, 5).unwrap().dim(), 6);
        assert_eq!(build_basis(3, 5).unwrap().dim(), 364);
    }

    #[test]
    fn enumeration_is_length_lex_and_indexable() {
        let b = build_basis(2, 3).unwrap();
        assert_eq!(b.word(0), &[] as &[u8]);
        assert_eq!(b.word(1), &[1]);
        assert_eq!(b.word(2), &[2]);
        assert_eq!(b.word(3), &[1, 1]);
        assert_eq!(b.word(6), &[2, 2]);
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.word(i)), Some(i));
        }
        assert_eq!(b.index_of(&[1, 1, 1, 1]), None);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        assert!(matches!(
            FockBasis::with_cap(3, 5, 100),
            Err(Error::DimCap { .. })
        ));
    }

    #[test]
    fn creators_act_as_expected() {
        let b = build_basis(2, 3).unwrap();
        let l1 = b.left_creation(1);
        let r2 = b.right_creation(2);
        // l1 e_vac = e_(1)
        assert_eq!(l1.get(b.index_of(&[1]).unwrap(), 0), 1);
        // r2 e_(1) = e_(12)
        assert_eq!(
            r2.get(b.index_of(&[1, 2]).unwrap(), b.index_of(&[1]).unwrap()),
            1
        );
        // truncation: maximal words map to zero
        let top = b.index_of(&[2, 2, 2]).unwrap();
        assert!((0..b.dim()).all(|r| l1.get(r, top) == 0));
    }

    #[test]
    fn annihilator_is_transpose_of_prepend() {
        let b = build_basis(2, 3).unwrap();
        let l1t = b.left_creation(1).transpose();
        let l2t = b.left_creation(2).transpose();
        let w21 = b.index_of(&[2, 1]).unwrap();
        // l1^T e_(21) = 0, l2^T e_(21) = e_(1)
        assert!((0..b.dim()).all(|r| l1t.get(r, w21) == 0));
        assert_eq!(l2t.get(b.index_of(&[1]).unwrap(), w21), 1);
    }

    #[test]
    fn semicircular_cube_on_vacuum() {
        // x1^3 vac = e_(111) + 2 e_(1): the vacuum-side coefficient 2 is the
        // second Catalan number
        let b = build_basis(1, 3).unwrap();
        let x = b.semicircular_x(1);
        let v = x
            .apply(&x.apply(&x.apply(&b.vacuum_vector()).unwrap()).unwrap())
            .unwrap();
        let mut expected = vec![0i64; b.dim()];
        expected[b.index_of(&[1, 1, 1]).unwrap()] = 1;
        expected[b.index_of(&[1]).unwrap()] = 2;
        assert_eq!(v, expected);
    }

    #[test]
    fn level_projection_trace() {
        let b = build_basis(3, 4).unwrap();
        for k in 0..=4 {
            let p = b.level_projection(k);
            let tr: i64 = p.diagonal().iter().sum();
            assert_eq!(tr as usize, b.level_dim(k));
        }
        assert!(b.level_projection(4).exact_eq(&LinOp::identity(b.dim())));
        assert_eq!(b.vacuum_projection().nnz(), 1);
    }

    #[test]
    fn creation_row_sums_are_projections() {
        // sum_j l_j l_j^T = projection onto nonempty words, exactly; same for r
        for (n, d) in [(1, 3), (2, 3), (3, 4)] {
            let b = build_basis(n, d).unwrap();
            let mut suml = LinOp::zeros(b.dim(), b.dim());
            let mut sumr = LinOp::zeros(b.dim(), b.dim());
            for j in 1..=n {
                let l = b.left_creation(j);
                let r = b.right_creation(j);
                suml = suml.add(&l.matmul(&l.transpose()).unwrap()).unwrap();
                sumr = sumr.add(&r.matmul(&r.transpose()).unwrap()).unwrap();
            }
            let nonempty = b
                .level_projection(d)
                .sub(&b.vacuum_projection())
                .unwrap();
            assert!(suml.exact_eq(&nonempty));
            assert!(sumr.exact_eq(&nonempty));
        }
    }

    #[test]
    fn isometry_up_to_truncation() {
        // l_j^T l_k = delta_jk Q_{d-1}
        let b = build_basis(2, 4).unwrap();
        for j in 1..=2 {
            for k in 1..=2 {
                let prod = b
                    .left_creation(j)
                    .transpose()
                    .matmul(&b.left_creation(k))
                    .unwrap();
                if j == k {
                    assert!(prod.exact_eq(&b.level_projection(3)));
                } else {
                    assert!(prod.is_zero());
                }
            }
        }
    }

    #[test]
    fn commutator_table_compressed_margin_one() {
        let b = build_basis(2, 3).unwrap();
        let depth = b.d() - 1;
        let p_vac = b.compress(&b.vacuum_projection(), depth).unwrap();
        for k in 1..=2 {
            for j in 1..=2 {
                let l = b.left_creation(k);
                let r = b.right_creation(j);
                let lr = b.compress(&commutator(&l, &r).unwrap(), depth).unwrap();
                let ltrt = b
                    .compress(&commutator(&l.transpose(), &r.transpose()).unwrap(), depth)
                    .unwrap();
                let lrt = b
                    .compress(&commutator(&l, &r.transpose()).unwrap(), depth)
                    .unwrap();
                assert!(lr.is_zero());
                assert!(ltrt.is_zero());
                if k == j {
                    assert!(lrt.exact_eq(&p_vac));
                } else {
                    assert!(lrt.is_zero());
                }
            }
        }
    }

    #[test]
    fn product_recomputed_at_larger_depth_matches_after_compression() {
        let (n, d) = (2, 3);
        let b = build_basis(n, d).unwrap();
        let big = build_basis(n, d + 2).unwrap();
        let x1x2 = b.semicircular_x(1).matmul(&b.semicircular_x(2)).unwrap();
        let recomputed = big
            .semicircular_x(1)
            .matmul(&big.semicircular_x(2))
            .unwrap();
        let compressed = big.compress(&recomputed, d).unwrap();
        assert!(x1x2.sub(&compressed).unwrap().is_zero());
    }

    #[test]
    fn tracial_vector_property_for_commutant_words() {
        // |w vac| = |w^T vac| exactly for words in the y_j
        let b = build_basis(2, 6).unwrap();
        let y: Vec<_> = (1..=2).map(|j| b.semicircular_y(j)).collect();
        let words: &[&[usize]] = &[&[1], &[1, 2], &[2, 1, 1], &[1, 2, 2], &[2, 2, 1]];
        for w in words {
            let mut fwd = b.vacuum_vector();
            let mut rev = b.vacuum_vector();
            for &j in w.iter().rev() {
                fwd = y[j - 1].apply(&fwd).unwrap();
            }
            for &j in w.iter() {
                rev = y[j - 1].apply(&rev).unwrap();
            }
            let n2 = |v: &[i64]| v.iter().map(|x| x * x).sum::<i64>();
            assert_eq!(n2(&fwd), n2(&rev));
            // vacuum moment equals the reversed-word moment
            assert_eq!(fwd[0], rev[0]);
        }
    }
}
