//! Truncated left/right regular representations of the free group on n
//! generators, the length-increasing/decreasing split of the right
//! generators, and the derivation built from it.
//!
//! Letters are signed: +j is the j-th generator, -j its inverse. Reduced
//! words are ordered by length then lexicographically in the letter order
//! +1 < -1 < +2 < -2 < ...

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fock::WORD_CAP;
use crate::linop::{commutator, LinOp};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct FgBasis {
    n: usize,
    d: usize,
    level_dims: Vec<usize>,
    words: Vec<Vec<i8>>,
    index: HashMap<Vec<i8>, usize>,
}

/// Free reduction: cancels adjacent inverse pairs.
pub fn reduce(word: &[i8]) -> Vec<i8> {
    let mut out: Vec<i8> = Vec::with_capacity(word.len());
    for &a in word {
        if a == 0 {
            continue;
        }
        if out.last() == Some(&-a) {
            out.pop();
        } else {
            out.push(a);
        }
    }
    out
}

fn letter_key(a: i8) -> usize {
    2 * (a.unsigned_abs() as usize - 1) + usize::from(a < 0)
}

pub fn build_fg_basis(n: usize, d: usize) -> Result<FgBasis> {
    FgBasis::with_cap(n, d, WORD_CAP)
}

impl FgBasis {
    pub fn with_cap(n: usize, d: usize, cap: usize) -> Result<Self> {
        if n < 1 || n > 63 {
            return Err(Error::InvalidParam(format!("generator count {n} outside 1..=63")));
        }
        if d < 2 {
            return Err(Error::InvalidParam(format!("depth {d} must be at least 2")));
        }
        let mut letters: Vec<i8> = Vec::with_capacity(2 * n);
        for j in 1..=n as i8 {
            letters.push(j);
            letters.push(-j);
        }
        letters.sort_by_key(|&a| letter_key(a));

        let mut words: Vec<Vec<i8>> = vec![Vec::new()];
        let mut start = 0usize;
        for _ in 1..=d {
            let end = words.len();
            for i in start..end {
                for &a in &letters {
                    if words[i].last() == Some(&-a) {
                        continue;
                    }
                    let mut w = Vec::with_capacity(words[i].len() + 1);
                    w.extend_from_slice(&words[i]);
                    w.push(a);
                    words.push(w);
                    if words.len() > cap {
                        return Err(Error::DimCap { dim: words.len(), cap });
                    }
                }
            }
            start = end;
        }
        let mut level_dims = Vec::with_capacity(d + 1);
        let mut count = 0usize;
        let mut len = 0usize;
        for w in &words {
            while w.len() > len {
                level_dims.push(count);
                len += 1;
            }
            count += 1;
        }
        level_dims.push(count);
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(FgBasis { n, d, level_dims, words, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    /// Number of reduced words of length <= k.
    pub fn level_dim(&self, k: usize) -> usize {
        self.level_dims[k.min(self.d)]
    }

    pub fn word(&self, i: usize) -> &[i8] {
        &self.words[i]
    }

    pub fn words(&self) -> &[Vec<i8>] {
        &self.words
    }

    pub fn index_of(&self, w: &[i8]) -> Option<usize> {
        self.index.get(w).copied()
    }

    fn check_letter(&self, a: i8) -> Result<()> {
        if a == 0 || a.unsigned_abs() as usize > self.n {
            return Err(Error::InvalidParam(format!(
                "letter {a} outside +-1..=+-{}",
                self.n
            )));
        }
        Ok(())
    }

    /// lambda(g_a): e_w -> e_{reduce(a w)}, zero when the result leaves the
    /// truncation.
    pub fn left_regular(&self, a: i8) -> Result<LinOp<i64>> {
        self.check_letter(a)?;
        let mut triplets = Vec::new();
        for (col, w) in self.words.iter().enumerate() {
            let v = if w.first() == Some(&-a) {
                w[1..].to_vec()
            } else {
                let mut v = Vec::with_capacity(w.len() + 1);
                v.push(a);
                v.extend_from_slice(w);
                v
            };
            if let Some(row) = self.index_of(&v) {
                triplets.push((row, col, 1i64));
            }
        }
        LinOp::from_triplets(self.dim(), self.dim(), triplets)
    }

    /// rho(g_a): e_w -> e_{reduce(w a)} with the same truncation.
    pub fn right_regular(&self, a: i8) -> Result<LinOp<i64>> {
        self.check_letter(a)?;
        let mut triplets = Vec::new();
        for (col, w) in self.words.iter().enumerate() {
            let v = if w.last() == Some(&-a) {
                w[..w.len() - 1].to_vec()
            } else {
                let mut v = w.clone();
                v.push(a);
                v
            };
            if let Some(row) = self.index_of(&v) {
                triplets.push((row, col, 1i64));
            }
        }
        LinOp::from_triplets(self.dim(), self.dim(), triplets)
    }

    /// Splits rho(g_j) into the length-increasing branch (acting on words not
    /// ending in the inverse letter) and the length-decreasing rest, so that
    /// a_j + b_j = rho(g_j) exactly.
    pub fn haagerup_split(&self, j: usize) -> Result<(LinOp<i64>, LinOp<i64>)> {
        if j < 1 || j > self.n {
            return Err(Error::InvalidParam(format!("generator {j} outside 1..={}", self.n)));
        }
        let a = j as i8;
        let mut increase = Vec::new();
        let mut decrease = Vec::new();
        for (col, w) in self.words.iter().enumerate() {
            if w.last() == Some(&-a) {
                let row = self.index_of(&w[..w.len() - 1]).expect("shorter word stays inside");
                decrease.push((row, col, 1i64));
            } else if w.len() < self.d {
                let mut v = w.clone();
                v.push(a);
                let row = self.index_of(&v).expect("extension stays within depth");
                increase.push((row, col, 1i64));
            }
        }
        Ok((
            LinOp::from_triplets(self.dim(), self.dim(), increase)?,
            LinOp::from_triplets(self.dim(), self.dim(), decrease)?,
        ))
    }

    /// Same depth-compression dispatch as the Fock basis.
    pub fn compress<S: Scalar>(&self, op: &LinOp<S>, k: usize) -> Result<LinOp<S>> {
        if k > self.d {
            return Err(Error::MarginViolation(format!(
                "compression depth {k} exceeds basis depth {}",
                self.d
            )));
        }
        let dim = self.dim();
        let keep = self.level_dim(k);
        if op.nrows() == dim && op.ncols() == dim {
            op.compress_block(keep)
        } else if op.nrows() == dim * dim && op.ncols() == dim * dim {
            op.tensor_compress(dim, keep)
        } else {
            Err(Error::DimMismatch(format!(
                "compress expects an operator on the space or its tensor square, got {}x{}",
                op.nrows(),
                op.ncols()
            )))
        }
    }
}

/// delta_G(x) = sum_j [x, a_j] (x) lambda(g_j), on the full tensor square.
pub fn delta_g(b: &FgBasis, x: &LinOp<i64>) -> Result<LinOp<i64>> {
    let dim = b.dim();
    if x.nrows() != dim || x.ncols() != dim {
        return Err(Error::DimMismatch(
            "delta_g expects an operator on the truncated space".into(),
        ));
    }
    let mut out = LinOp::zeros(dim * dim, dim * dim);
    for j in 1..=b.n() {
        let (a_j, _) = b.haagerup_split(j)?;
        let lam = b.left_regular(j as i8)?;
        out = out.add(&commutator(&x, &a_j)?.kron(&lam)?)?;
    }
    Ok(out)
}

/// Compressed variant computed per leg: tensor compression factors over the
/// Kronecker product, so this never materializes the full tensor square.
pub fn delta_g_compressed(b: &FgBasis, x: &LinOp<i64>, depth: usize) -> Result<LinOp<i64>> {
    let keep = b.level_dim(depth);
    let mut out = LinOp::zeros(keep * keep, keep * keep);
    for j in 1..=b.n() {
        let (a_j, _) = b.haagerup_split(j)?;
        let lam = b.left_regular(j as i8)?;
        let first = commutator(&x, &a_j)?.compress_block(keep)?;
        let second = lam.compress_block(keep)?;
        out = out.add(&first.kron(&second)?)?;
    }
    Ok(out)
}

pub fn expected_word_count(n: usize, d: usize) -> usize {
    let mut total = 1usize;
    let mut level = 1usize;
    for k in 1..=d {
        level = if k == 1 { 2 * n } else { level * (2 * n - 1) };
        total += level;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_is_idempotent_and_cancels() {
        assert_eq!(reduce(&[1, -1]), Vec::<i8>::new());
        assert_eq!(reduce(&[1, 2, -2, -1, 2]), vec![2]);
        let w = reduce(&[1, 2, -2, 1, 1, -1]);
        assert_eq!(reduce(&w), w);
    }

    #[test]
    fn word_counts_match_formula() {
        for n in 1..=3 {
            for d in 2..=4 {
                let b = build_fg_basis(n, d).unwrap();
                assert_eq!(b.dim(), expected_word_count(n, d), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn left_regular_acts_with_cancellation() {
        let b = build_fg_basis(2, 3).unwrap();
        let lam1 = b.left_regular(1).unwrap();
        // identity -> g1
        assert_eq!(lam1.get(b.index_of(&[1]).unwrap(), 0), 1);
        // g1^{-1} -> identity
        assert_eq!(lam1.get(0, b.index_of(&[-1]).unwrap()), 1);
        // partial isometry up to truncation: lam^T lam is the diagonal
        // projection onto words whose image stays inside
        let q = lam1.transpose().matmul(&lam1).unwrap();
        assert!(q.is_diagonal());
        for (i, w) in b.words().iter().enumerate() {
            let grows = w.first() != Some(&-1);
            let expect = if grows { (w.len() < b.d()) as i64 } else { 1 };
            assert_eq!(q.get(i, i), expect, "word {w:?}");
        }
    }

    #[test]
    fn split_recomposes_and_branches_correctly() {
        let b = build_fg_basis(2, 4).unwrap();
        for j in 1..=2 {
            let (a, bb) = b.haagerup_split(j).unwrap();
            let rho = b.right_regular(j as i8).unwrap();
            assert!(a.add(&bb).unwrap().exact_eq(&rho));
        }
        let (a1, b1) = b.haagerup_split(1).unwrap();
        // identity has no last letter to cancel: a1 e_id = e_(g1), b1 e_id = 0
        assert_eq!(a1.get(b.index_of(&[1]).unwrap(), 0), 1);
        assert!((0..b.dim()).all(|r| b1.get(r, 0) == 0));
        // cancellation branch: b1 e_(g1^{-1}) = e_id
        assert_eq!(b1.get(0, b.index_of(&[-1]).unwrap()), 1);
    }

    #[test]
    fn split_quadratic_sums_are_contractive_diagonals() {
        let b = build_fg_basis(2, 4).unwrap();
        let dim = b.dim();
        let mut row_sum = LinOp::<i64>::zeros(dim, dim);
        let mut col_sum = LinOp::<i64>::zeros(dim, dim);
        let mut row_other = LinOp::<i64>::zeros(dim, dim);
        let mut col_other = LinOp::<i64>::zeros(dim, dim);
        for j in 1..=2 {
            let (a, bb) = b.haagerup_split(j).unwrap();
            row_sum = row_sum.add(&a.matmul(&a.transpose()).unwrap()).unwrap();
            col_sum = col_sum.add(&bb.transpose().matmul(&bb).unwrap()).unwrap();
            row_other = row_other.add(&a.transpose().matmul(&a).unwrap()).unwrap();
            col_other = col_other.add(&bb.matmul(&bb.transpose()).unwrap()).unwrap();
        }
        // the disjoint-support placements are bounded by one
        assert!(row_sum.is_diagonal() && row_sum.max_abs() <= 1.0);
        assert!(col_sum.is_diagonal() && col_sum.max_abs() <= 1.0);
        // the opposite placements overlap at n = 2
        assert!(row_other.max_abs() > 1.0);
        assert!(col_other.max_abs() > 1.0);
    }

    #[test]
    fn left_and_right_actions_commute_after_compression() {
        let b = build_fg_basis(2, 3).unwrap();
        let depth = b.d() - 1;
        for i in [1i8, -1, 2, -2] {
            for j in [1i8, -1, 2, -2] {
                let lam = b.left_regular(i).unwrap();
                let rho = b.right_regular(j).unwrap();
                let c = b.compress(&commutator(&lam, &rho).unwrap(), depth).unwrap();
                assert!(c.is_zero(), "lambda({i}) vs rho({j})");
            }
        }
    }

    #[test]
    fn delta_g_vanishes_on_identity() {
        let b = build_fg_basis(2, 3).unwrap();
        assert!(delta_g(&b, &LinOp::identity(b.dim())).unwrap().is_zero());
    }

    #[test]
    fn delta_g_generator_image_support_and_rank() {
        // golden ranks derived with an independent dense implementation
        let golden: &[(usize, usize, usize)] = &[(1, 4, 4), (2, 4, 8), (3, 4, 12), (1, 5, 6)];
        for &(n, d, want) in golden {
            let b = build_fg_basis(n, d).unwrap();
            let depth = d - 2;
            for k in 1..=n {
                let lam = b.left_regular(k as i8).unwrap();
                let img = delta_g_compressed(&b, &lam, depth).unwrap();
                // first-leg support on words of length <= 1
                let keep = b.level_dim(depth);
                let lvl1 = b.level_dim(1);
                for (r, c, _) in img.iter() {
                    assert!(r / keep < lvl1, "row leg outside depth 1");
                    assert!(c / keep < lvl1, "col leg outside depth 1");
                }
                let rank = crate::rank::matrix_rank(&img).unwrap();
                assert_eq!(rank, want, "n={n} d={d} k={k}");
            }
        }
    }

    #[test]
    fn compressed_delta_matches_full_delta() {
        let b = build_fg_basis(2, 3).unwrap();
        let lam = b.left_regular(1).unwrap();
        let full = delta_g(&b, &lam).unwrap();
        let depth = 1;
        let via_full = b.compress(&full, depth).unwrap();
        let via_legs = delta_g_compressed(&b, &lam, depth).unwrap();
        assert!(via_full.exact_eq(&via_legs));
    }

    #[test]
    fn delta_g_satisfies_leibniz_exactly() {
        use rand::Rng;
        use rand::SeedableRng;
        let b = build_fg_basis(2, 4).unwrap();
        let dim = b.dim();
        let eye = LinOp::<i64>::identity(dim);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let letters = [1i8, -1, 2, -2];
        for _ in 0..10 {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
                let len = rng.random_range(1..=3usize);
                let mut m = LinOp::<i64>::identity(dim);
                for _ in 0..len {
                    let a = letters[rng.random_range(0..letters.len())];
                    m = m.matmul(&b.left_regular(a).unwrap()).unwrap();
                }
                m
            };
            let x = pick(&mut rng);
            let y = pick(&mut rng);
            let lhs = delta_g(&b, &x.matmul(&y).unwrap()).unwrap();
            let rhs = x
                .kron(&eye)
                .unwrap()
                .matmul(&delta_g(&b, &y).unwrap())
                .unwrap()
                .add(&delta_g(&b, &x).unwrap().matmul(&y.kron(&eye).unwrap()).unwrap())
                .unwrap();
            let depth = b.d() - 1;
            assert!(b
                .compress(&lhs, depth)
                .unwrap()
                .exact_eq(&b.compress(&rhs, depth).unwrap()));
        }
    }

    #[test]
    fn generator_images_stay_below_split_bound() {
        for n in 1..=2 {
            let b = build_fg_basis(n, 4).unwrap();
            for k in 1..=n {
                let lam = b.left_regular(k as i8).unwrap();
                let img = delta_g_compressed(&b, &lam, 2).unwrap();
                let est = crate::norm::spectral_norm(&img, 1e-10);
                assert!(est.value <= 2.0 + 1e-9, "n={n} k={k}: {}", est.value);
            }
        }
    }
}
