//! The tensor-square operator S, the inner derivation it implements, the
//! coefficient extraction from intertwiners, the inequality chain, the
//! two-by-two homomorphism, and amplified norm sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::linop::{commutator, LinOp};
use crate::norm::{spectral_norm_opts, NormOptions};
use crate::poly::{monomial_words, NcPoly};
use crate::rank::rank_of_span;
use crate::scalar::Scalar;

/// S = sum_j ( -r_j (x) l_j^T + r_j^T (x) l_j ), antisymmetric by
/// construction, with norm at most 2.
pub fn build_s(b: &FockBasis) -> Result<LinOp<i64>> {
    let dim = b.dim();
    let mut s = LinOp::zeros(dim * dim, dim * dim);
    for j in 1..=b.n() {
        let l = b.left_creation(j);
        let r = b.right_creation(j);
        let neg = r.kron(&l.transpose())?.neg()?;
        let pos = r.transpose().kron(&l)?;
        s = s.add(&neg)?.add(&pos)?;
    }
    Ok(s)
}

/// delta(x) = [x (x) 1, S] for a given S (avoids rebuilding S in loops).
pub fn delta_with(b: &FockBasis, x: &LinOp<i64>, s: &LinOp<i64>) -> Result<LinOp<i64>> {
    let xi = x.kron(&LinOp::identity(b.dim()))?;
    commutator(&xi, s)
}

/// delta(x) = [x (x) 1, S].
pub fn delta(b: &FockBasis, x: &LinOp<i64>) -> Result<LinOp<i64>> {
    delta_with(b, x, &build_s(b)?)
}

/// T0 = sum_j r_j^T (x) x_j; satisfies delta(x) = [x (x) 1, T0] after
/// compression for every x in the generated algebra.
pub fn canonical_t0(b: &FockBasis) -> Result<LinOp<i64>> {
    let dim = b.dim();
    let mut t = LinOp::zeros(dim * dim, dim * dim);
    for j in 1..=b.n() {
        let r = b.right_creation(j);
        let x = b.semicircular_x(j);
        t = t.add(&r.transpose().kron(&x)?)?;
    }
    Ok(t)
}

/// Exact compressed Leibniz identity
/// delta(pq) = delta(p)(q (x) 1) + (p (x) 1) delta(q).
pub fn leibniz_check(b: &FockBasis, p: &NcPoly, q: &NcPoly, margin: usize) -> Result<bool> {
    if p.degree() + q.degree() + 2 > b.d() - margin {
        return Err(Error::MarginViolation(format!(
            "degrees {}+{}+2 exceed depth {} minus margin {margin}",
            p.degree(),
            q.degree(),
            b.d()
        )));
    }
    let s = build_s(b)?;
    let gens: Vec<_> = (1..=b.n()).map(|j| b.semicircular_x(j)).collect();
    let eye = LinOp::identity(b.dim());
    let pe = p.eval(&gens)?;
    let qe = q.eval(&gens)?;
    let lhs = delta_with(b, &pe.matmul(&qe)?, &s)?;
    let rhs = delta_with(b, &pe, &s)?
        .matmul(&qe.kron(&eye)?)?
        .add(&pe.kron(&eye)?.matmul(&delta_with(b, &qe, &s)?)?)?;
    let depth = b.d() - margin;
    Ok(b.compress(&lhs, depth)?.exact_eq(&b.compress(&rhs, depth)?))
}

/// Projection of M onto the span of the generators, computed through the
/// vacuum pairing: the vectors x_j vac = e_(j) are orthonormal, so
/// P(a) = sum_j <e_(j), a vac> x_j needs no Gram correction.
pub fn range_projection_p(b: &FockBasis, a: &LinOp<i64>) -> Result<LinOp<i64>> {
    if a.nrows() != b.dim() || a.ncols() != b.dim() {
        return Err(Error::DimMismatch("range projection expects an operator on H".into()));
    }
    let mut out = LinOp::zeros(b.dim(), b.dim());
    for j in 1..=b.n() {
        let coeff = a.get(j, 0);
        if coeff != 0 {
            out = out.add(&b.semicircular_x(j).scale(coeff)?)?;
        }
    }
    Ok(out)
}

/// Partial contraction z_j(a,b) = <e_a (x) e_(j), T (e_b (x) vac)>.
pub fn extract_z<S: Scalar>(b: &FockBasis, t: &LinOp<S>) -> Result<Vec<LinOp<S>>> {
    let dim = b.dim();
    if t.nrows() != dim * dim || t.ncols() != dim * dim {
        return Err(Error::DimMismatch("extract_z expects an operator on H tensor H".into()));
    }
    let mut triplets: Vec<Vec<(usize, usize, S)>> = vec![Vec::new(); b.n()];
    for (row, col, v) in t.iter() {
        if col % dim != 0 {
            continue;
        }
        let second = row % dim;
        if second >= 1 && second <= b.n() {
            triplets[second - 1].push((row / dim, col / dim, v));
        }
    }
    triplets
        .into_iter()
        .map(|t| LinOp::from_triplets(dim, dim, t))
        .collect()
}

/// The extracted coefficient family with its quadratic-sum norms.
#[derive(Debug, Clone)]
pub struct ZFamily {
    pub z: Vec<LinOp<f64>>,
    /// ||sum z_j z_j^T||^(1/2)
    pub row_norm: f64,
    /// ||sum z_j^T z_j||^(1/2)
    pub col_norm: f64,
    /// ||sum z_j (x) x_j||
    pub t1_norm: f64,
    /// Both quadratic sums were diagonal, so row/col norms are exact.
    pub diagonal_exact: bool,
}

pub fn z_family(b: &FockBasis, t: &LinOp<f64>, opts: &NormOptions) -> Result<ZFamily> {
    let z = extract_z(b, t)?;
    let dim = b.dim();
    let mut row_sum = LinOp::<f64>::zeros(dim, dim);
    let mut col_sum = LinOp::<f64>::zeros(dim, dim);
    let mut t1 = LinOp::<f64>::zeros(dim * dim, dim * dim);
    for (j, zj) in z.iter().enumerate() {
        let zt = zj.transpose();
        row_sum = row_sum.add(&zj.matmul(&zt)?)?;
        col_sum = col_sum.add(&zt.matmul(zj)?)?;
        t1 = t1.add(&zj.kron(&b.semicircular_x(j + 1).to_f64())?)?;
    }
    let diagonal_exact = row_sum.is_diagonal() && col_sum.is_diagonal();
    let sq_norm = |m: &LinOp<f64>| -> f64 {
        if m.is_diagonal() {
            m.max_abs()
        } else {
            spectral_norm_opts(m, opts).value
        }
    };
    Ok(ZFamily {
        row_norm: sq_norm(&row_sum).sqrt(),
        col_norm: sq_norm(&col_sum).sqrt(),
        t1_norm: spectral_norm_opts(&t1, opts).value,
        diagonal_exact,
        z,
    })
}

/// One evaluation of the inequality chain
/// sqrt(n) <= rowNorm + colNorm <= 2 ||T1|| <= 4 ||T||.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainReport {
    pub n: usize,
    pub d: usize,
    pub sqrt_n: f64,
    pub row_norm: f64,
    pub col_norm: f64,
    pub sum_of_roots: f64,
    pub t1_norm: f64,
    pub t_norm: f64,
    /// max entry of the compressed difference delta(x_k) - [x_k (x) 1, T]
    pub derivation_residual: f64,
    pub derivation_ok: bool,
    pub diagonal_exact: bool,
    pub links_hold: [bool; 3],
    /// rhs - lhs per link
    pub margins: [f64; 3],
}

pub fn chain_eval(b: &FockBasis, t: &LinOp<f64>, link_tol: f64) -> Result<ChainReport> {
    let opts = NormOptions::default();
    let eye = LinOp::<f64>::identity(b.dim());
    let s = build_s(b)?;
    let mut derivation_residual = 0.0f64;
    let depth = b.d() - 2;
    for k in 1..=b.n() {
        let xk = b.semicircular_x(k);
        let lhs = delta_with(b, &xk, &s)?.to_f64();
        let rhs = commutator(&xk.to_f64().kron(&eye)?, t)?;
        let diff = b.compress(&lhs.sub(&rhs)?, depth)?;
        derivation_residual = derivation_residual.max(diff.max_abs());
    }
    let fam = z_family(b, t, &opts)?;
    let t_norm = spectral_norm_opts(t, &opts).value;
    let sqrt_n = (b.n() as f64).sqrt();
    let sum_of_roots = fam.row_norm + fam.col_norm;
    let margins = [
        sum_of_roots - sqrt_n,
        2.0 * fam.t1_norm - sum_of_roots,
        4.0 * t_norm - 2.0 * fam.t1_norm,
    ];
    Ok(ChainReport {
        n: b.n(),
        d: b.d(),
        sqrt_n,
        row_norm: fam.row_norm,
        col_norm: fam.col_norm,
        sum_of_roots,
        t1_norm: fam.t1_norm,
        t_norm,
        derivation_residual,
        derivation_ok: derivation_residual <= link_tol.max(1e-9),
        diagonal_exact: fam.diagonal_exact,
        links_hold: margins.map(|m| m >= -link_tol),
        margins,
    })
}

/// Rank of span{ compress(pi(a) P_vac pi(b), margin) } over words a, b in the
/// generators of length <= word_len. Since P_vac is rank one, each product is
/// the outer product (pi(a) vac)(pi(b)^T vac)^T.
pub fn generation_rank(b: &FockBasis, word_len: usize, margin: usize) -> Result<usize> {
    if word_len > margin {
        return Err(Error::InvalidParam(format!(
            "word length {word_len} exceeds margin {margin}"
        )));
    }
    if margin > b.d() {
        return Err(Error::MarginViolation(format!(
            "margin {margin} exceeds depth {}",
            b.d()
        )));
    }
    let gens: Vec<_> = (1..=b.n()).map(|j| b.semicircular_x(j)).collect();
    let keep = b.level_dim(margin);
    let words = monomial_words(b.n(), word_len);
    let mut vectors: Vec<Vec<i64>> = Vec::with_capacity(words.len());
    for w in &words {
        let mut v = b.vacuum_vector();
        for &letter in w.iter().rev() {
            v = gens[letter as usize - 1].apply(&v)?;
        }
        v.truncate(keep);
        vectors.push(v);
    }
    let mut products = Vec::with_capacity(vectors.len() * vectors.len());
    for va in &vectors {
        for vb in &vectors {
            let mut triplets = Vec::new();
            for (r, &x) in va.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (c, &y) in vb.iter().enumerate() {
                    if y != 0 {
                        triplets.push((r, c, x.checked_mul(y).ok_or(Error::Overflow)?));
                    }
                }
            }
            products.push(LinOp::from_triplets(keep, keep, triplets)?);
        }
    }
    rank_of_span(&products)
}

/// Upper-triangular 2x2 block operator with pi(p) (x) 1 on the diagonal and
/// delta(pi(p)) in the corner.
pub fn build_u(b: &FockBasis, p: &NcPoly) -> Result<LinOp<i64>> {
    let gens: Vec<_> = (1..=b.n()).map(|j| b.semicircular_x(j)).collect();
    u_of_operator(b, &p.eval(&gens)?, &build_s(b)?)
}

pub fn u_of_operator(b: &FockBasis, x: &LinOp<i64>, s: &LinOp<i64>) -> Result<LinOp<i64>> {
    let diag = x.kron(&LinOp::identity(b.dim()))?;
    let corner = commutator(&diag, s)?;
    let d2 = b.dim() * b.dim();
    LinOp::assemble_blocks(2, 2, d2, d2, &[(0, 0, &diag), (0, 1, &corner), (1, 1, &diag)])
}

/// Compression for the 2x2 block operators: compresses each tensor-square
/// block on both legs and reassembles.
pub fn compress_u<S: Scalar>(b: &FockBasis, a: &LinOp<S>, depth: usize) -> Result<LinOp<S>> {
    let d2 = b.dim() * b.dim();
    if a.nrows() != 2 * d2 || a.ncols() != 2 * d2 {
        return Err(Error::DimMismatch("compress_u expects a 2x2 block operator".into()));
    }
    let keep = b.level_dim(depth);
    let mut blocks = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            blocks.push(((i, j), a.block(i, j, d2, d2)?.tensor_compress(b.dim(), keep)?));
        }
    }
    let refs: Vec<(usize, usize, &LinOp<S>)> =
        blocks.iter().map(|((i, j), op)| (*i, *j, op)).collect();
    LinOp::assemble_blocks(2, 2, keep * keep, keep * keep, &refs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbMap {
    Delta,
    U,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CbSample {
    pub map: String,
    pub amplification: usize,
    pub trials: usize,
    pub max_ratio: f64,
    pub argmax_trial: usize,
}

/// Lower bound on the cb norm at amplification level k: the maximum of
/// ||(id_k (x) map)(X)|| / ||X|| over seeded random block matrices X whose
/// blocks are images of degree-bounded polynomials.
pub fn cb_lower_sample(
    b: &FockBasis,
    map: CbMap,
    k: usize,
    trials: usize,
    seed: u64,
    max_deg: usize,
) -> Result<CbSample> {
    if k == 0 || k > 4 {
        return Err(Error::InvalidParam(format!("amplification level {k} outside 1..=4")));
    }
    let gens: Vec<_> = (1..=b.n()).map(|j| b.semicircular_x(j)).collect();
    let s = build_s(b)?;
    // ratio precision far below the 0.05 acceptance slack
    let opts = NormOptions { tol: 1e-5, max_iters: 4000, ..NormOptions::default() };
    let dim = b.dim();
    let results: Result<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (trial as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            );
            let mut plain = Vec::new();
            let mut mapped = Vec::new();
            for i in 0..k {
                for j in 0..k {
                    let p = NcPoly::random(&mut rng, b.n(), max_deg, 4);
                    let px = p.eval(&gens)?;
                    let img = match map {
                        CbMap::Delta => delta_with(b, &px, &s)?,
                        CbMap::U => u_of_operator(b, &px, &s)?,
                    };
                    plain.push((i, j, px));
                    mapped.push((i, j, img));
                }
            }
            let plain_refs: Vec<(usize, usize, &LinOp<i64>)> =
                plain.iter().map(|(i, j, m)| (*i, *j, m)).collect();
            let mapped_dim = mapped[0].2.nrows();
            let mapped_refs: Vec<(usize, usize, &LinOp<i64>)> =
                mapped.iter().map(|(i, j, m)| (*i, *j, m)).collect();
            let x = LinOp::assemble_blocks(k, k, dim, dim, &plain_refs)?;
            let y = LinOp::assemble_blocks(k, k, mapped_dim, mapped_dim, &mapped_refs)?;
            let nx = spectral_norm_opts(&x.to_f64(), &opts).value;
            if nx < 1e-9 {
                return Ok(0.0);
            }
            Ok(spectral_norm_opts(&y.to_f64(), &opts).value / nx)
        })
        .collect();
    let ratios = results?;
    let (argmax, max_ratio) = ratios
        .iter()
        .enumerate()
        .fold((0usize, 0.0f64), |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc });
    Ok(CbSample {
        map: match map {
            CbMap::Delta => "delta".into(),
            CbMap::U => "u".into(),
        },
        amplification: k,
        trials,
        max_ratio,
        argmax_trial: argmax,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarityBound {
    /// n^(1/4) / 2: lower bound on ||S|| ||S^-1|| for any similarity
    /// implementing a *-homomorphism.
    pub condition_number_lower: f64,
    /// sqrt(n) / 4: lower bound on the squared cb norm of any lifting.
    pub cb_lifting_sq_lower: f64,
}

/// Pure arithmetic on a chain report whose links hold.
pub fn similarity_bound(report: &ChainReport) -> SimilarityBound {
    let n = report.n as f64;
    SimilarityBound {
        condition_number_lower: n.powf(0.25) / 2.0,
        cb_lifting_sq_lower: n.sqrt() / 4.0,
    }
}
