//! Noncommutative polynomials in n formal generators with integer
//! coefficients: the computable stand-in for elements of the full free
//! product algebra. Evaluation substitutes concrete operators for the
//! generators and is a homomorphism on the nose.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linop::LinOp;

/// Canonical form: terms sorted by (word length, word), coefficients merged,
/// zero terms dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NcPoly {
    terms: Vec<(i64, Vec<u8>)>,
}

impl NcPoly {
    pub fn zero() -> Self {
        NcPoly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        NcPoly { terms: vec![(1, Vec::new())] }
    }

    /// The j-th generator (1-based).
    pub fn generator(j: usize) -> Self {
        assert!(j >= 1 && j <= u8::MAX as usize);
        NcPoly { terms: vec![(1, vec![j as u8])] }
    }

    pub fn monomial(coeff: i64, word: &[u8]) -> Self {
        Self::canonical(vec![(coeff, word.to_vec())])
    }

    fn canonical(terms: Vec<(i64, Vec<u8>)>) -> Self {
        Self::canonical_checked(terms).expect("small coefficients cannot overflow")
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> &[(i64, Vec<u8>)] {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.terms.clone();
        out.extend(other.terms.iter().cloned());
        Self::canonical_checked(out)
    }

    fn canonical_checked(mut terms: Vec<(i64, Vec<u8>)>) -> Result<Self> {
        terms.sort_by(|a, b| (a.1.len(), &a.1).cmp(&(b.1.len(), &b.1)));
        let mut merged: Vec<(i64, Vec<u8>)> = Vec::with_capacity(terms.len());
        for (c, w) in terms {
            match merged.last_mut() {
                Some((mc, mw)) if *mw == w => {
                    *mc = mc.checked_add(c).ok_or(Error::Overflow)?;
                }
                _ => merged.push((c, w)),
            }
        }
        merged.retain(|(c, _)| *c != 0);
        Ok(NcPoly { terms: merged })
    }

    pub fn scale(&self, s: i64) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (c, w) in &self.terms {
            out.push((c.checked_mul(s).ok_or(Error::Overflow)?, w.clone()));
        }
        Ok(Self::canonical(out))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, wa) in &self.terms {
            for (cb, wb) in &other.terms {
                let c = ca.checked_mul(*cb).ok_or(Error::Overflow)?;
                let mut w = Vec::with_capacity(wa.len() + wb.len());
                w.extend_from_slice(wa);
                w.extend_from_slice(wb);
                out.push((c, w));
            }
        }
        Self::canonical_checked(out)
    }

    /// Substitutes gens[j-1] for generator j and sums with coefficients.
    pub fn eval(&self, gens: &[LinOp<i64>]) -> Result<LinOp<i64>> {
        let Some(first) = gens.first() else {
            return Err(Error::InvalidParam("eval needs at least one generator".into()));
        };
        let dim = first.nrows();
        let mut acc = LinOp::zeros(dim, dim);
        for (c, w) in &self.terms {
            let mut prod = LinOp::identity(dim);
            for &letter in w {
                let g = gens
                    .get(letter as usize - 1)
                    .ok_or_else(|| Error::InvalidParam(format!("generator {letter} not supplied")))?;
                prod = prod.matmul(g)?;
            }
            acc = acc.add(&prod.scale(*c)?)?;
        }
        Ok(acc)
    }

    /// Seeded random polynomial: up to max_terms monomials of degree at most
    /// max_deg with nonzero coefficients in -3..=3.
    pub fn random(rng: &mut impl Rng, n: usize, max_deg: usize, max_terms: usize) -> Self {
        let t = rng.random_range(1..=max_terms.max(1));
        let mut terms = Vec::with_capacity(t);
        for _ in 0..t {
            let deg = rng.random_range(0..=max_deg);
            let word: Vec<u8> = (0..deg).map(|_| rng.random_range(1..=n as u8)).collect();
            let mut coeff = rng.random_range(-3i64..=3);
            if coeff == 0 {
                coeff = 1;
            }
            terms.push((coeff, word));
        }
        Self::canonical(terms)
    }
}

/// Evaluates the formal product of generator words, used for monomial bases.
pub fn monomial_words(n: usize, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &level {
            for a in 1..=n as u8 {
                let mut v: Vec<u8> = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}
