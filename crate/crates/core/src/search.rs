//! Adversarial norm minimization over commutant perturbations of the
//! canonical intertwiner: random multistart plus per-coordinate
//! golden-section refinement, reported against the sqrt(n)/4 floor.
//!
//! The search family is T0 + sum_w c_w (word_w(y) (x) 1): perturbing by the
//! commutant keeps every candidate a solution of the derivation equation, so
//! the probe stays inside the hypothesis class of the bound.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::derivation::{build_s, canonical_t0, delta_with};
use crate::error::{Error, Result};
use crate::fock::FockBasis;
use crate::linop::{linear_combination, LinOp};
use crate::norm::{spectral_norm_opts, NormOptions};
use crate::poly::monomial_words;

const GOLDEN_RATIO: f64 = 1.618033988749895;

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub trials: usize,
    pub restarts: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// Perturbation degree; defaults to the largest value allowed by the
    /// exactness precondition, floor((d - 2) / 2).
    pub degree: Option<usize>,
    /// Residual tolerance for screening evaluations during the search.
    pub screen_tol: f64,
    /// Residual tolerance for the final reported value.
    pub final_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            trials: 500,
            restarts: 3,
            sweeps: 20,
            seed: 42,
            degree: None,
            screen_tol: 1e-6,
            final_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchReport {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub restarts: usize,
    pub seed: u64,
    pub degree: usize,
    pub best_value: f64,
    /// sqrt(n) / 4
    pub bound: f64,
    pub margin: f64,
    pub best_coefficients: Vec<f64>,
    pub best_trial: usize,
    /// max_k ||compress(delta(x_k))|| / (2 ||x_k||), a cheap lower bound on
    /// any admissible candidate.
    pub floor: f64,
    pub converged: bool,
}

pub fn max_degree(b: &FockBasis) -> usize {
    (b.d().saturating_sub(2)) / 2
}

/// Words of length <= degree in the commutant generators y_j, evaluated and
/// tensored with the identity on the second leg.
pub fn commutant_directions(b: &FockBasis, degree: usize) -> Result<Vec<LinOp<f64>>> {
    if degree > max_degree(b) {
        return Err(Error::InvalidParam(format!(
            "perturbation degree {degree} exceeds (d-2)/2 = {}",
            max_degree(b)
        )));
    }
    let y: Vec<_> = (1..=b.n()).map(|j| b.semicircular_y(j)).collect();
    let eye = LinOp::<i64>::identity(b.dim());
    let mut out = Vec::new();
    for word in monomial_words(b.n(), degree) {
        let mut m = LinOp::identity(b.dim());
        for &letter in &word {
            m = m.matmul(&y[letter as usize - 1])?;
        }
        out.push(m.kron(&eye)?.to_f64());
    }
    Ok(out)
}

/// One random element of the perturbation family, coefficients uniform in
/// [-1, 1] from the seeded generator.
pub fn sample_commutant(b: &FockBasis, degree: usize, seed: u64) -> Result<LinOp<f64>> {
    let dirs = commutant_directions(b, degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..dirs.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let terms: Vec<(f64, &LinOp<f64>)> = coeffs.into_iter().zip(dirs.iter()).collect();
    linear_combination(&terms)
}

/// Exact-mode variant with small integer coefficients, for the identity
/// tests of the search family.
pub fn sample_commutant_exact(b: &FockBasis, degree: usize, seed: u64) -> Result<LinOp<i64>> {
    let y: Vec<_> = (1..=b.n()).map(|j| b.semicircular_y(j)).collect();
    let eye = LinOp::<i64>::identity(b.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LinOp::zeros(b.dim() * b.dim(), b.dim() * b.dim());
    for word in monomial_words(b.n(), degree.min(max_degree(b))) {
        let mut m = LinOp::identity(b.dim());
        for &letter in &word {
            m = m.matmul(&y[letter as usize - 1])?;
        }
        let c: i64 = rng.random_range(-2..=2);
        out = out.add(&m.kron(&eye)?.scale(c)?)?;
    }
    Ok(out)
}

fn candidate_norm(
    t0: &LinOp<f64>,
    dirs: &[LinOp<f64>],
    coeffs: &[f64],
    opts: &NormOptions,
) -> f64 {
    let mut terms: Vec<(f64, &LinOp<f64>)> = vec![(1.0, t0)];
    terms.extend(coeffs.iter().copied().zip(dirs.iter()));
    let t = linear_combination(&terms).expect("matching shapes");
    spectral_norm_opts(&t, opts).value
}

pub fn minimize_norm(b: &FockBasis, opts: &SearchOptions) -> Result<SearchReport> {
    if opts.trials < 1 {
        return Err(Error::InvalidParam("trials must be at least 1".into()));
    }
    let degree = opts.degree.unwrap_or_else(|| max_degree(b)).min(max_degree(b));
    let dirs = commutant_directions(b, degree)?;
    let t0 = canonical_t0(b)?.to_f64();
    let screen = NormOptions { tol: opts.screen_tol, max_iters: 4000, ..NormOptions::default() };
    let tight = NormOptions { tol: opts.final_tol, ..NormOptions::default() };

    // Trial 0 is always the unperturbed intertwiner.
    let trials: Vec<(f64, usize, Vec<f64>)> = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let coeffs: Vec<f64> = if trial == 0 {
                vec![0.0; dirs.len()]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    opts.seed ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
                );
                (0..dirs.len()).map(|_| rng.random_range(-1.0..=1.0)).collect()
            };
            let value = candidate_norm(&t0, &dirs, &coeffs, &screen);
            (value, trial, coeffs)
        })
        .collect();

    let mut ranked = trials;
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));

    let mut best = ranked[0].clone();
    for start in ranked.iter().take(opts.restarts.max(1)) {
        let mut coeffs = start.2.clone();
        let mut value = start.0;
        for _ in 0..opts.sweeps {
            let before = value;
            for i in 0..coeffs.len() {
                let (c, v) = golden_section(
                    |c| {
                        let mut probe = coeffs.clone();
                        probe[i] = c;
                        candidate_norm(&t0, &dirs, &probe, &screen)
                    },
                    coeffs[i] - 1.0,
                    coeffs[i] + 1.0,
                    24,
                );
                if v < value {
                    coeffs[i] = c;
                    value = v;
                }
            }
            if before - value < 1e-10 {
                break;
            }
        }
        if value < best.0 {
            best = (value, start.1, coeffs);
        }
    }

    // Re-evaluate the winner at the tight tolerance.
    let final_est = {
        let mut terms: Vec<(f64, &LinOp<f64>)> = vec![(1.0, &t0)];
        terms.extend(best.2.iter().copied().zip(dirs.iter()));
        spectral_norm_opts(&linear_combination(&terms)?, &tight)
    };

    let s = build_s(b)?;
    let mut floor = 0.0f64;
    for k in 1..=b.n() {
        let xk = b.semicircular_x(k);
        let dk = b.compress(&delta_with(b, &xk, &s)?, b.d() - 2)?;
        let num = spectral_norm_opts(&dk.to_f64(), &screen).value;
        let den = 2.0 * spectral_norm_opts(&xk.to_f64(), &screen).value;
        floor = floor.max(num / den);
    }

    let bound = (b.n() as f64).sqrt() / 4.0;
    Ok(SearchReport {
        n: b.n(),
        d: b.d(),
        trials: opts.trials,
        restarts: opts.restarts,
        seed: opts.seed,
        degree,
        best_value: final_est.value,
        bound,
        margin: final_est.value - bound,
        best_coefficients: best.2,
        best_trial: best.1,
        floor,
        converged: final_est.converged,
    })
}

/// Golden-section line search for a unimodal (here: convex) function.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = 1.0 / GOLDEN_RATIO;
    let mut x1 = hi - (hi - lo) * inv_phi;
    let mut x2 = lo + (hi - lo) * inv_phi;
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * inv_phi;
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * inv_phi;
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
