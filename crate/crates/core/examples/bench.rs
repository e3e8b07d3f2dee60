//! Scratch timing harness for the large configuration.

use std::time::Instant;

use fockbench_core::derivation::{build_s, canonical_t0, delta_with};
use fockbench_core::fock::build_basis;
use fockbench_core::linop::{commutator, LinOp};
use fockbench_core::norm::{spectral_norm_opts, NormOptions};

fn main() {
    let t = Instant::now();
    let b = build_basis(3, 5).unwrap();
    println!("basis(3,5): {:?}", t.elapsed());

    let t = Instant::now();
    let s = build_s(&b).unwrap();
    println!("build_s nnz={}: {:?}", s.nnz(), t.elapsed());

    let t = Instant::now();
    let sf = s.to_f64();
    let est = spectral_norm_opts(&sf, &NormOptions::default());
    println!(
        "normS={} resid={:.2e} iters={} conv={}: {:?}",
        est.value, est.residual, est.iterations, est.converged, t.elapsed()
    );

    let t = Instant::now();
    let x1 = b.semicircular_x(1);
    let d1 = delta_with(&b, &x1, &s).unwrap();
    println!("delta(x1) nnz={}: {:?}", d1.nnz(), t.elapsed());

    let t = Instant::now();
    let c = b.compress(&d1, 3).unwrap();
    println!("compress nnz={}: {:?}", c.nnz(), t.elapsed());

    let t = Instant::now();
    let t0 = canonical_t0(&b).unwrap();
    println!("t0 nnz={}: {:?}", t0.nnz(), t.elapsed());

    let t = Instant::now();
    let est = spectral_norm_opts(&t0.to_f64(), &NormOptions::default());
    println!(
        "normT0={} resid={:.2e} iters={} conv={}: {:?}",
        est.value, est.residual, est.iterations, est.converged, t.elapsed()
    );

    let t = Instant::now();
    let eye = LinOp::<f64>::identity(b.dim());
    let rhs = commutator(&x1.to_f64().kron(&eye).unwrap(), &t0.to_f64()).unwrap();
    println!("commutator(x1 (x) I, T0) nnz={}: {:?}", rhs.nnz(), t.elapsed());
}
