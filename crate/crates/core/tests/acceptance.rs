//! Acceptance suite: one criterion per section, each printing a pass/fail
//! line. Runs sequentially inside a single test so the wall-clock criteria
//! are measured without interference.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fockbench_core::checks::{reports_to_json, run_checks, RunConfig};
use fockbench_core::derivation::{
    build_s, canonical_t0, cb_lower_sample, chain_eval, compress_u, delta_with, extract_z,
    generation_rank, leibniz_check, u_of_operator, CbMap,
};
use fockbench_core::fock::build_basis;
use fockbench_core::freegroup::{build_fg_basis, expected_word_count};
use fockbench_core::linop::{commutator, LinOp};
use fockbench_core::norm::{spectral_norm_opts, NormMethod, NormOptions};
use fockbench_core::poly::NcPoly;
use fockbench_core::search::{minimize_norm, SearchOptions};

struct Criterion {
    label: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn run(label: &'static str, f: impl FnOnce() -> (bool, String)) -> Criterion {
    let start = Instant::now();
    let (pass, detail) = f();
    let seconds = start.elapsed().as_secs_f64();
    let c = Criterion { label, pass, detail, seconds };
    println!(
        "criterion {:<24} {} ({:.1}s) {}",
        c.label,
        if c.pass { "PASS" } else { "FAIL" },
        c.seconds,
        c.detail
    );
    c
}

fn commutator_table() -> (bool, String) {
    let start = Instant::now();
    let mut ok = true;
    for n in 1..=4 {
        for d in 3..=5 {
            let b = build_basis(n, d).unwrap();
            let depth = d - 1;
            let p_vac = b.compress(&b.vacuum_projection(), depth).unwrap();
            for k in 1..=n {
                for j in 1..=n {
                    let l = b.left_creation(k);
                    let r = b.right_creation(j);
                    ok &= b.compress(&commutator(&l, &r).unwrap(), depth).unwrap().is_zero();
                    ok &= b
                        .compress(&commutator(&l.transpose(), &r.transpose()).unwrap(), depth)
                        .unwrap()
                        .is_zero();
                    let lrt = b.compress(&commutator(&l, &r.transpose()).unwrap(), depth).unwrap();
                    ok &= if k == j { lrt.exact_eq(&p_vac) } else { lrt.is_zero() };
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    (ok && elapsed < 10.0, format!("grid {{1..4}}x{{3..5}}, {elapsed:.2}s of 10s budget"))
}

fn delta_on_generators() -> (bool, String) {
    let start = Instant::now();
    let mut ok = true;
    for n in 1..=3 {
        for d in 3..=5 {
            let b = build_basis(n, d).unwrap();
            let s = build_s(&b).unwrap();
            let depth = d - 2;
            for k in 1..=n {
                let xk = b.semicircular_x(k);
                let lhs = b.compress(&delta_with(&b, &xk, &s).unwrap(), depth).unwrap();
                let rhs = b
                    .compress(&b.vacuum_projection().kron(&xk).unwrap(), depth)
                    .unwrap();
                ok &= lhs.exact_eq(&rhs);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    (ok && elapsed < 30.0, format!("n<=3, d<=5, {elapsed:.2}s of 30s budget"))
}

fn s_bounds() -> (bool, String) {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (n, d) in [(1, 3), (1, 5), (2, 3), (2, 4), (2, 5), (3, 3), (3, 4), (4, 3)] {
        let b = build_basis(n, d).unwrap();
        let est = spectral_norm_opts(&build_s(&b).unwrap().to_f64(), &NormOptions::default());
        ok &= est.converged && est.value <= 2.0 + 1e-9;
        worst = worst.max(est.value);

        let mut row_sum = LinOp::<i64>::zeros(b.dim(), b.dim());
        for j in 1..=n {
            let l = b.left_creation(j);
            row_sum = row_sum.add(&l.matmul(&l.transpose()).unwrap()).unwrap();
        }
        let nonempty = b.level_projection(d).sub(&b.vacuum_projection()).unwrap();
        ok &= row_sum.exact_eq(&nonempty);
    }
    (ok, format!("max ||S|| = {worst:.12} <= 2+1e-9; creator row sums exactly 1"))
}

fn chain_on_t0() -> (bool, String) {
    let mut ok = true;
    let mut detail = String::new();
    for n in 1..=5 {
        let b = build_basis(n, 4).unwrap();
        let t0 = canonical_t0(&b).unwrap();
        // extracted, not hand-fed
        let z = extract_z(&b, &t0).unwrap();
        for (j, zj) in z.iter().enumerate() {
            ok &= zj.exact_eq(&b.right_creation(j + 1).transpose());
        }
        let mut row = LinOp::<i64>::zeros(b.dim(), b.dim());
        let mut col = LinOp::<i64>::zeros(b.dim(), b.dim());
        for zj in &z {
            row = row.add(&zj.matmul(&zj.transpose()).unwrap()).unwrap();
            col = col.add(&zj.transpose().matmul(zj).unwrap()).unwrap();
        }
        ok &= row.exact_eq(&b.level_projection(3).scale(n as i64).unwrap());
        ok &= col.exact_eq(&b.level_projection(4).sub(&b.vacuum_projection()).unwrap());

        let rep = chain_eval(&b, &t0.to_f64(), 1e-8).unwrap();
        ok &= rep.links_hold.iter().all(|&x| x) && rep.margins.iter().all(|&m| m >= -1e-8);
        ok &= rep.derivation_ok;
        if n == 5 {
            detail = format!(
                "n=5: sqrtN={:.6} sum={:.6} 2T1={:.6} 4T={:.6}",
                rep.sqrt_n,
                rep.sum_of_roots,
                2.0 * rep.t1_norm,
                4.0 * rep.t_norm
            );
        }
    }
    (ok, detail)
}

fn leibniz_and_u_mult() -> (bool, String) {
    let b = build_basis(2, 6).unwrap();
    let s = build_s(&b).unwrap();
    let gens: Vec<_> = (1..=2).map(|j| b.semicircular_x(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = 0usize;
    for _ in 0..200 {
        let p = NcPoly::random(&mut rng, 2, 2, 3);
        let q = NcPoly::random(&mut rng, 2, 2, 3);
        if !leibniz_check(&b, &p, &q, 0).unwrap() {
            failures += 1;
        }
        let pe = p.eval(&gens).unwrap();
        let qe = q.eval(&gens).unwrap();
        let upq = u_of_operator(&b, &pe.matmul(&qe).unwrap(), &s).unwrap();
        let prod = u_of_operator(&b, &pe, &s)
            .unwrap()
            .matmul(&u_of_operator(&b, &qe, &s).unwrap())
            .unwrap();
        if !compress_u(&b, &upq, b.d())
            .unwrap()
            .exact_eq(&compress_u(&b, &prod, b.d()).unwrap())
        {
            failures += 1;
        }
    }
    (failures == 0, format!("200 pairs at n=2, d=6, {failures} failures"))
}

fn cb_sampling() -> (bool, String) {
    let b = build_basis(2, 5).unwrap();
    let mut ok = true;
    let mut max_delta: f64 = 0.0;
    let mut max_u: f64 = 0.0;
    for k in 1..=3 {
        let ds = cb_lower_sample(&b, CbMap::Delta, k, 100, 42, 3).unwrap();
        let us = cb_lower_sample(&b, CbMap::U, k, 100, 42, 3).unwrap();
        max_delta = max_delta.max(ds.max_ratio);
        max_u = max_u.max(us.max_ratio);
        ok &= ds.max_ratio <= 2.0 + 0.05 && us.max_ratio <= 3.0 + 0.05;
    }
    (ok, format!("delta max {max_delta:.4} <= 2.05, u max {max_u:.4} <= 3.05"))
}

fn generation_ranks() -> (bool, String) {
    let b2 = build_basis(2, 3).unwrap();
    let r1 = generation_rank(&b2, 1, 1).unwrap();
    let b3 = build_basis(3, 4).unwrap();
    let r2 = generation_rank(&b3, 2, 2).unwrap();
    (r1 == 9 && r2 == 169, format!("rank(2,1,1)={r1} want 9; rank(3,2,2)={r2} want 169"))
}

fn search_floor() -> (bool, String) {
    let mut ok = true;
    let mut detail = String::new();
    for n in 1..=4 {
        let b = build_basis(n, 3).unwrap();
        let opts = SearchOptions { trials: 500, seed: 42, ..SearchOptions::default() };
        let rep = minimize_norm(&b, &opts).unwrap();
        let bound = (n as f64).sqrt() / 4.0;
        ok &= rep.best_value >= bound - 1e-9;
        ok &= (rep.margin - (rep.best_value - rep.bound)).abs() < 1e-12;
        detail.push_str(&format!("n={n}: {:.4}>={:.4} ", rep.best_value, bound));
    }
    (ok, detail)
}

fn free_group() -> (bool, String) {
    let mut ok = true;
    for n in 1..=3 {
        for d in 2..=4 {
            let fg = build_fg_basis(n, d).unwrap();
            ok &= fg.dim() == expected_word_count(n, d);
            let dim = fg.dim();
            let mut row = LinOp::<i64>::zeros(dim, dim);
            let mut col = LinOp::<i64>::zeros(dim, dim);
            for j in 1..=n {
                let (a, b) = fg.haagerup_split(j).unwrap();
                ok &= a.add(&b).unwrap().exact_eq(&fg.right_regular(j as i8).unwrap());
                row = row.add(&a.matmul(&a.transpose()).unwrap()).unwrap();
                col = col.add(&b.transpose().matmul(&b).unwrap()).unwrap();
            }
            ok &= row.is_diagonal() && row.max_abs() <= 1.0;
            ok &= col.is_diagonal() && col.max_abs() <= 1.0;
        }
    }
    // trace identity on 100 random commutant words
    let b = build_basis(2, 6).unwrap();
    let ys: Vec<_> = (1..=2).map(|j| b.semicircular_y(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let len = rng.random_range(1..=2usize);
        let word: Vec<usize> = (0..len).map(|_| rng.random_range(1..=2)).collect();
        let mut fwd = b.vacuum_vector();
        for &j in word.iter().rev() {
            fwd = ys[j - 1].apply(&fwd).unwrap();
        }
        let mut rev = b.vacuum_vector();
        for &j in word.iter() {
            rev = ys[j - 1].apply(&rev).unwrap();
        }
        let sq = |v: &[i64]| v.iter().map(|x| x * x).sum::<i64>();
        ok &= sq(&fwd) == sq(&rev);
    }
    (ok, "counts, split, contractive sums, trace identity".into())
}

fn performance() -> (bool, String) {
    // power iteration for ||S|| at n=3, d=5 within 60 s at residual 1e-10
    let b = build_basis(3, 5).unwrap();
    let s = build_s(&b).unwrap().to_f64();
    let start = Instant::now();
    let est = spectral_norm_opts(&s, &NormOptions::default());
    let s_secs = start.elapsed().as_secs_f64();
    let s_ok = est.converged
        && est.residual <= 1e-10
        && est.method == NormMethod::PowerIteration
        && s_secs < 60.0;

    // full default suite single-threaded within 120 s
    let cfg = RunConfig { n: 3, d: 5, threads: 1, ..RunConfig::default() };
    let start = Instant::now();
    let reports = run_checks(&cfg).unwrap();
    let suite_secs = start.elapsed().as_secs_f64();
    let all_pass = reports.iter().all(|r| r.pass);
    (
        s_ok && all_pass && suite_secs < 120.0,
        format!(
            "||S||={:.9} residual={:.2e} in {s_secs:.1}s; suite {} checks in {suite_secs:.1}s (all pass: {all_pass})",
            est.value, est.residual, reports.len()
        ),
    )
}

fn determinism() -> (bool, String) {
    let cfg = RunConfig { n: 2, d: 4, threads: 2, ..RunConfig::default() };
    let normalized = |cfg: &RunConfig| {
        let mut reports = run_checks(cfg).unwrap();
        for r in &mut reports {
            r.wall_millis = 0;
        }
        reports_to_json(&reports)
    };
    let a = normalized(&cfg);
    let b = normalized(&cfg);
    (a == b, format!("{} bytes, byte-identical modulo wall clock", a.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria = vec![
        run("01-commutator-table", commutator_table),
        run("02-delta-on-generators", delta_on_generators),
        run("03-s-bounds", s_bounds),
        run("04-chain-on-t0", chain_on_t0),
        run("05-leibniz-u-mult", leibniz_and_u_mult),
        run("06-cb-sampling", cb_sampling),
        run("07-generation-rank", generation_ranks),
        run("08-search-floor", search_floor),
        run("09-free-group", free_group),
        run("10-performance", performance),
        run("11-determinism", determinism),
    ];
    let failed: Vec<&str> = criteria.iter().filter(|c| !c.pass).map(|c| c.label).collect();
    let total: f64 = criteria.iter().map(|c| c.seconds).sum();
    println!("acceptance total {total:.1}s");
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
