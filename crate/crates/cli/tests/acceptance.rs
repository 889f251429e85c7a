//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::time::{Duration, Instant};

use triop::matrix::{random_general, random_hermitian_from, spectral_decompose_default, CMatrix};
use triop::opint::{doi_apply, materialize, toi_direct, toi_dual, DualKind, HaagerupRep, Kernel3, RepKind};
use triop::rng::{derive_seed, seeded};
use triop::search::{run_search, search_counterexample, trend_report, SearchConfig, SearchReport, TrendSample};
use triop::theorems::{generate_instance, pair_formula_sides, random_bound_case, sweep_dimensions, BoundMode};
use triop::{Complex64, GeneralOperator, SchattenIndex, TrigPoly2};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn idx(p: f64) -> SchattenIndex {
    SchattenIndex::new(p).unwrap()
}

/// `exp(i A)` by scaling and squaring a Taylor series.
fn exp_i(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm: f64 = a.iter().map(|z| z.norm()).sum();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let m = a * Complex64::new(0.0, 1.0 / 2f64.powi(squarings));
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &m / Complex64::from(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn identity_criterion() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("identity.json");
    let start = Instant::now();
    let code = triop_cli::run([
        "triop",
        "verify-identity",
        "--dim",
        "2,4,8",
        "--degree",
        "1,2,3,4",
        "--samples",
        "200",
        "--seed",
        "1",
        "--tol",
        "1e-8",
        "--out",
        out.to_str().unwrap(),
    ]);
    let elapsed = start.elapsed();
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = report["instances"].as_array().unwrap();
    let worst = rows.iter().map(|r| r["residual"].as_f64().unwrap()).fold(0.0, f64::max);
    let passed = code == 0 && rows.len() == 200 && worst <= 1e-8 && elapsed < Duration::from_secs(30);
    verdict(passed, format!("{} instances, max residual {worst:.2e} (tol 1e-8), {elapsed:.1?} (limit 30s)", rows.len()))
}

fn classical_reduction_criterion() -> Verdict {
    let f = TrigPoly2::from_modes(&[(1, 0, Complex64::new(1.0, 0.0))]);
    let mut worst = 0.0_f64;
    for i in 0..50u64 {
        let dim = [2, 3, 4, 6, 8][i as usize % 5];
        let inst = generate_instance(dim, 3, SchattenIndex::TWO, derive_seed(&[2, i])).unwrap().with_symbol(f.clone());
        let (_, rhs) = pair_formula_sides(&inst).unwrap();
        let oracle = exp_i(inst.a1.matrix()) - exp_i(inst.a2.matrix());
        worst = worst.max((rhs.matrix() - &oracle).norm() / oracle.norm());
    }
    verdict(worst <= 1e-10, format!("50 instances, max relative error {worst:.2e} (tol 1e-10)"))
}

fn bound_ensemble(mode: BoundMode, cases: usize, stream: u64, pairs: &[(f64, f64)]) -> (usize, usize, f64) {
    let mut violations = 0;
    let mut checks = 0;
    let mut worst = 0.0_f64;
    for i in 0..cases {
        let case = random_bound_case(mode, 12, 6, derive_seed(&[stream, i as u64])).unwrap();
        for &(p, q) in pairs {
            let r = case.check(idx(p), idx(q), mode).unwrap();
            checks += 1;
            violations += usize::from(!r.passed);
            if r.rhs > 0.0 {
                worst = worst.max(r.ratio());
            }
        }
    }
    (checks, violations, worst)
}

fn one_sided_criterion() -> Verdict {
    let start = Instant::now();
    let ps: Vec<(f64, f64)> = [2.0, 2.5, 3.0, 4.0, 8.0, f64::INFINITY].iter().map(|&p| (p, 1.0)).collect();
    let (c1, v1, w1) = bound_ensemble(BoundMode::LeftBounded, 500, 3, &ps);
    let (c2, v2, w2) = bound_ensemble(BoundMode::RightBounded, 500, 4, &ps);
    let elapsed = start.elapsed();
    let passed = v1 + v2 == 0 && elapsed < Duration::from_secs(60);
    verdict(
        passed,
        format!("{} checks, {} violations, max lhs/rhs {:.4}, {elapsed:.1?} (limit 60s)", c1 + c2, v1 + v2, w1.max(w2)),
    )
}

fn holder_criterion() -> Verdict {
    let (c, v, w) = bound_ensemble(BoundMode::Holder, 500, 5, &[(4.0, 4.0), (8.0, 8.0), (4.0, 8.0)]);
    verdict(v == 0, format!("{c} checks, {v} violations, max lhs/rhs {w:.4}"))
}

fn one_sided_kind_criterion() -> Verdict {
    let inf = f64::INFINITY;
    let (c1, v1, w1) = bound_ensemble(BoundMode::FirstKind, 300, 6, &[(1.0, inf), (2.0, 2.0), (1.5, 3.0)]);
    let (c2, v2, w2) = bound_ensemble(BoundMode::SecondKind, 300, 7, &[(inf, 1.0), (2.0, 2.0), (3.0, 1.5)]);
    verdict(v1 + v2 == 0, format!("{} checks, {} violations, max lhs/rhs {:.4}", c1 + c2, v1 + v2, w1.max(w2)))
}

fn duality_criterion() -> Verdict {
    let mut worst = 0.0_f64;
    for i in 0..100u64 {
        let mut rng = seeded(derive_seed(&[8, i]));
        let n = 1 + (i as usize % 8);
        let d = [0, 1, 2].map(|_| spectral_decompose_default(&random_hermitian_from(&mut rng, n, 1.0).unwrap()).unwrap());
        let grids = [0, 1, 2].map(|j| d[j].eigenvalues().to_vec());
        let rep = HaagerupRep::random(&mut rng, RepKind::Core, grids.clone(), 3, 3).unwrap();
        let psi = materialize(&rep);
        let [t, r, q] = [0, 1, 2].map(|_| random_general(&mut rng, n));
        let mut sup = 0.0_f64;
        for &x in &grids[0] {
            for &y in &grids[1] {
                for &z in &grids[2] {
                    sup = sup.max(psi.eval(x, y, z).unwrap().norm());
                }
            }
        }
        let two = SchattenIndex::TWO;
        let scale = sup * t.schatten(two) * r.schatten(two) * q.schatten(two);
        let want = (toi_direct(&psi, &d[0], &t, &d[1], &r, &d[2]).unwrap().into_matrix() * q.matrix()).trace();
        for kind in [DualKind::First, DualKind::Second] {
            let got = toi_dual(&psi, kind, &d[0], &d[1], &d[2], &t, &r, &q).unwrap();
            worst = worst.max((got - want).norm() / scale);
        }
    }
    verdict(worst <= 1e-10, format!("100 instances x 2 kinds, max error / operand scale {worst:.2e} (tol 1e-10)"))
}

fn contraction_criterion() -> Verdict {
    let mut violations = 0;
    let mut worst = 0.0_f64;
    let two = SchattenIndex::TWO;
    for i in 0..200u64 {
        let mut rng = seeded(derive_seed(&[9, i]));
        let n = 1 + (i as usize % 12);
        let da = spectral_decompose_default(&random_hermitian_from(&mut rng, n, 1.0).unwrap()).unwrap();
        let db = spectral_decompose_default(&random_hermitian_from(&mut rng, n, 1.0).unwrap()).unwrap();
        let t = random_general(&mut rng, n);
        let (w1, w2, w3) = (1.0 + i as f64 * 0.01, 0.5 * (i % 7) as f64, -1.5 + 0.02 * i as f64);
        let phi = |x: f64, y: f64| Complex64::from_polar(w1 + (w3 * x * y).sin(), w2 * x - y);
        let sup = da.eigenvalues().iter().flat_map(|&x| db.eigenvalues().iter().map(move |&y| phi(x, y).norm())).fold(0.0, f64::max);
        let lhs = doi_apply(phi, &da, &db, &t).unwrap().schatten(two);
        let rhs = sup * t.schatten(two);
        violations += usize::from(lhs > rhs * (1.0 + 1e-10));
        worst = worst.max(lhs / rhs);
    }
    let n = 5;
    let mut rng = seeded(10);
    let da = spectral_decompose_default(&random_hermitian_from(&mut rng, n, 1.0).unwrap()).unwrap();
    let db = spectral_decompose_default(&random_hermitian_from(&mut rng, n, 1.0).unwrap()).unwrap();
    let id = GeneralOperator::identity(n);
    let lhs = doi_apply(|_, _| Complex64::new(1.0, 0.0), &da, &db, &id).unwrap().schatten(two);
    let equality = (lhs - id.schatten(two)).abs() <= 1e-12 * lhs;
    verdict(
        violations == 0 && equality,
        format!("200 instances, {violations} violations, max ratio {worst:.6}; unit symbol with T = I: equality {equality}"),
    )
}

fn lipschitz_criterion() -> Verdict {
    let ps = [idx(1.0), idx(1.5), idx(2.0)];
    let recs = sweep_dimensions(&ps, &[2, 4, 8, 16], 50, 12, 3).unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for p in ps {
        let max_at = |dim: usize| recs.iter().filter(|r| r.p == p && r.dim == dim).map(|r| r.normalized_ratio).fold(0.0, f64::max);
        let (m2, m16) = (max_at(2), max_at(16));
        passed &= m16 <= 2.0 * m2;
        parts.push(format!("p={p}: max@16 {m16:.4} vs 2*max@2 {:.4}", 2.0 * m2));
    }
    verdict(passed, parts.join("; "))
}

fn json(report: &SearchReport) -> String {
    serde_json::to_string(report).unwrap()
}

fn search_config(p: f64, dim: usize, budget: usize) -> SearchConfig {
    SearchConfig { p: idx(p), dim, symbol_degree: 3, budget, restarts: 4, master_seed: 11, step_scale: 0.3 }
}

fn determinism_criterion() -> Verdict {
    let a = search_counterexample(&search_config(4.0, 16, 500)).unwrap();
    let b = search_counterexample(&search_config(4.0, 16, 500)).unwrap();
    let zero = search_counterexample(&search_config(4.0, 16, 0)).unwrap();
    let identical = json(&a) == json(&b);
    let monotone = a.trajectory.windows(2).all(|w| w[0].1 <= w[1].1) && a.trajectory.last().unwrap().1 == a.best_ratio;
    let improves = a.best_ratio >= zero.best_ratio;
    verdict(
        identical && monotone && improves,
        format!(
            "byte-identical {identical}, monotone trajectory {monotone}, budget 500 {:.4} >= budget 0 {:.4}: {improves}",
            a.best_ratio, zero.best_ratio
        ),
    )
}

fn trend_criterion() -> Verdict {
    let dims = [4, 8, 16, 32];
    let run_all = |p: f64| -> Vec<SearchReport> {
        dims.iter()
            .map(|&d| {
                let cfg = search_config(p, d, 2000);
                if p > 2.0 { search_counterexample(&cfg) } else { run_search(&cfg) }.unwrap()
            })
            .collect()
    };
    let control = run_all(2.0);
    let mut passed = true;
    let mut parts = Vec::new();
    for p in [4.0, f64::INFINITY] {
        let first = run_all(p);
        let second = run_all(p);
        let deterministic = first.iter().zip(&second).all(|(a, b)| json(a) == json(b));
        let samples: Vec<TrendSample> = first.iter().map(|r| TrendSample { group: r.config.dim, value: r.best_ratio }).collect();
        let produced = trend_report(&samples).map(|rows| rows.len() == dims.len()).unwrap_or(false);
        let mut beats = Vec::new();
        for (r, c) in first.iter().zip(&control) {
            let ok = r.best_ratio >= c.best_ratio;
            passed &= ok;
            beats.push(format!("dim {} {:.4}{}{:.4}", r.config.dim, r.best_ratio, if ok { ">=" } else { "<" }, c.best_ratio));
        }
        passed &= deterministic && produced;
        parts.push(format!("p={}: trend {produced}, deterministic {deterministic}, vs p=2 [{}]", idx(p), beats.join(", ")));
    }
    verdict(passed, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("identity residual", identity_criterion),
        ("classical one-variable reduction", classical_reduction_criterion),
        ("one-sided bounds, p >= 2", one_sided_criterion),
        ("Holder-type bound", holder_criterion),
        ("first and second kind bounds", one_sided_kind_criterion),
        ("duality consistency", duality_criterion),
        ("Hilbert-Schmidt contraction", contraction_criterion),
        ("Lipschitz ratio regression", lipschitz_criterion),
        ("search determinism and monotonicity", determinism_criterion),
        ("p > 2 trend against p = 2 control", trend_criterion),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        failed += usize::from(!v.passed);
        println!(
            "acceptance {:>2} {} {name}: {} [{:.1?}]",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
