mod common;

use common::{c, doi_sum, expm, i_times, M};
use proptest::prelude::*;
use triop::matrix::{random_general, spectral_decompose_default};
use triop::opint::HaagerupRep;
use triop::rng::seeded;
use triop::theorems::{
    bound_case_for_rep, check_toi_schatten, generate_instance, generate_separated_instance, lipschitz_ratio,
    pair_formula_sides, random_bound_case, read_ratio_csv, sweep_dimensions, verify_pair_formula, write_ratio_csv,
    BoundMode, PerturbationInstance,
};
use triop::{Complex64, SchattenIndex, TrigPoly2};

fn idx(p: f64) -> SchattenIndex {
    SchattenIndex::new(p).unwrap()
}

/// Grid sup of each dyadic ring by direct evaluation of the ring's modes,
/// weighted by `2^n` and summed.
fn besov_oracle(f: &TrigPoly2) -> f64 {
    let n = f.degree() as i64;
    let ring = |r: i64| -> usize {
        let mut b = 0;
        while (1i64 << b) < r {
            b += 1;
        }
        b
    };
    let last = ring(n.max(1)) + 1;
    let g = 8 * (2 * f.degree() + 2);
    let step = std::f64::consts::TAU / g as f64;
    let mut total = 0.0;
    for block in 0..=last {
        let modes: Vec<(i64, i64, Complex64)> = (-n..=n)
            .flat_map(|m| (-n..=n).map(move |k| (m, k)))
            .filter(|&(m, k)| ring(m.abs().max(k.abs())) == block)
            .map(|(m, k)| (m, k, f.coeff(m, k)))
            .collect();
        let mut sup = 0.0_f64;
        for i in 0..g {
            for j in 0..g {
                let (x, y) = (i as f64 * step, j as f64 * step);
                let v: Complex64 = modes.iter().map(|&(m, k, z)| z * Complex64::from_polar(1.0, m as f64 * x + k as f64 * y)).sum();
                sup = sup.max(v.norm());
            }
        }
        total += (1u64 << block) as f64 * sup;
    }
    total
}

#[test]
fn exponential_of_x_reduces_to_one_variable_formula() {
    let f = TrigPoly2::from_modes(&[(1, 0, c(1.0, 0.0))]);
    for seed in 0..50 {
        let inst = generate_instance(2 + (seed as usize % 5), 3, SchattenIndex::TWO, seed).unwrap().with_symbol(f.clone());
        let (lhs, rhs) = pair_formula_sides(&inst).unwrap();
        let oracle = expm(&i_times(inst.a1.matrix())) - expm(&i_times(inst.a2.matrix()));
        let scale = oracle.norm().max(1e-300);
        assert!((rhs.matrix() - &oracle).norm() <= 1e-10 * scale, "seed {seed}");
        assert!((lhs.matrix() - &oracle).norm() <= 1e-10 * scale, "seed {seed}");
    }
}

#[test]
fn unperturbed_instance_has_zero_residual() {
    let inst = generate_instance(5, 3, SchattenIndex::TWO, 1).unwrap();
    let same = PerturbationInstance::new(inst.a1.clone(), inst.b1.clone(), inst.a1.clone(), inst.b1.clone(), inst.f.clone(), inst.p, 0).unwrap();
    let check = verify_pair_formula(&same, 1e-8).unwrap();
    assert_eq!(check.residual, 0.0);
}

#[test]
fn ratio_matches_independent_pipeline_after_serialization() {
    for seed in 0..10 {
        let inst = generate_instance(4, 3, idx(1.5), seed).unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        let back: PerturbationInstance = serde_json::from_str(&text).unwrap();
        let rec = lipschitz_ratio(&back).unwrap();
        let f = &back.f;
        let eval = |x: f64, y: f64| f.eval(x, y);
        let n = back.dim();
        let id = M::identity(n, n);
        let diff = doi_sum(eval, back.a1.matrix(), &id, back.b1.matrix()) - doi_sum(eval, back.a2.matrix(), &id, back.b2.matrix());
        let num = common::schatten(&diff, 1.5);
        let den = common::schatten(&(back.a1.matrix() - back.a2.matrix()), 1.5)
            + common::schatten(&(back.b1.matrix() - back.b2.matrix()), 1.5);
        let besov = besov_oracle(f);
        assert!((rec.num - num).abs() <= 1e-9 * num, "num {} vs {num}", rec.num);
        assert!((rec.den - den).abs() <= 1e-10 * den);
        assert!((rec.besov - besov).abs() <= 1e-12 * besov);
        assert!((rec.normalized_ratio - num / (den * besov)).abs() <= 1e-9 * rec.normalized_ratio);
    }
}

#[test]
fn scalar_instance_ratio() {
    let f = TrigPoly2::from_modes(&[(1, 0, c(0.5, 0.0)), (-1, 0, c(0.5, 0.0)), (1, 1, c(0.0, 0.25)), (-1, -1, c(0.0, -0.25))]);
    let one = |v: f64| triop::HermitianOperator::from_real_diagonal(&[v]).unwrap();
    let inst = PerturbationInstance::new(one(1.0), one(0.0), one(0.0), one(0.0), f.clone(), SchattenIndex::ONE, 0).unwrap();
    let rec = lipschitz_ratio(&inst).unwrap();
    let want = (f.eval(1.0, 0.0) - f.eval(0.0, 0.0)).norm() / besov_oracle(&f);
    assert!((rec.normalized_ratio - want).abs() <= 1e-12 * want);
}

#[test]
fn sweep_schema() {
    assert!(sweep_dimensions(&[SchattenIndex::TWO], &[2, 4], 0, 1, 3).unwrap().is_empty());
    let recs = sweep_dimensions(&[SchattenIndex::TWO], &[2, 4, 8], 10, 5, 3).unwrap();
    assert_eq!(recs.len(), 30);
    assert!(recs.iter().all(|r| r.normalized_ratio.is_finite() && r.den > 0.0 && r.besov > 0.0));
    assert_eq!(recs, sweep_dimensions(&[SchattenIndex::TWO], &[2, 4, 8], 10, 5, 3).unwrap());
    let mut buf = Vec::new();
    write_ratio_csv(&recs, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("p,dim,sample_index,seed,num,den,besov,normalized_ratio\n"));
    assert_eq!(read_ratio_csv(buf.as_slice()).unwrap(), recs);
}

#[test]
fn holder_and_first_kind_examples_pass() {
    for seed in 0..20 {
        let case = random_bound_case(BoundMode::Holder, 8, 4, seed).unwrap();
        let report = case.check(idx(4.0), idx(4.0), BoundMode::Holder).unwrap();
        assert!(report.passed);
        let oracle_lhs = {
            let [d1, d2, d3] = &case.decomps;
            let w = triop::opint::toi_direct(&triop::opint::materialize(&case.rep), d1, &case.t, d2, &case.r, d3).unwrap();
            common::schatten(w.matrix(), 2.0)
        };
        assert!((report.lhs - oracle_lhs).abs() <= 1e-10 * oracle_lhs);
        let case = random_bound_case(BoundMode::FirstKind, 8, 4, seed).unwrap();
        assert!(case.check(SchattenIndex::ONE, SchattenIndex::INFINITY, BoundMode::FirstKind).unwrap().passed);
    }
}

#[test]
fn singleton_rep_with_identity_is_an_equality() {
    let mut rng = seeded(2);
    let d = [0, 1, 2].map(|_| spectral_decompose_default(&triop::matrix::random_hermitian_from(&mut rng, 3, 1.0).unwrap()).unwrap());
    let rep = HaagerupRep::ones(triop::opint::RepKind::Core, [0, 1, 2].map(|i| d[i].eigenvalues().to_vec()));
    let r = random_general(&mut rng, 3);
    let t = triop::GeneralOperator::identity(3);
    let report = check_toi_schatten(&rep, [&d[0], &d[1], &d[2]], &t, &r, SchattenIndex::TWO, SchattenIndex::TWO, BoundMode::LeftBounded).unwrap();
    assert!((report.lhs - report.rhs).abs() <= 1e-12 * report.rhs);
    assert!((report.lhs - common::schatten(r.matrix(), 2.0)).abs() <= 1e-12 * report.lhs);
    let case = bound_case_for_rep(HaagerupRep::ones(triop::opint::RepKind::Core, [vec![0.0], vec![0.0], vec![0.0]]), 1, true, 0).unwrap();
    assert!(case.check(SchattenIndex::TWO, SchattenIndex::TWO, BoundMode::LeftBounded).unwrap().passed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn identity_residual_is_tiny(dim in 1usize..=8, degree in 0usize..=4, seed in any::<u64>()) {
        let inst = generate_separated_instance(dim, degree, SchattenIndex::TWO, seed).unwrap();
        prop_assert!(verify_pair_formula(&inst, 1e-8).unwrap().residual <= 1e-8);
    }

    #[test]
    fn ratio_is_scale_invariant(dim in 1usize..=6, seed in any::<u64>(), re in -4.0f64..4.0, im in -4.0f64..4.0, p in prop_oneof![Just(1.0), Just(1.5), Just(2.0), Just(f64::INFINITY)]) {
        let k = Complex64::new(re, im);
        prop_assume!(k.norm() > 1e-2);
        let inst = generate_instance(dim, 3, idx(p), seed).unwrap();
        let base = lipschitz_ratio(&inst).unwrap().normalized_ratio;
        let scaled = lipschitz_ratio(&inst.with_symbol(inst.f.scale(k))).unwrap().normalized_ratio;
        prop_assert!((scaled - base).abs() <= 1e-12 * base.max(1e-300));
    }

    #[test]
    fn ratio_is_symmetric_under_swap(dim in 1usize..=6, seed in any::<u64>(), p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)]) {
        let inst = generate_instance(dim, 2, idx(p), seed).unwrap();
        let a = lipschitz_ratio(&inst).unwrap();
        let b = lipschitz_ratio(&inst.swapped()).unwrap();
        prop_assert!((a.num - b.num).abs() <= 1e-12 * a.num.max(1e-300));
        prop_assert!((a.den - b.den).abs() <= 1e-12 * a.den);
        prop_assert!((a.normalized_ratio - b.normalized_ratio).abs() <= 1e-12 * a.normalized_ratio.max(1e-300));
    }

    #[test]
    fn checked_bounds_hold(seed in any::<u64>(), which in 0usize..5) {
        let (mode, p, q) = [
            (BoundMode::LeftBounded, 3.0, 1.0),
            (BoundMode::RightBounded, f64::INFINITY, 1.0),
            (BoundMode::Holder, 4.0, 8.0),
            (BoundMode::FirstKind, 1.5, 3.0),
            (BoundMode::SecondKind, 3.0, 1.5),
        ][which];
        let case = random_bound_case(mode, 8, 4, seed).unwrap();
        let report = case.check(idx(p), idx(q), mode).unwrap();
        prop_assert!(report.passed, "{report:?}");
    }
}
