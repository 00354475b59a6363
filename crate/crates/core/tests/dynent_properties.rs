use gentropy::dynent::{
    entropy_trace, infinite_rate_check, power_rate_check, sandwich_check,
    standard_subsequence_trace, SymbolicSystem,
};
use gentropy::gfun::{builtin_catalog, estimate_ratio_limits, GClass, GFunction, DEFAULT_DEPTH};
use gentropy::systems::{build_r_for_target, BernoulliSystem};
use proptest::prelude::*;

fn bernoulli(p: &[f64]) -> SymbolicSystem {
    SymbolicSystem::Bernoulli(BernoulliSystem::new(p).unwrap())
}

#[test]
fn finite_class_rates_follow_the_ratio_constant() {
    let eta = GFunction::shannon();
    for p in [
        vec![0.5, 0.5],
        vec![0.3, 0.7],
        vec![0.2, 0.3, 0.5],
        vec![0.1, 0.1, 0.8],
    ] {
        let sys = bernoulli(&p);
        let rate = sys.shannon_rate().unwrap();
        for g in builtin_catalog() {
            let c = estimate_ratio_limits(&g, &eta, DEFAULT_DEPTH, 2).unwrap();
            if !matches!(c.classification, GClass::G0Zero | GClass::G0Shannon) {
                continue;
            }
            let t = entropy_trace(&sys, &g, 40).unwrap();
            let want = c.limsup_est * rate;
            assert!(
                (t.limsup_est - want).abs() <= 1e-3,
                "{} on {p:?}: {} vs {want}",
                g.name(),
                t.limsup_est
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn zero_class_has_zero_rate(a in 0.05f64..0.95, q in prop::sample::select(vec![2.0, 3.0])) {
        let g = GFunction::havrda_charvat(q).unwrap();
        let t = entropy_trace(&bernoulli(&[a, 1.0 - a]), &g, 40).unwrap();
        prop_assert!(t.limsup_est <= 1e-3, "{}", t.limsup_est);
        prop_assert!(t.liminf_est <= t.limsup_est);
        prop_assert!(t.values.iter().all(|p| p.h >= 0.0));
    }

    #[test]
    fn traces_are_deterministic(a in 0.05f64..0.95, gi in 0usize..11) {
        let g = &builtin_catalog()[gi];
        let sys = bernoulli(&[a, 1.0 - a]);
        let x = entropy_trace(&sys, g, 30).unwrap();
        let y = entropy_trace(&sys, g, 30).unwrap();
        prop_assert_eq!(serde_json::to_string(&x).unwrap(), serde_json::to_string(&y).unwrap());
    }
}

#[test]
fn standard_example_has_zero_shannon_rate_and_target_g_rate() {
    let g = GFunction::power(0.5).unwrap();
    for gamma in [0.5, 1.0, 2.0] {
        let st = build_r_for_target(&g, gamma, 3).unwrap();
        let sh = standard_subsequence_trace(&st, &GFunction::shannon()).unwrap();
        let rates: Vec<f64> = sh.values.iter().map(|p| p.rate).collect();
        assert!(*rates.last().unwrap() < 1e-3, "γ = {gamma}: {rates:?}");
        let tg = standard_subsequence_trace(&st, &g).unwrap();
        assert!(
            (tg.limsup_est / gamma - 1.0).abs() < 0.1,
            "γ = {gamma}: {}",
            tg.limsup_est
        );
    }
}

#[test]
fn sturmian_shannon_rate_is_small() {
    let sys = SymbolicSystem::parse("sturmian:golden").unwrap();
    let t = entropy_trace(&sys, &GFunction::shannon(), 1000).unwrap();
    let last = t.last().unwrap();
    let bound = (1001f64).ln() * 1001.0 / 1e6;
    assert!(last.rate < 0.01 && last.rate <= bound);
}

#[test]
fn sandwich_examples() {
    let eta = GFunction::shannon();
    let b = bernoulli(&[0.3, 0.7]);
    let g1 = GFunction::affine(vec![
        (1.0, eta.clone()),
        (1.0, GFunction::havrda_charvat(2.0).unwrap()),
    ])
    .unwrap();
    let r = sandwich_check(&b, &g1, &eta, 40).unwrap();
    assert!(r.passed() && (r.h1 - r.h2).abs() <= r.tol);

    let pl = gentropy::gfun::make_builtin("pl", &[1.0, 2.0]).unwrap();
    let r = sandwich_check(&bernoulli(&[0.5, 0.5]), &pl, &eta, 40).unwrap();
    let q = r.h1 / r.h2;
    assert!(r.passed() && q >= 1.0 - r.tol && q <= 2.0 + r.tol, "{q}");
}

#[test]
fn infinite_rate_on_biased_coin_matches_closed_form() {
    let g = GFunction::power(0.5).unwrap();
    let r = infinite_rate_check(&bernoulli(&[0.3, 0.7]), &g, 60).unwrap();
    assert!(r.escaped);
    // H(√x, P_n) = (√0.3 + √0.7)ⁿ.
    let s = 0.3f64.sqrt() + 0.7f64.sqrt();
    for p in &r.trace.values[..12] {
        let want = s.powi(p.n as i32);
        assert!((p.h - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn power_rate_examples() {
    let b = bernoulli(&[0.3, 0.7]);
    let r = power_rate_check(&b, &GFunction::shannon(), 2, 40).unwrap();
    assert!(r.passed() && (r.lhs - r.rhs).abs() <= 1e-12);
    let r = power_rate_check(&b, &GFunction::power(0.9).unwrap(), 2, 20).unwrap();
    assert!(r.passed());
    assert_eq!(r.per_level_ok.len(), 20);
}
