use gentropy::gfun::GFunction;
use gentropy::towers::{
    certified_bound, choose_nn, lower_bound_schedule, tower_restricted_entropy,
    tower_restricted_entropy_direct, verify_schedule, GConstants,
};
use proptest::prelude::*;

fn family(i: usize) -> GFunction {
    match i {
        0 => GFunction::shannon(),
        1 => GFunction::power(0.5).unwrap(),
        2 => GFunction::power(0.3).unwrap(),
        _ => GFunction::havrda_charvat(2.0).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restricted_entropy_is_the_atom_sum(gi in 0usize..4, delta in 1e-6f64..=1.0, n in 1u64..=500) {
        let g = family(gi);
        let a = tower_restricted_entropy(&g, delta, n).unwrap();
        let b = tower_restricted_entropy_direct(&g, delta, n).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn bound_grows_with_height(delta in 1e-3f64..=1.0, n in 5u64..=200) {
        let g = GFunction::power(0.5).unwrap();
        let c = GConstants::of(&g).unwrap();
        let here = certified_bound(&g, &c, delta, n).unwrap();
        let next = certified_bound(&g, &c, delta, n + 1).unwrap();
        let slack = (c.left_derivative_half + c.d_max + 1.0) / n as f64;
        prop_assert!(next >= here - slack);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn schedules_reverify(m in 0.5f64..200.0, stages in 1usize..=4) {
        let g = GFunction::power(0.5).unwrap();
        let s = lower_bound_schedule(&g, m, stages).unwrap();
        prop_assert!(verify_schedule(&g, &s).unwrap().passed());
        prop_assert!(s.stages.windows(2).all(|w| w[1].delta < w[0].delta / 2.0));
    }
}

#[test]
fn choose_nn_matches_closed_form_scan() {
    let g = GFunction::power(0.5).unwrap();
    for (delta, m) in [(0.5f64, 1.0f64), (0.25, 3.0), (0.01, 50.0)] {
        // φ ratio at x = δ2^{−N−1}: x^{−1/2} / (−ln x).
        let want = (1..)
            .find(|&n: &u64| {
                let lx = delta.ln() - (n as f64 + 1.0) * 2f64.ln();
                (-0.5 * lx).exp() / -lx > 2.0 * m / (delta * 2f64.ln())
            })
            .unwrap();
        assert_eq!(
            choose_nn(&g, delta, m).unwrap(),
            want,
            "δ = {delta}, M = {m}"
        );
    }
    assert!(choose_nn(&g, 0.5, 10.0).unwrap() > choose_nn(&g, 0.5, 1.0).unwrap());
}

#[test]
fn schedule_examples() {
    let sq = GFunction::power(0.5).unwrap();
    let small = lower_bound_schedule(&sq, 1.0, 2).unwrap();
    let large = lower_bound_schedule(&sq, 100.0, 2).unwrap();
    assert!(verify_schedule(&sq, &large).unwrap().passed());
    for (a, b) in small.stages.iter().zip(&large.stages) {
        assert!(b.n > a.n);
    }
    let hc = GFunction::havrda_charvat(0.5).unwrap();
    let s = lower_bound_schedule(&hc, 1.0, 3).unwrap();
    assert!(verify_schedule(&hc, &s).unwrap().passed());
}

#[test]
fn finite_classes_are_refused() {
    for g in [
        GFunction::shannon(),
        GFunction::havrda_charvat(2.0).unwrap(),
        GFunction::scaled(3.0, GFunction::shannon()).unwrap(),
    ] {
        assert!(lower_bound_schedule(&g, 1.0, 2).is_err(), "{}", g.name());
    }
}
