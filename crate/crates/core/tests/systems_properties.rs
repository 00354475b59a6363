use gentropy::gfun::{builtin_catalog, GFunction};
use gentropy::systems::{build_r_for_target, BernoulliSystem, ConstructionState, SturmianSystem};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn prob_vector(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
        // Put the rounding residue on the last entry.
        let head: f64 = p[..p.len() - 1].iter().sum();
        *p.last_mut().unwrap() = 1.0 - head;
        p
    })
}

fn naive(p: &[f64], n: u32, g: &GFunction) -> f64 {
    let k = p.len() as u64;
    let mut total = 0.0;
    for w in 0..k.pow(n) {
        let mut x = w;
        let mut prob = 1.0;
        for _ in 0..n {
            prob *= p[(x % k) as usize];
            x /= k;
        }
        total += g.eval(prob);
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn type_classes_match_enumeration(
        p in (2usize..=3).prop_flat_map(prob_vector),
        n in 1u32..=8,
        gi in 0usize..11,
    ) {
        let g = &builtin_catalog()[gi];
        let d = BernoulliSystem::new(&p).unwrap().distribution(n.into()).unwrap();
        let fast = d.static_entropy(g).unwrap();
        let slow = naive(&p, n, g);
        prop_assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0), "{fast} vs {slow}");
    }

    #[test]
    fn shannon_rate_is_exact(p in (2usize..=4).prop_flat_map(prob_vector), n in 1u64..=40) {
        let s = BernoulliSystem::new(&p).unwrap();
        let h = s.distribution(n).unwrap().static_entropy(&GFunction::shannon()).unwrap();
        let rate: f64 = p.iter().map(|&x| -x * x.ln()).sum();
        prop_assert!((h / n as f64 - rate).abs() <= 1e-12, "{} vs {rate}", h / n as f64);
    }

    #[test]
    fn uniform_rate_is_phi(k in 2usize..=5, n in 1u64..=30, c in 0.1f64..5.0) {
        let g = GFunction::scaled(c, GFunction::shannon()).unwrap();
        let h = BernoulliSystem::uniform(k).unwrap().distribution(n).unwrap().static_entropy(&g).unwrap();
        let want = g.phi_log2(-(n as f64) * (k as f64).log2()).unwrap() / n as f64;
        prop_assert!((h / n as f64 - want).abs() <= 1e-12 * want);
        prop_assert!((want - c * (k as f64).ln()).abs() <= 1e-12 * want);
    }

    #[test]
    fn sturmian_counts_and_mass(beta in 0.01f64..0.99, n in 1u64..=400) {
        if let Ok(s) = SturmianSystem::new(beta) {
            let d = s.distribution(n).unwrap();
            prop_assert_eq!(d.atoms().len() as u64, n + 1);
            prop_assert!((d.total_mass() - 1.0).abs() <= n as f64 * 1e-15);
        }
    }

    #[test]
    fn count_profile_is_monotone(r in prop::collection::vec(1u64..=4, 1..=4)) {
        let st = ConstructionState::with_r(2, &r).unwrap();
        let top = st.stages_materialized();
        let h_top = st.h(top).unwrap().exact.clone().unwrap().to_u64().unwrap();
        let mut prev = f64::NEG_INFINITY;
        for m in 1..=h_top.min(5000) {
            let (c, _) = st.count_profile(&BigUint::from(m)).unwrap();
            prop_assert!(c >= prev);
            prev = c;
        }
        for n in 0..=top {
            let h = st.h(n).unwrap().exact.clone().unwrap();
            prop_assert_eq!(st.count_profile(&h).unwrap().0, st.log2_b(n));
        }
    }
}

#[test]
fn xi_is_nondecreasing_for_sqrt() {
    let g = GFunction::power(0.5).unwrap();
    let st = build_r_for_target(&g, 1.0, 3).unwrap();
    for n in 4..=st.stages_materialized() {
        let xi = st.xi_sequence(&g, n).unwrap();
        assert!(xi.windows(2).all(|w| w[1] >= w[0]), "stage {n}");
    }
}

#[test]
fn construction_state_round_trips_through_json() {
    let g = GFunction::power(0.5).unwrap();
    let st = build_r_for_target(&g, 1.0, 3).unwrap();
    let json = serde_json::to_string(&st).unwrap();
    let back: ConstructionState = serde_json::from_str(&json).unwrap();
    assert_eq!(back, st);
    let h: Vec<f64> = st.h.iter().map(|h| h.log2.exp2()).collect();
    assert_eq!(h, vec![1.0, 4.0, 8.0, 256.0, 65536.0, 131072.0]);
}
