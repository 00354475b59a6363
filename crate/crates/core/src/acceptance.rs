//! Acceptance suite: each criterion returns a pass/fail record with details.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynent::{entropy_trace, sandwich_check, standard_subsequence_trace, SymbolicSystem};
use crate::error::{Error, Result};
use crate::gfun::{
    builtin_catalog, estimate_elasticity, estimate_ratio_limits, estimate_ratio_limits_on_grid,
    estimate_u, make_builtin, GClass, GFunction, DEFAULT_DEPTH,
};
use crate::numeric::NeumaierSum;
use crate::systems::{build_r_for_target, BernoulliSystem, SturmianSystem};
use crate::towers::{
    choose_nn, lower_bound_schedule, tower_restricted_entropy, tower_restricted_entropy_direct,
    verify_schedule,
};

/// Seed of the randomized criteria.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {:>8.3}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

type Check = fn(u64) -> Result<Outcome>;

const CRITERIA: [(u32, &str, Option<u64>, Check); 11] = [
    (1, "bernoulli-exactness", Some(1), bernoulli_exactness),
    (2, "bernoulli-oracle", Some(30), bernoulli_oracle),
    (3, "finite-limsup-uniform", None, finite_limsup_uniform),
    (4, "grid-agreement", Some(5), grid_agreement),
    (5, "elasticity-u-equivalence", None, elasticity_u),
    (6, "sandwich-random", None, sandwich_random),
    (7, "construction", Some(60), construction),
    (8, "xi-monotone", None, xi_monotone),
    (9, "sturmian", None, sturmian),
    (10, "towers", None, towers),
    (11, "negative-gates", None, negative_gates),
];

/// Names of the runnable suites.
pub const SUITES: [&str; 4] = ["all", "bernoulli-oracle", "towers", "construction"];

fn suite_ids(suite: &str) -> Option<Vec<u32>> {
    match suite {
        "all" => Some((1..=11).collect()),
        "bernoulli-oracle" => Some(vec![1, 2, 3]),
        "towers" => Some(vec![10, 11]),
        "construction" => Some(vec![7, 8]),
        _ => CRITERIA.iter().find(|c| c.1 == suite).map(|c| vec![c.0]),
    }
}

/// Runs criterion `id` (1–11).
pub fn run_criterion(id: u32, seed: u64) -> Result<CriterionResult> {
    let (id, name, budget, check) = *CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| Error::Precondition(format!("no acceptance criterion {id}")))?;
    let start = Instant::now();
    let out = check(seed);
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match out {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = budget {
        if elapsed > Duration::from_secs(limit) {
            passed = false;
            detail.push_str(&format!("; over the {limit}s budget"));
        }
    }
    Ok(CriterionResult {
        id,
        name: name.to_string(),
        passed,
        detail,
        seconds: elapsed.as_secs_f64(),
    })
}

/// Runs a named suite: `all`, `bernoulli-oracle`, `towers`, `construction`,
/// or the name of a single criterion.
pub fn run_suite(suite: &str, seed: u64) -> Result<Vec<CriterionResult>> {
    let ids = suite_ids(suite).ok_or_else(|| Error::Parse {
        input: suite.into(),
        reason: format!("unknown suite; expected one of {}", SUITES.join(", ")),
    })?;
    ids.into_iter().map(|id| run_criterion(id, seed)).collect()
}

fn bernoulli_exactness(_: u64) -> Result<Outcome> {
    let eta = GFunction::shannon();
    let mut worst: f64 = 0.0;
    let fair = SymbolicSystem::Bernoulli(BernoulliSystem::new(&[0.5, 0.5])?);
    let ln2 = 2f64.ln();
    for p in entropy_trace(&fair, &eta, 40)?.values {
        worst = worst.max((p.rate - ln2).abs());
    }
    let biased = SymbolicSystem::Bernoulli(BernoulliSystem::new(&[0.3, 0.7])?);
    let want = 0.3 * (10.0f64 / 3.0).ln() + 0.7 * (10.0f64 / 7.0).ln();
    for p in entropy_trace(&biased, &eta, 40)?.values {
        worst = worst.max((p.rate - want).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("max |H_n/n − h| = {worst:.2e} over n ≤ 40"),
    )
}

/// `H(g, P_n)` by enumerating all `kⁿ` words.
fn naive_entropy(p: &[f64], n: usize, g: &GFunction) -> f64 {
    let k = p.len();
    let mut word = vec![0usize; n];
    let mut acc = NeumaierSum::new();
    loop {
        let prob: f64 = word.iter().map(|&s| p[s]).product();
        acc.add(g.eval(prob));
        let mut i = 0;
        loop {
            if i == n {
                return acc.value();
            }
            word[i] += 1;
            if word[i] < k {
                break;
            }
            word[i] = 0;
            i += 1;
        }
    }
}

fn bernoulli_oracle(_: u64) -> Result<Outcome> {
    let catalog = builtin_catalog();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for p in [vec![0.3, 0.7], vec![0.2, 0.3, 0.5]] {
        let sys = BernoulliSystem::new(&p)?;
        for n in 1..=12usize {
            let d = sys.distribution(n as u64)?;
            for g in &catalog {
                let fast = d.static_entropy(g)?;
                let slow = naive_entropy(&p, n, g);
                worst = worst.max((fast - slow).abs() / slow.abs().max(1.0));
                cases += 1;
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("{cases} cases, max relative gap {worst:.2e}"),
    )
}

fn finite_limsup_uniform(_: u64) -> Result<Outcome> {
    let g = GFunction::scaled(2.0, GFunction::shannon())?;
    let sys = SymbolicSystem::Bernoulli(BernoulliSystem::uniform(3)?);
    let t = entropy_trace(&sys, &g, 40)?;
    let want = 2.0 * 3f64.ln();
    let err = (t.limsup_est - want).abs();
    outcome(
        err <= 1e-9,
        format!("limsup {:.12} vs 2 ln 3, gap {err:.1e}", t.limsup_est),
    )
}

fn grid_agreement(_: u64) -> Result<Outcome> {
    let eta = GFunction::shannon();
    let g = make_builtin("pl", &[1.0, 2.0])?;
    let b2 = estimate_ratio_limits(&g, &eta, 1024, 2)?.limsup_est;
    let b3 = estimate_ratio_limits(&g, &eta, 646, 3)?.limsup_est;
    let fine: Vec<f64> = (1..=4096).map(|i| -0.25 * i as f64).collect();
    let bf = estimate_ratio_limits_on_grid(&g, &eta, &fine)?.limsup_est;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let worst = rel(b2, b3).max(rel(b2, bf)).max(rel(b3, bf));
    outcome(
        worst <= 0.05,
        format!(
            "limsup base2 {b2:.4}, base3 {b3:.4}, fine {bf:.4}; spread {:.2}%",
            100.0 * worst
        ),
    )
}

fn elasticity_u(_: u64) -> Result<Outcome> {
    let mut notes = Vec::new();
    let mut ok = true;
    for a in [0.3, 0.5, 0.9] {
        let g = GFunction::power(a)?;
        let e = estimate_elasticity(&g, DEFAULT_DEPTH)?;
        let u = estimate_u(&g, 2.0, DEFAULT_DEPTH)?;
        let want_u = 2f64.powf(1.0 - a);
        ok &= (e - a).abs() <= 0.01 && (u - want_u).abs() <= 0.01 * want_u;
        notes.push(format!("a={a}: e={e:.4}, U={u:.4}"));
    }
    let tol = 1e-3;
    let mut mismatched = Vec::new();
    for g in builtin_catalog() {
        let e = estimate_elasticity(&g, DEFAULT_DEPTH)?;
        let u = estimate_u(&g, 2.0, DEFAULT_DEPTH)?;
        if (e < 1.0 - tol) != (u > 1.0 + tol) {
            mismatched.push(format!("{} (e={e:.4}, U={u:.4})", g.name()));
        }
    }
    ok &= mismatched.is_empty();
    if !mismatched.is_empty() {
        notes.push(format!("sign mismatch: {}", mismatched.join(", ")));
    }
    outcome(ok, notes.join("; "))
}

fn random_mix(rng: &mut ChaCha8Rng) -> Result<GFunction> {
    let c = rng.gen_range(0.5..3.0);
    let d = rng.gen_range(0.0..2.0);
    let q = rng.gen_range(1.5..3.0);
    GFunction::affine(vec![
        (c, GFunction::shannon()),
        (d, GFunction::havrda_charvat(q)?),
    ])
}

fn sandwich_random(seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = SymbolicSystem::Bernoulli(BernoulliSystem::new(&[0.3, 0.7])?);
    let mut ok = true;
    let mut notes = Vec::new();
    for _ in 0..5 {
        let g1 = random_mix(&mut rng)?;
        let g2 = random_mix(&mut rng)?;
        let r = sandwich_check(&sys, &g1, &g2, 40)?;
        ok &= r.passed();
        notes.push(format!(
            "{:.4}·{:.4} ≤ {:.4} ≤ {:.4}·{:.4}",
            r.c_lower, r.h2, r.h1, r.c_upper, r.h2
        ));
    }
    outcome(ok, notes.join("; "))
}

fn construction(_: u64) -> Result<Outcome> {
    let g = GFunction::power(0.5)?;
    let st = build_r_for_target(&g, 1.0, 3)?;
    let last = st.stages.last().map_or(0, |s| s.n);
    let gam = st.gamma_sequence(&g, last)?;
    let mut ok = true;
    let mut prev = 0;
    for s in &st.stages {
        let nf = s.n as f64;
        let gn = gam[s.n as usize - 1];
        ok &= gn > 1.0 - 1.0 / nf && gn < 1.0 + 1.0 / nf;
        ok &= (prev + 1..s.n).all(|n| gam[n as usize - 1] <= gn);
        prev = s.n;
    }
    let shannon = standard_subsequence_trace(&st, &GFunction::shannon())?;
    let fin = shannon.last().map_or(f64::INFINITY, |p| p.rate);
    ok &= fin < 0.05;
    let stages: Vec<String> = st
        .stages
        .iter()
        .map(|s| format!("N={} R=2^{} γ={:.4}", s.n, s.r.log2, gam[s.n as usize - 1]))
        .collect();
    outcome(
        ok,
        format!(
            "{}; Shannon H/D at D={} is {fin:.2e}",
            stages.join(", "),
            shannon.last().map_or(0, |p| p.n)
        ),
    )
}

fn xi_monotone(_: u64) -> Result<Outcome> {
    let g = GFunction::power(0.5)?;
    let st = build_r_for_target(&g, 1.0, 3)?;
    let mut checked = Vec::new();
    let mut ok = true;
    for n in 4..=st.stages_materialized().min(21) {
        let xi = st.xi_sequence(&g, n)?;
        ok &= xi.windows(2).all(|w| w[1] >= w[0]);
        checked.push(n);
    }
    ok &= !checked.is_empty();
    outcome(ok, format!("stages {checked:?} nondecreasing: {ok}"))
}

fn sturmian(_: u64) -> Result<Outcome> {
    const N: u64 = 10_000;
    let s = SturmianSystem::golden();
    let mut ok = true;
    let mut worst_mass: f64 = 0.0;
    for n in (1..=200).chain([500, 1000, 2000, 5000, N]) {
        let d = s.distribution(n)?;
        ok &= d.atoms().len() as u64 == n + 1;
        worst_mass = worst_mass.max((d.total_mass() - 1.0).abs());
    }
    ok &= worst_mass <= 1e-10;
    let sys = SymbolicSystem::Sturmian(s);
    let mut excess = f64::NEG_INFINITY;
    let mut final_rate = f64::NAN;
    for g in [GFunction::shannon(), GFunction::power(0.5)?] {
        let t = entropy_trace(&sys, &g, N)?;
        for p in &t.values {
            let cap = g.phi(1.0 / (p.n + 1) as f64);
            excess = excess.max(p.h - cap);
        }
        if g.family() == "shannon" {
            final_rate = t.last().map_or(f64::NAN, |p| p.rate);
        }
    }
    ok &= excess <= 1e-12 && final_rate < 0.002;
    let class = estimate_ratio_limits(
        &GFunction::power(0.5)?,
        &GFunction::shannon(),
        DEFAULT_DEPTH,
        2,
    )?
    .classification;
    ok &= class == GClass::G0Infinity;
    outcome(
        ok,
        format!(
            "mass err {worst_mass:.1e}; max H − φ(1/(n+1)) = {excess:.1e}; H(η)/n at 1e4 = {final_rate:.2e}; √x is {}",
            class.as_str()
        ),
    )
}

fn towers(seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7077);
    let catalog = [
        GFunction::shannon(),
        GFunction::power(0.5)?,
        GFunction::havrda_charvat(2.0)?,
    ];
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let g = &catalog[i % catalog.len()];
        let delta: f64 = 1.0 - rng.gen::<f64>();
        let n = rng.gen_range(1..=200u64);
        let a = tower_restricted_entropy(g, delta, n)?;
        let b = tower_restricted_entropy_direct(g, delta, n)?;
        worst = worst.max((a - b).abs() / a.abs());
    }
    let mut ok = worst <= 1e-12;
    let sq = GFunction::power(0.5)?;
    let mut notes = vec![format!("100 towers, max relative gap {worst:.1e}")];
    for m in [1.0, 10.0, 100.0] {
        let s = lower_bound_schedule(&sq, m, 4)?;
        let v = verify_schedule(&sq, &s)?;
        let tail = s.tail_bound();
        ok &= v.passed() && tail >= 0.75 * m;
        let ns: Vec<u64> = s.stages.iter().map(|st| st.n).collect();
        notes.push(format!("M={m}: N={ns:?} tail {tail:.3}"));
    }
    outcome(ok, notes.join("; "))
}

fn negative_gates(_: u64) -> Result<Outcome> {
    let nn = choose_nn(&GFunction::shannon(), 0.5, 1.0);
    let br = build_r_for_target(&GFunction::log_square(), 1.0, 2);
    let ok = matches!(nn, Err(Error::Precondition(_))) && matches!(br, Err(Error::Precondition(_)));
    let show = |r: std::result::Result<String, Error>| match r {
        Ok(v) => format!("accepted ({v})"),
        Err(e) => format!("refused ({e})"),
    };
    outcome(
        ok,
        format!(
            "choose_nn(η): {}; build_r(x(ln x − 1)²): {}",
            show(nn.map(|n| n.to_string())),
            show(br.map(|s| format!("{} stages", s.stages.len())))
        ),
    )
}
