//! Lower bounds for `h_μ(g, T)` from Rokhlin towers split by an independent set.
//!
//! A tower of measure `δ` and height `2N` whose lower half is cut into `2^N`
//! equal cells by an independent set gives the restricted profile of `2^N`
//! atoms of measure `δ 2^{−N−1}`. Only these measure profiles are used.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfun::{estimate_ratio_limits, GClass, GFunction, DEFAULT_DEPTH};
use crate::measure::{Atom, CylinderDistribution, LogProb, Multiplicity};
use crate::systems::search_horizon;

/// Most stages accepted by [`lower_bound_schedule`].
pub const MAX_TOWER_STAGES: usize = 10;
/// Grid size of the `d_max` search.
const DMAX_GRID: usize = 10_000;
/// Continuity slack in the certified bound.
const CONTINUITY_SLACK: f64 = 1.0;

/// `|g′₋(1/2)|` and `d_max = max |g(x) − g(y)|` over `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GConstants {
    pub left_derivative_half: f64,
    pub d_max: f64,
}

impl GConstants {
    pub fn of(g: &GFunction) -> Result<Self> {
        let left_derivative_half = g.left_derivative(0.5)?.abs();
        // Concave g attains its minimum on [0, 1] at an endpoint.
        let lo = g.eval(1.0).min(0.0);
        let step = 1.0 / DMAX_GRID as f64;
        let (mut best_x, mut best) = (0.0, 0.0);
        for i in 1..=DMAX_GRID {
            let x = i as f64 * step;
            let v = g.eval(x);
            if v > best {
                (best_x, best) = (x, v);
            }
        }
        // Golden-section refinement around the grid maximum.
        let (mut a, mut b) = ((best_x - step).max(0.0), (best_x + step).min(1.0));
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if g.eval(c) >= g.eval(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let hi = best.max(g.eval(0.5 * (a + b)));
        let d_max = hi - lo;
        if !(d_max.is_finite() && left_derivative_half.is_finite()) {
            return Err(Error::Evaluation {
                name: g.name().into(),
                log2_x: -1.0,
                reason: "constants of the lower bound are not finite".into(),
            });
        }
        Ok(Self {
            left_derivative_half,
            d_max,
        })
    }

    fn total(&self) -> f64 {
        self.left_derivative_half + self.d_max
    }
}

fn check_tower(delta: f64, n: u64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Precondition(format!(
            "tower measure {delta} outside (0, 1]"
        )));
    }
    if n == 0 {
        return Err(Error::Precondition(
            "tower half-height must be at least 1".into(),
        ));
    }
    Ok(())
}

/// `(δ/2)·φ_g(δ 2^{−n−1})`, the restricted entropy of the split tower.
///
/// Cross-checked against `2ⁿ g(δ 2^{−n−1})` to `1e-12` relative.
pub fn tower_restricted_entropy(g: &GFunction, delta: f64, n: u64) -> Result<f64> {
    check_tower(delta, n)?;
    let l = delta.log2() - n as f64 - 1.0;
    let closed = (delta.log2() - 1.0 + g.log2_phi(l)?).exp2();
    let direct = (n as f64 + g.log2_value(l)?).exp2();
    if (closed - direct).abs() > 1e-12 * closed.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::Numeric {
            deepest_valid: n.saturating_sub(1),
            reason: format!("closed form {closed:e} and atom sum {direct:e} disagree"),
        });
    }
    Ok(closed)
}

/// The same quantity as a static entropy of `2ⁿ` atoms of measure `δ 2^{−n−1}`.
pub fn tower_restricted_entropy_direct(g: &GFunction, delta: f64, n: u64) -> Result<f64> {
    check_tower(delta, n)?;
    let p = LogProb::new(delta.log2() - n as f64 - 1.0)?;
    let count = if n < 65_536 {
        Multiplicity::Exact(BigUint::from(1u32) << n)
    } else {
        Multiplicity::Log2(n as f64)
    };
    CylinderDistribution::sub_probability(n, vec![Atom::new(p, count)])?.static_entropy(g)
}

/// `H_r − |g′₋(1/2)| − d_max`.
pub fn restricted_entropy_lower_bound(g: &GFunction, h_restricted: f64) -> Result<f64> {
    Ok(h_restricted - GConstants::of(g)?.total())
}

fn require_infinity_class(g: &GFunction) -> Result<()> {
    let r = estimate_ratio_limits(g, &GFunction::shannon(), DEFAULT_DEPTH, 2)?;
    if r.classification != GClass::G0Infinity {
        return Err(Error::Precondition(format!(
            "`{}` is {} rather than G0_infinity",
            g.name(),
            r.classification.as_str()
        )));
    }
    Ok(())
}

/// `log₂(φ_g(x)/φ_η(x))` at `x = δ 2^{−N−1}`.
fn log2_ratio(g: &GFunction, delta: f64, n: u64) -> Result<f64> {
    let l = delta.log2() - n as f64 - 1.0;
    Ok(g.log2_phi(l)? - GFunction::shannon().log2_phi(l)?)
}

/// The ratio inequality from `g(x)` and `η(x)` directly, `x = δ 2^{−N−1}`.
fn ratio_inequality_holds(g: &GFunction, delta: f64, n: u64, m: f64) -> Result<bool> {
    let l = delta.log2() - n as f64 - 1.0;
    let lhs = (g.log2_value(l)? - GFunction::shannon().log2_value(l)?).exp2();
    Ok(lhs > 2.0 * m / (delta * std::f64::consts::LN_2))
}

/// Smallest `N ≥ 1` with `φ_g(δ2^{−N−1})/φ_η(δ2^{−N−1}) > 2M/(δ ln 2)`.
pub fn choose_nn(g: &GFunction, delta: f64, m: f64) -> Result<u64> {
    choose_nn_with_horizon(g, delta, m, search_horizon())
}

pub fn choose_nn_with_horizon(g: &GFunction, delta: f64, m: f64, horizon: u64) -> Result<u64> {
    check_tower(delta, 1)?;
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Precondition(format!(
            "target M = {m} must be positive"
        )));
    }
    require_infinity_class(g)?;
    let need = (2.0 * m / (delta * std::f64::consts::LN_2)).log2();
    let mut best = f64::NEG_INFINITY;
    for n in 1..=horizon {
        let r = log2_ratio(g, delta, n)?;
        best = best.max(r);
        if r > need {
            if !ratio_inequality_holds(g, delta, n, m)? {
                return Err(Error::Numeric {
                    deepest_valid: n - 1,
                    reason: format!("N = {n} passes the scan but fails re-verification"),
                });
            }
            return Ok(n);
        }
    }
    Err(Error::HorizonExhausted {
        horizon,
        reason: format!(
            "largest ratio φ_g/φ_η reached is {:e}, below {:e}",
            best.exp2(),
            need.exp2()
        ),
    })
}

/// `(ln 2/2)·δ·(N+1)/N·ratio − (|g′₋(1/2)| + d_max + 1)/N`.
pub fn certified_bound(g: &GFunction, consts: &GConstants, delta: f64, n: u64) -> Result<f64> {
    check_tower(delta, n)?;
    let nf = n as f64;
    let ratio = log2_ratio(g, delta, n)?.exp2();
    Ok(
        0.5 * std::f64::consts::LN_2 * delta * (nf + 1.0) / nf * ratio
            - (consts.total() + CONTINUITY_SLACK) / nf,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TowerStage {
    pub index: usize,
    pub delta: f64,
    pub n: u64,
    /// `φ_g/φ_η` at `δ 2^{−N−1}`.
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerSchedule {
    pub g_name: String,
    pub m: f64,
    pub g_constants: GConstants,
    pub stages: Vec<TowerStage>,
    /// The final bound is at least `M − epsilon`.
    pub epsilon: f64,
}

impl TowerSchedule {
    pub fn tail_bound(&self) -> f64 {
        self.stages.last().map_or(f64::NEG_INFINITY, |s| s.bound)
    }
}

/// Stages `δ_n = δ_{n−1}/4`, `N_n = choose_nn(g, δ_n, M)` from `δ_0 = 1`.
pub fn lower_bound_schedule(g: &GFunction, m: f64, stages: usize) -> Result<TowerSchedule> {
    if stages == 0 || stages > MAX_TOWER_STAGES {
        return Err(Error::Precondition(format!(
            "stages must lie in 1..={MAX_TOWER_STAGES}"
        )));
    }
    require_infinity_class(g)?;
    let consts = GConstants::of(g)?;
    let horizon = search_horizon();
    let mut out = Vec::with_capacity(stages);
    let mut delta = 1.0;
    for index in 1..=stages {
        delta /= 4.0;
        let n = choose_nn_with_horizon(g, delta, m, horizon)?;
        out.push(TowerStage {
            index,
            delta,
            n,
            ratio: log2_ratio(g, delta, n)?.exp2(),
            bound: certified_bound(g, &consts, delta, n)?,
        });
    }
    Ok(TowerSchedule {
        g_name: g.name().to_string(),
        m,
        g_constants: consts,
        stages: out,
        epsilon: m / stages as f64,
    })
}

/// Independent re-check of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleCheck {
    pub halving: bool,
    /// The ratio inequality at each stage.
    pub ratio_inequality: Vec<bool>,
    /// `N_n` is the smallest admissible value.
    pub minimal: Vec<bool>,
    pub tail_ok: bool,
}

impl ScheduleCheck {
    pub fn passed(&self) -> bool {
        self.halving
            && self.tail_ok
            && self.ratio_inequality.iter().all(|&b| b)
            && self.minimal.iter().all(|&b| b)
    }
}

pub fn verify_schedule(g: &GFunction, s: &TowerSchedule) -> Result<ScheduleCheck> {
    let mut prev = 1.0;
    let mut halving = true;
    let mut ratio_inequality = Vec::with_capacity(s.stages.len());
    let mut minimal = Vec::with_capacity(s.stages.len());
    let holds = |delta: f64, n: u64| ratio_inequality_holds(g, delta, n, s.m);
    for st in &s.stages {
        halving &= st.delta < prev / 2.0;
        prev = st.delta;
        ratio_inequality.push(holds(st.delta, st.n)?);
        minimal.push(st.n == 1 || !holds(st.delta, st.n - 1)?);
    }
    let tail_ok = s.tail_bound() >= s.m - s.epsilon;
    Ok(ScheduleCheck {
        halving,
        ratio_inequality,
        minimal,
        tail_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restricted_entropy_examples() {
        let eta = GFunction::shannon();
        assert!((tower_restricted_entropy(&eta, 1.0, 1).unwrap() - 2f64.ln()).abs() < 1e-15);
        let sq = GFunction::power(0.5).unwrap();
        assert!((tower_restricted_entropy(&sq, 1.0, 3).unwrap() - 2.0).abs() < 1e-14);
        let d = tower_restricted_entropy_direct(&sq, 0.3, 7).unwrap();
        let c = tower_restricted_entropy(&sq, 0.3, 7).unwrap();
        assert!((c - d).abs() < 1e-12 * c);
        assert!(tower_restricted_entropy(&sq, 0.0, 3).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let eta = GFunction::shannon();
        let b = restricted_entropy_lower_bound(&eta, 5.0).unwrap();
        let want = 5.0 - (1.0 - 2f64.ln()) - (-1f64).exp();
        assert!((b - want).abs() < 1e-9, "{b}");
        let sq = GFunction::power(0.5).unwrap();
        let b = restricted_entropy_lower_bound(&sq, 5.0).unwrap();
        assert!((b - (5.0 - 0.5f64.sqrt() - 1.0)).abs() < 1e-9, "{b}");
        let c = GConstants::of(&sq).unwrap();
        assert!(
            restricted_entropy_lower_bound(&sq, c.total())
                .unwrap()
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn choose_nn_scan() {
        let sq = GFunction::power(0.5).unwrap();
        // 2^{(N+2)/2}/(N+2) > 4 first at N + 2 = 11.
        assert_eq!(choose_nn(&sq, 0.5, 1.0).unwrap(), 9);
        assert!(choose_nn(&sq, 0.5, 10.0).unwrap() > 9);
        assert!(matches!(
            choose_nn(&GFunction::shannon(), 0.5, 1.0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            choose_nn_with_horizon(&sq, 0.5, 1e30, 50),
            Err(Error::HorizonExhausted { .. })
        ));
    }

    #[test]
    fn sqrt_schedule() {
        let sq = GFunction::power(0.5).unwrap();
        let s = lower_bound_schedule(&sq, 1.0, 4).unwrap();
        assert!(verify_schedule(&sq, &s).unwrap().passed());
        assert!(s.tail_bound() >= 0.75);
        assert!(lower_bound_schedule(&GFunction::havrda_charvat(2.0).unwrap(), 1.0, 2).is_err());
    }
}
