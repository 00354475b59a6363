//! The block-concatenation subshift with prescribed g-entropy.
//!
//! Level-`n` blocks have length `h_n = k^n Π_{i<n} r_i` and there are
//! `b_n = k^{k^n}` of them, each of measure `1/b_n`. All quantities tied to
//! `b_n` are kept in `log₂`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfun::{estimate_ratio_limits, estimate_u, GClass, GFunction, DEFAULT_DEPTH};
use crate::measure::{biguint_log2, CylinderDistribution};
use crate::numeric::log2_sum;

/// Exact block lengths are kept while they need at most this many bits.
const EXACT_BITS_CAP: u64 = 1 << 16;
/// Default number of candidates examined per stage.
pub const DEFAULT_HORIZON: u64 = 1_000_000;
/// Largest candidate index: beyond it `log₂ a_n ≈ 2^{n+1}` carries too few
/// correct bits after the binary point to decide the windows.
pub const MAX_CANDIDATE_INDEX: u64 = 44;
/// Most stages accepted by [`build_r_for_target`].
pub const MAX_STAGES: usize = 8;
/// Required margin in `U(2) > 1 + margin`.
pub const U2_MARGIN: f64 = 1e-3;
/// Largest stage for which the ξ sequence is materialized.
const MAX_XI_STAGE: u64 = 21;

/// An integer stored as `log₂` with its exact value when affordable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigCount {
    pub log2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<BigUint>,
}

impl BigCount {
    fn exact(n: BigUint) -> Self {
        Self {
            log2: biguint_log2(&n),
            exact: Some(n),
        }
    }

    fn from_u64(n: u64) -> Self {
        Self::exact(BigUint::from(n))
    }
}

/// One accepted stage of the inductive choice of `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// `N_m`.
    pub n: u64,
    /// `R_m`, placed at `r_{N_{m−1}}` (at `r_0` for the first stage).
    pub r: BigCount,
    /// `γ_{N_m}` divided by the target.
    pub gamma_ratio: f64,
    /// Candidates rejected before `N_m` was accepted.
    pub rejected: u64,
}

/// The sequences `b_n, r_n, h_n, D_n` of the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionState {
    pub k: u32,
    /// `r_0, …, r_{S−1}`; blocks are materialized up to `h_S`.
    pub r: Vec<BigCount>,
    /// `h_0, …, h_S`.
    pub h: Vec<BigCount>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_name: Option<String>,
}

/// `log₂ φ_g(2^{-2^{n+1}}) − (n+1) = log₂ a_n`.
fn log2_a(g: &GFunction, n: u64) -> Result<f64> {
    let l = -(2f64.powi(n as i32 + 1));
    Ok(g.log2_phi(l)? - (n + 1) as f64)
}

impl ConstructionState {
    /// State for explicit repetition counts `r_0, …, r_{S−1}`.
    pub fn with_r(k: u32, r: &[u64]) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidSystem(format!("k = {k} is below 2")));
        }
        if r.contains(&0) {
            return Err(Error::InvalidSystem("r_n must be at least 1".into()));
        }
        Self::from_counts(k, r.iter().map(|&x| BigCount::from_u64(x)).collect())
    }

    fn from_counts(k: u32, r: Vec<BigCount>) -> Result<Self> {
        let mut h = vec![BigCount::from_u64(1)];
        for ri in &r {
            let prev = h.last().expect("h_0");
            let log2 = prev.log2 + f64::from(k).log2() + ri.log2;
            let exact = match (&prev.exact, &ri.exact) {
                (Some(a), Some(b)) if log2 < EXACT_BITS_CAP as f64 => Some(a * b * k),
                _ => None,
            };
            h.push(BigCount { log2, exact });
        }
        Ok(Self {
            k,
            r,
            h,
            target_gamma: None,
            stages: Vec::new(),
            g_name: None,
        })
    }

    /// Index of the last materialized block length.
    pub fn stages_materialized(&self) -> u64 {
        self.r.len() as u64
    }

    /// `log₂ b_n = k^n log₂ k`.
    pub fn log2_b(&self, n: u64) -> f64 {
        f64::from(self.k).powi(n as i32) * f64::from(self.k).log2()
    }

    /// `h_n`.
    pub fn h(&self, n: u64) -> Result<&BigCount> {
        self.h.get(n as usize).ok_or_else(|| {
            Error::NotMaterialized(format!(
                "h_{n} needs r_0..r_{}; only {} are known",
                n.saturating_sub(1),
                self.r.len()
            ))
        })
    }

    fn exact_h(&self, n: u64) -> Result<&BigUint> {
        self.h(n)?
            .exact
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("h_{n} exceeds the exact-integer budget")))
    }

    /// `h_n′ = k·h_n`.
    pub fn h_prime(&self, n: u64) -> Result<BigCount> {
        let h = self.h(n)?;
        Ok(BigCount {
            log2: h.log2 + f64::from(self.k).log2(),
            exact: h.exact.as_ref().map(|x| x * self.k),
        })
    }

    /// `D_n = Σ_{i<n} h_i`.
    pub fn determining_prefix(&self, n: u64) -> Result<BigCount> {
        if n > self.stages_materialized() + 1 {
            self.h(n - 1)?;
        }
        let logs: Vec<f64> = (0..n).map(|i| self.h[i as usize].log2).collect();
        let exact = (0..n)
            .map(|i| self.h[i as usize].exact.clone())
            .try_fold(BigUint::zero(), |acc, x| x.map(|v| acc + v));
        Ok(BigCount {
            log2: log2_sum(&logs),
            exact,
        })
    }

    /// First length at which all `b_n` level-`n` blocks are distinguished:
    /// `D_n + 1`.
    pub fn saturation_length(&self, n: u64) -> Result<BigUint> {
        let d = self.determining_prefix(n)?;
        d.exact
            .map(|x| x + 1u32)
            .ok_or_else(|| Error::Unsupported(format!("D_{n} exceeds the exact-integer budget")))
    }

    fn log2_count_at_stage(&self, n: u64, m: &BigUint) -> Result<f64> {
        if n == 0 {
            return Ok(f64::from(self.k).log2());
        }
        let h = self.exact_h(n - 1)?;
        if m <= h {
            return self.log2_count_at_stage(n - 1, m);
        }
        // m lies in the j-th copy of a level-(n−1) block, 1-based.
        let j = (m - 1u32) / h + 1u32;
        if j > BigUint::from(self.k) {
            return Ok(self.log2_b(n));
        }
        let jm1 = (&j - 1u32).to_u64().expect("j ≤ k");
        let rest = m - h * jm1;
        Ok(jm1 as f64 * self.log2_b(n - 1) + self.log2_count_at_stage(n - 1, &rest)?)
    }

    /// `(log₂ N(m), −log₂ N(m))` for the number `N(m)` of positive-measure
    /// `m`-cylinders under the staircase model.
    ///
    /// A length-`m` prefix of a level-`n` block inside its `j`-th constituent
    /// block multiplies the count by `b_{n−1}` per completed constituent.
    pub fn count_profile(&self, m: &BigUint) -> Result<(f64, f64)> {
        if m.is_zero() {
            return Err(Error::Precondition("m must be at least 1".into()));
        }
        let top = self.stages_materialized();
        let mut n = 0;
        while self.exact_h(n)? < m {
            n += 1;
            if n > top {
                return Err(Error::NotMaterialized(format!("m = {m} exceeds h_{top}")));
            }
        }
        let c = self.log2_count_at_stage(n, m)?;
        Ok((c, -c))
    }

    /// The uniform `m`-cylinder distribution of the staircase model.
    pub fn distribution(&self, m: &BigUint) -> Result<CylinderDistribution> {
        let (c, _) = self.count_profile(m)?;
        let level = m.to_u64().unwrap_or(u64::MAX);
        if c.fract() == 0.0 && c < 64.0 {
            CylinderDistribution::uniform(level, BigUint::one() << (c as u64))
        } else {
            CylinderDistribution::uniform_log2(level, c)
        }
    }

    /// `log₂` of the minimum length realizing `2^c` cylinders (`k = 2`).
    fn log2_min_length(&self, c: u64) -> Result<f64> {
        // P(2^{i−1} + j) = h_{i−1} + P(j), P(1) = 1.
        let mut logs = Vec::new();
        let mut c = c;
        while c > 1 {
            let i = 64 - (c - 1).leading_zeros() as u64; // c ∈ (2^{i−1}, 2^i]
            logs.push(self.h(i - 1)?.log2);
            c -= 1u64 << (i - 1);
        }
        logs.push(0.0);
        Ok(log2_sum(&logs))
    }

    /// `ξ_j^{(n)} = φ(2^{−2^{n−1}−j}) / b_j^{(n)}` for `j = 1..=2^{n−1}`.
    pub fn xi_sequence(&self, g: &GFunction, n: u64) -> Result<Vec<f64>> {
        if self.k != 2 {
            return Err(Error::Unsupported("ξ sequences need k = 2".into()));
        }
        if n == 0 {
            return Err(Error::Precondition("stage n must be at least 1".into()));
        }
        if n > MAX_XI_STAGE {
            return Err(Error::Budget {
                n,
                reason: format!("2^{} values", n - 1),
            });
        }
        if n > self.stages_materialized() {
            return Err(Error::NotMaterialized(format!("stage {n} needs h_{}", n)));
        }
        let half = 1u64 << (n - 1);
        (1..=half)
            .map(|j| {
                let c = half + j;
                let lphi = g.log2_phi(-(c as f64))?;
                Ok((lphi - self.log2_min_length(c)?).exp2())
            })
            .collect()
    }

    /// `log₂ Σ_{i=1}^{n} 2^{i−n−1} Π_{j<i} r_j`.
    fn log2_gamma_denominator(&self, n: u64) -> f64 {
        let mut logs = Vec::with_capacity(n as usize);
        let mut prod = 0.0;
        for i in 1..=n {
            prod += self.r[(i - 1) as usize].log2;
            logs.push(i as f64 - n as f64 - 1.0 + prod);
        }
        log2_sum(&logs)
    }

    /// `γ_n = 2^{n+1} a_n / (2r_0 + 4r_0r_1 + … + 2^n r_0⋯r_{n−1})` for
    /// `n = 1..=n_max`.
    pub fn gamma_sequence(&self, g: &GFunction, n_max: u64) -> Result<Vec<f64>> {
        if self.k != 2 {
            return Err(Error::Unsupported("γ sequences need k = 2".into()));
        }
        if n_max > self.stages_materialized() {
            return Err(Error::NotMaterialized(format!(
                "γ_{n_max} needs r_0..r_{}",
                n_max - 1
            )));
        }
        let mut out = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            let direct = log2_a(g, n)? - self.log2_gamma_denominator(n);
            // Same value as φ(1/b_{n+1}) / (h_1 + … + h_n).
            let l = -(2f64.powi(n as i32 + 1));
            let hsum: Vec<f64> = (1..=n).map(|i| self.h[i as usize].log2).collect();
            let via_blocks = g.log2_phi(l)? - log2_sum(&hsum);
            if (direct - via_blocks).abs() > 1e-9 * direct.abs().max(1.0) {
                return Err(Error::Numeric {
                    deepest_valid: n - 1,
                    reason: format!("γ_{n} disagrees between the sum form and the block form"),
                });
            }
            out.push(direct.exp2());
        }
        Ok(out)
    }
}

/// Per-stage search horizon, from `GENTROPY_HORIZON` when set.
pub fn search_horizon() -> u64 {
    std::env::var("GENTROPY_HORIZON")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_HORIZON)
}

/// Integer part of `2^{lx}` as a count (`lx ≥ 0`).
fn floor_count(lx: f64) -> BigCount {
    if lx < 52.0 {
        let x = lx.exp2().floor();
        BigCount::exact(BigUint::from(x as u64))
    } else {
        // Values this large are integers in f64 already.
        let exact = (lx < 1023.0).then(|| exact_from_f64(lx.exp2())).flatten();
        BigCount { log2: lx, exact }
    }
}

fn exact_from_f64(x: f64) -> Option<BigUint> {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64 - 1075;
    let mant = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    (exp >= 0).then(|| BigUint::from(mant) << exp as u64)
}

/// Chooses `r` so that `limsup γ_n = gamma`, stage by stage.
///
/// Stage 0 picks the smallest `N_0 ≥ 2` with `a_{N_0}/(1−2^{−N_0})` within
/// `(1 ± 1/N_0)` of its integer part and `γ_n ≤ γ_{N_0}` for `n ≤ N_0`.
/// Stage `m` picks the smallest `N > N_{m−1}` with `X = a_N / (R_0⋯R_{m−1}(1 −
/// 2^{N_{m−1}−N}))` satisfying the rounding bound `[X]/X > 1 − 1/(N+1)`, the
/// window `σ₂ < [X] ≤ X < σ₁`, and `γ_n ≤ γ_N` on `(N_{m−1}, N)`; it sets
/// `R_m = [X]` at `r_{N_{m−1}}`, which makes `γ_N = X/(R_m + α_N)` exact.
pub fn build_r_for_target(g: &GFunction, gamma: f64, stages: usize) -> Result<ConstructionState> {
    build_r_with_horizon(g, gamma, stages, search_horizon())
}

pub fn build_r_with_horizon(
    g: &GFunction,
    gamma: f64,
    stages: usize,
    horizon: u64,
) -> Result<ConstructionState> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Precondition(format!(
            "target γ = {gamma} must be positive"
        )));
    }
    if stages == 0 || stages > MAX_STAGES {
        return Err(Error::Precondition(format!(
            "stages must lie in 1..={MAX_STAGES}"
        )));
    }
    let class = estimate_ratio_limits(g, &GFunction::shannon(), DEFAULT_DEPTH, 2)?;
    if class.classification != GClass::G0Infinity {
        return Err(Error::Precondition(format!(
            "`{}` is {} rather than G0_infinity",
            g.name(),
            class.classification.as_str()
        )));
    }
    let u2 = estimate_u(g, 2.0, DEFAULT_DEPTH)?;
    if !(u2 > 1.0 + U2_MARGIN) {
        return Err(Error::Precondition(format!(
            "U(2) estimate {u2:.6} for `{}` is not above 1 + {U2_MARGIN}",
            g.name()
        )));
    }

    let lg = gamma.log2();
    // log₂ ã_n with ã_n = a_n / γ.
    let la = |n: u64| -> Result<f64> { Ok(log2_a(g, n)? - lg) };

    let mut r: Vec<BigCount> = Vec::new();
    let mut records: Vec<StageRecord> = Vec::new();
    // log₂ Π R_i of accepted stages.
    let mut log2_prod = 0.0;
    let mut prev_n: u64 = 0;

    for m in 0..stages {
        let first = if m == 0 { 2 } else { prev_n + 1 };
        let last = first.saturating_add(horizon - 1).min(MAX_CANDIDATE_INDEX);
        let mut rejected = 0;
        let mut last_reason = String::from("no candidates");
        let mut accepted: Option<(u64, BigCount, f64)> = None;
        for cand in first..=last {
            let nf = cand as f64;
            // log₂(1 − 2^{N_{m−1} − N}); N_{−1} = 0.
            let ly = crate::numeric::log2_one_minus_exp2(prev_n as f64 - nf);
            let lx = la(cand)? - log2_prod - ly;
            if lx < 0.0 {
                rejected += 1;
                last_reason = format!("N = {cand}: [X] = 0");
                continue;
            }
            let rm = floor_count(lx);
            let ratio = (rm.log2 - lx).exp2(); // [X]/X
            if m == 0 {
                // Inequality (1): X/[X] ∈ (1 − 1/N, 1 + 1/N).
                let inv = 1.0 / ratio;
                if !(inv > 1.0 - 1.0 / nf && inv < 1.0 + 1.0 / nf) {
                    rejected += 1;
                    last_reason = format!("N = {cand}: X/[X] = {inv} outside (1 ± 1/N)");
                    continue;
                }
            } else {
                // Inequality (2).
                if !(ratio > 1.0 - 1.0 / (nf + 1.0)) {
                    rejected += 1;
                    last_reason = format!("N = {cand}: [X]/X = {ratio} ≤ 1 − 1/(N+1)");
                    continue;
                }
                // Window σ₂ < [X] ≤ X < σ₁, in units of X.
                let alpha = alpha_over_x(&records, prev_n, cand, ly, lx);
                let s1 = nf / (nf - 1.0) - alpha;
                let s2 = nf / (nf + 1.0) - alpha;
                if !(s2 < ratio && ratio <= 1.0 && 1.0 < s1) {
                    rejected += 1;
                    last_reason =
                        format!("N = {cand}: window σ₂/X = {s2}, [X]/X = {ratio}, σ₁/X = {s1}");
                    continue;
                }
            }
            // Trial r with R_m at index N_{m−1} and ones up to N − 1.
            let mut trial = r.clone();
            trial.push(rm.clone());
            while (trial.len() as u64) < cand {
                trial.push(BigCount::from_u64(1));
            }
            let st = ConstructionState::from_counts(2, trial)?;
            let gammas: Vec<f64> = (1..=cand)
                .map(|n| Ok((la(n)? - st.log2_gamma_denominator(n)).exp2()))
                .collect::<Result<_>>()?;
            let g_n = gammas[cand as usize - 1];
            if !(g_n > 1.0 - 1.0 / nf && g_n < 1.0 + 1.0 / nf) {
                rejected += 1;
                last_reason = format!("N = {cand}: γ_N/γ = {g_n} outside (1 ± 1/N)");
                continue;
            }
            let lo = if m == 0 { 1 } else { prev_n + 1 };
            if let Some(bad) = (lo..cand).find(|&n| gammas[n as usize - 1] > g_n) {
                rejected += 1;
                last_reason = format!(
                    "N = {cand}: γ_{bad}/γ = {} exceeds γ_N/γ = {g_n}",
                    gammas[bad as usize - 1]
                );
                continue;
            }
            accepted = Some((cand, rm, g_n));
            break;
        }
        let Some((n_m, rm, g_n)) = accepted else {
            return Err(Error::HorizonExhausted {
                horizon: last.saturating_sub(first) + 1,
                reason: format!("stage {m}: {last_reason}"),
            });
        };
        log2_prod += rm.log2;
        r.push(rm.clone());
        while (r.len() as u64) < n_m {
            r.push(BigCount::from_u64(1));
        }
        records.push(StageRecord {
            n: n_m,
            r: rm,
            gamma_ratio: g_n,
            rejected,
        });
        prev_n = n_m;
    }
    // r_{N_last} stays 1 until a further stage would set it.
    r.push(BigCount::from_u64(1));
    let mut st = ConstructionState::from_counts(2, r)?;
    st.target_gamma = Some(gamma);
    st.stages = records;
    st.g_name = Some(g.name().to_string());
    Ok(st)
}

/// `α_N / X` for the stage after `records`.
fn alpha_over_x(records: &[StageRecord], prev_n: u64, n: u64, ly: f64, lx: f64) -> f64 {
    // α_N = Σ_k 2^{N_k−N}(1 − 2^{N_{k−1}−N_k}) / ((1 − 2^{N_{m−1}−N}) R_{k+1}⋯R_{m−1})
    let m = records.len();
    let mut terms = Vec::with_capacity(m);
    for k in 0..m {
        let nk = records[k].n as f64;
        let nkm1 = if k == 0 { 0.0 } else { records[k - 1].n as f64 };
        let tail: f64 = records[k + 1..].iter().map(|s| s.r.log2).sum();
        let lt = (nk - n as f64) + crate::numeric::log2_one_minus_exp2(nkm1 - nk) - ly - tail;
        terms.push(lt);
    }
    debug_assert_eq!(records.last().map(|s| s.n), Some(prev_n));
    (log2_sum(&terms) - lx).exp2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_r_block_lengths() {
        let st = ConstructionState::with_r(2, &[1, 1, 1, 1]).unwrap();
        for n in 0..=4u64 {
            assert_eq!(st.h(n).unwrap().exact, Some(BigUint::from(1u64 << n)));
        }
        assert_eq!(st.log2_b(5), 32.0);
        assert_eq!(
            st.determining_prefix(4).unwrap().exact,
            Some(BigUint::from(15u32))
        );
        assert_eq!(st.h_prime(2).unwrap().exact, Some(BigUint::from(8u32)));
        assert!(st.h(5).is_err());
    }

    #[test]
    fn count_profile_endpoints() {
        let st = ConstructionState::with_r(2, &[3, 1, 2, 1]).unwrap();
        assert_eq!(st.count_profile(&BigUint::from(1u32)).unwrap(), (1.0, -1.0));
        for n in 1..=4u64 {
            let h = st.h(n).unwrap().exact.clone().unwrap();
            let (c, p) = st.count_profile(&h).unwrap();
            assert_eq!(c, st.log2_b(n));
            assert_eq!(p, -st.log2_b(n));
            let sat = st.saturation_length(n).unwrap();
            assert_eq!(st.count_profile(&sat).unwrap().0, st.log2_b(n));
            let before = st.count_profile(&(sat - 1u32)).unwrap().0;
            assert!(before < st.log2_b(n));
        }
        let mut prev = 0.0;
        let top = st.h(4).unwrap().exact.clone().unwrap().to_u64().unwrap();
        for m in 1..=top {
            let (c, _) = st.count_profile(&BigUint::from(m)).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        assert!(matches!(
            st.count_profile(&BigUint::from(top + 1)),
            Err(Error::NotMaterialized(_))
        ));
    }

    #[test]
    fn xi_with_trivial_r() {
        let st = ConstructionState::with_r(2, &[1, 1, 1]).unwrap();
        let g = GFunction::power(0.5).unwrap();
        let xi = st.xi_sequence(&g, 3).unwrap();
        assert_eq!(xi.len(), 4);
        for (j, v) in xi.iter().enumerate() {
            let c = 5.0 + j as f64;
            assert!((v - (c / 2.0).exp2() / c).abs() < 1e-12, "{j}: {v}");
        }
        let one = st.xi_sequence(&g, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0] - 2f64.powf(1.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_with_trivial_r_and_shannon() {
        let st = ConstructionState::with_r(2, &[1; 12]).unwrap();
        let eta = GFunction::shannon();
        let gam = st.gamma_sequence(&eta, 12).unwrap();
        for (i, v) in gam.iter().enumerate() {
            let n = i as i32 + 1;
            let want = 2f64.powi(n + 1) * 2f64.ln() / (2f64.powi(n + 1) - 2.0);
            assert!((v - want).abs() < 1e-12, "{n}: {v} vs {want}");
        }
        let st = ConstructionState::with_r(2, &[5]).unwrap();
        let g = GFunction::power(0.5).unwrap();
        let a1 = (2f64.powi(4).log2() / 2.0).exp2() / 4.0;
        assert!((st.gamma_sequence(&g, 1).unwrap()[0] - 4.0 * a1 / 10.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_construction_three_stages() {
        let g = GFunction::power(0.5).unwrap();
        let st = build_r_for_target(&g, 1.0, 3).unwrap();
        let ns: Vec<u64> = st.stages.iter().map(|s| s.n).collect();
        let rs: Vec<f64> = st.stages.iter().map(|s| s.r.log2.exp2()).collect();
        assert_eq!(ns, vec![2, 3, 4]);
        assert_eq!(rs, vec![2.0, 16.0, 128.0]);
        let last = st.stages.last().unwrap();
        assert!((last.gamma_ratio - 128.0 / (128.0 + 0.5234375)).abs() < 1e-12);
    }

    #[test]
    fn refuses_log_square_and_shannon() {
        let ls = GFunction::log_square();
        assert!(matches!(
            build_r_for_target(&ls, 1.0, 2),
            Err(Error::Precondition(_))
        ));
        let eta = GFunction::shannon();
        assert!(matches!(
            build_r_for_target(&eta, 1.0, 2),
            Err(Error::Precondition(_))
        ));
    }
}
