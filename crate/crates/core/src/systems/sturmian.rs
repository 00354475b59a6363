use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfun::GFunction;
use crate::measure::{Atom, CylinderDistribution, LogProb, Multiplicity};
use crate::numeric::NeumaierSum;

/// Largest supported level.
pub const MAX_LEVEL: u64 = 1_000_000;
const RATIONAL_DENOMINATOR_BOUND: u128 = 1_000_000;
const RATIONAL_DISTANCE: f64 = 1e-15;

/// Coding of the rotation `x ↦ x + β mod 1` by `{[0, β), [β, 1)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SturmianSystem {
    beta: f64,
    /// Leading partial quotients `[0; a₁, a₂, …]` of `β`.
    continued_fraction: Vec<u64>,
}

impl SturmianSystem {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidSystem(format!("beta {beta} outside (0, 1)")));
        }
        if let Some((p, q)) = nearby_rational(beta) {
            return Err(Error::InvalidSystem(format!(
                "beta {beta} is within {RATIONAL_DISTANCE:e} of {p}/{q}"
            )));
        }
        Ok(Self {
            beta,
            continued_fraction: partial_quotients(beta, 24),
        })
    }

    /// `β = (√5 − 1)/2`.
    pub fn golden() -> Self {
        Self::new(0.5 * (5f64.sqrt() - 1.0)).expect("golden conjugate is irrational")
    }

    /// `golden`, a decimal, or `cf:a₁,a₂,…` (coefficients repeat periodically).
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim();
        if s == "golden" {
            return Ok(Self::golden());
        }
        if let Some(rest) = s.strip_prefix("cf:") {
            let coeffs = rest
                .split(',')
                .map(|c| c.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    input: spec.into(),
                    reason: e.to_string(),
                })?;
            if coeffs.is_empty() || coeffs.contains(&0) {
                return Err(Error::Parse {
                    input: spec.into(),
                    reason: "partial quotients must be positive".into(),
                });
            }
            return Self::new(periodic_cf_value(&coeffs));
        }
        let beta = s.parse::<f64>().map_err(|e| Error::Parse {
            input: spec.into(),
            reason: e.to_string(),
        })?;
        Self::new(beta)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn continued_fraction(&self) -> &[u64] {
        &self.continued_fraction
    }

    /// `frac(jβ)` with the rounding error of the product folded back in.
    fn orbit_point(&self, j: i64) -> f64 {
        let jf = j as f64;
        let prod = jf * self.beta;
        let err = jf.mul_add(self.beta, -prod);
        let mut x = (prod - prod.floor()) + err;
        if x < 0.0 {
            x += 1.0;
        }
        if x >= 1.0 {
            x -= 1.0;
        }
        x
    }

    fn sorted_points(&self, n: u64) -> Vec<f64> {
        let n = n as i64;
        let mut pts: Vec<f64> = (-(n - 1)..=1).map(|j| self.orbit_point(j)).collect();
        pts.sort_by(f64::total_cmp);
        pts
    }

    fn check_level(n: u64) -> Result<()> {
        if n == 0 || n > MAX_LEVEL {
            return Err(Error::Budget {
                n,
                reason: format!("Sturmian levels run from 1 to {MAX_LEVEL}"),
            });
        }
        Ok(())
    }

    /// Arc lengths of the `n+1` cylinders of length `n`.
    pub fn arcs(&self, n: u64) -> Result<Vec<f64>> {
        Self::check_level(n)?;
        let pts = self.sorted_points(n);
        let mut arcs: Vec<f64> = pts.windows(2).map(|w| w[1] - w[0]).collect();
        arcs.push(1.0 - pts[pts.len() - 1] + pts[0]);
        if arcs.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::Numeric {
                deepest_valid: n.saturating_sub(1),
                reason: "orbit points coincide at working precision".into(),
            });
        }
        Ok(arcs)
    }

    /// Level-`n` distribution with one atom per cylinder.
    pub fn distribution(&self, n: u64) -> Result<CylinderDistribution> {
        let atoms = self
            .arcs(n)?
            .into_iter()
            .map(|a| Ok(Atom::new(LogProb::from_prob(a)?, Multiplicity::one())))
            .collect::<Result<Vec<_>>>()?;
        CylinderDistribution::new_unmerged(n, atoms)
    }

    /// `H(g, P_n)` for `n = 1..=n_max`, updated one orbit point at a time.
    pub fn entropy_trace(&self, g: &GFunction, n_max: u64) -> Result<Vec<f64>> {
        Self::check_level(n_max)?;
        let eval = |a: f64| -> Result<f64> { Ok(g.log2_value(a.log2())?.exp2()) };
        let mut pts = self.sorted_points(1);
        let mut acc = NeumaierSum::new();
        for w in pts.windows(2) {
            acc.add(eval(w[1] - w[0])?);
        }
        acc.add(eval(1.0 - pts[pts.len() - 1] + pts[0])?);
        let mut out = Vec::with_capacity(n_max as usize);
        out.push(acc.value());
        for n in 2..=n_max {
            // Level n adds the point frac(−(n−1)β).
            let x = self.orbit_point(-(n as i64 - 1));
            let pos = pts.partition_point(|&p| p < x);
            let left = if pos == 0 {
                pts[pts.len() - 1] - 1.0
            } else {
                pts[pos - 1]
            };
            let right = if pos == pts.len() {
                pts[0] + 1.0
            } else {
                pts[pos]
            };
            let (a, b) = (x - left, right - x);
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::Numeric {
                    deepest_valid: n - 1,
                    reason: "orbit points coincide at working precision".into(),
                });
            }
            acc.add(eval(a)?);
            acc.add(eval(b)?);
            acc.add(-eval(right - left)?);
            pts.insert(pos, x);
            out.push(acc.value());
        }
        Ok(out)
    }
}

fn periodic_cf_value(coeffs: &[u64]) -> f64 {
    // Enough periods that the tail is below double precision.
    let reps = (64 / coeffs.len()).max(2) * 2;
    let seq: Vec<u64> = coeffs
        .iter()
        .copied()
        .cycle()
        .take(reps * coeffs.len())
        .collect();
    let mut x = 0.0;
    for &a in seq.iter().rev() {
        x = 1.0 / (a as f64 + x);
    }
    x
}

fn partial_quotients(beta: f64, max: usize) -> Vec<u64> {
    let (mut num, mut den) = exact_fraction(beta);
    let mut out = Vec::new();
    // Skip the integer part, which is zero.
    std::mem::swap(&mut num, &mut den);
    while den != 0 && out.len() < max {
        out.push((num / den) as u64);
        let r = num % den;
        num = den;
        den = r;
    }
    out
}

/// `beta` as `num / 2^e` exactly.
fn exact_fraction(beta: f64) -> (u128, u128) {
    let bits = beta.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    // beta = mant · 2^{exp − 1075}
    let shift = 1075 - exp;
    if shift >= 127 {
        return (0, 1);
    }
    let mut num = mant as u128;
    let mut den = 1u128 << shift;
    while num.is_multiple_of(2) && den > 1 {
        num /= 2;
        den /= 2;
    }
    (num, den)
}

/// A convergent `p/q` of `beta` with `q ≤ 10⁶` lying within `1e-15` of it.
fn nearby_rational(beta: f64) -> Option<(u128, u128)> {
    let (num, den) = exact_fraction(beta);
    let (mut a, mut b) = (num, den);
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    while b != 0 {
        let t = a / b;
        let (p2, q2) = (t * p1 + p0, t * q1 + q0);
        if q2 > RATIONAL_DENOMINATOR_BOUND {
            break;
        }
        if (beta - p2 as f64 / q2 as f64).abs() <= RATIONAL_DISTANCE {
            return Some((p2, q2));
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let r = a % b;
        a = b;
        b = r;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_one_is_the_defining_partition() {
        let s = SturmianSystem::golden();
        let mut arcs = s.arcs(1).unwrap();
        arcs.sort_by(f64::total_cmp);
        assert!((arcs[0] - 0.381966011250105).abs() < 1e-15);
        assert!((arcs[1] - 0.618033988749895).abs() < 1e-15);
    }

    #[test]
    fn level_two_three_distance() {
        let s = SturmianSystem::golden();
        let b = s.beta();
        let mut arcs = s.arcs(2).unwrap();
        arcs.sort_by(f64::total_cmp);
        // Points {1 − β, 0, β} sorted: 0 < 1 − β < β.
        let mut want = vec![1.0 - b, 2.0 * b - 1.0, 1.0 - b];
        want.sort_by(f64::total_cmp);
        for (a, w) in arcs.iter().zip(&want) {
            assert!((a - w).abs() < 1e-15);
        }
    }

    #[test]
    fn counts_and_mass() {
        let s = SturmianSystem::golden();
        for n in [1u64, 7, 100, 5000] {
            let d = s.distribution(n).unwrap();
            assert_eq!(d.atoms().len() as u64, n + 1);
            assert!((d.total_mass() - 1.0).abs() <= n as f64 * 1e-15);
        }
    }

    #[test]
    fn incremental_trace_matches_direct() {
        let s = SturmianSystem::parse("cf:2").unwrap();
        assert!((s.beta() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        let g = GFunction::power(0.5).unwrap();
        let trace = s.entropy_trace(&g, 300).unwrap();
        for n in [1u64, 2, 50, 300] {
            let d = s.distribution(n).unwrap().static_entropy(&g).unwrap();
            assert!((trace[n as usize - 1] - d).abs() < 1e-12 * d);
        }
    }

    #[test]
    fn rational_beta_is_refused() {
        assert!(SturmianSystem::new(0.5).is_err());
        assert!(SturmianSystem::new(1.0 / 3.0).is_err());
        assert!(SturmianSystem::parse("0.25").is_err());
        assert!(SturmianSystem::parse("cf:").is_err());
        assert!(SturmianSystem::new(1.5).is_err());
        assert_eq!(
            &SturmianSystem::golden().continued_fraction()[..5],
            &[1, 1, 1, 1, 1]
        );
    }
}
