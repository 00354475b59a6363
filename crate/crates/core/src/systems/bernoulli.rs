use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Atom, CylinderDistribution, LogProb, Multiplicity};

/// Largest number of type classes enumerated for one level.
pub const DEFAULT_COMPOSITION_BUDGET: u64 = 5_000_000;
/// Levels above this are refused in exact mode.
pub const MAX_EXACT_LEVEL: u64 = 1000;

/// Symbols sharing one probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SymbolGroup {
    prob: LogProb,
    /// Number of symbols with this probability.
    size: BigUint,
}

/// Bernoulli shift on `k` symbols with probability vector `p`.
///
/// Symbols of equal probability are grouped, so each type class is a
/// composition of `n` over the distinct probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliSystem {
    groups: Vec<SymbolGroup>,
    alphabet: BigUint,
}

fn dyadic_exponent(p: f64) -> Option<u64> {
    let l = p.log2();
    (l.fract() == 0.0 && l <= 0.0 && l.exp2() == p).then(|| (-l) as u64)
}

impl BernoulliSystem {
    pub fn new(p: &[f64]) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::InvalidSystem(format!(
                "Bernoulli shift needs k ≥ 2 symbols, got {}",
                p.len()
            )));
        }
        if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::InvalidSystem(
                "probabilities must lie in [0, 1]".into(),
            ));
        }
        let total: f64 = crate::numeric::stable_sum(p.to_vec());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSystem(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut groups: Vec<SymbolGroup> = Vec::new();
        for &x in p.iter().filter(|&&x| x > 0.0) {
            match groups.iter_mut().find(|g| g.prob.prob() == x) {
                Some(g) => g.size += 1u32,
                None => groups.push(SymbolGroup {
                    prob: LogProb {
                        log2_p: x.log2(),
                        exact_dyadic: dyadic_exponent(x),
                    },
                    size: BigUint::one(),
                }),
            }
        }
        Ok(Self {
            groups,
            alphabet: BigUint::from(p.len()),
        })
    }

    /// Uniform measure on `k` symbols.
    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(&vec![1.0 / k as f64; k])
    }

    /// The system `T^m`, whose symbols are the words of length `m`.
    pub fn power(&self, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidSystem("power 0".into()));
        }
        let d = self.distribution(m)?;
        let groups = d
            .atoms()
            .iter()
            .map(|a| SymbolGroup {
                prob: a.prob,
                size: a
                    .multiplicity
                    .exact()
                    .cloned()
                    .expect("type-class multiplicities are exact"),
            })
            .collect();
        let exp = u32::try_from(m).map_err(|_| Error::Budget {
            n: m,
            reason: "power too large".into(),
        })?;
        Ok(Self {
            groups,
            alphabet: self.alphabet.pow(exp),
        })
    }

    pub fn alphabet_size(&self) -> &BigUint {
        &self.alphabet
    }

    /// Distinct symbol probabilities with the number of symbols carrying each.
    pub fn probability_groups(&self) -> Vec<(f64, BigUint)> {
        self.groups
            .iter()
            .map(|g| (g.prob.prob(), g.size.clone()))
            .collect()
    }

    /// `−Σ pᵢ ln pᵢ`.
    pub fn shannon_rate(&self) -> f64 {
        crate::numeric::stable_sum(
            self.groups
                .iter()
                .map(|g| {
                    let p = g.prob.prob();
                    -crate::measure::biguint_log2(&g.size).exp2() * p * p.ln()
                })
                .collect(),
        )
    }

    /// Number of type classes at level `n`.
    pub fn composition_count(&self, n: u64) -> f64 {
        // C(n + g − 1, g − 1)
        let g = self.groups.len() as u64;
        (1..g).fold(1.0, |acc, i| acc * (n + i) as f64 / i as f64)
    }

    /// Level-`n` cylinder distribution grouped by type classes.
    pub fn distribution(&self, n: u64) -> Result<CylinderDistribution> {
        self.distribution_with_budget(n, DEFAULT_COMPOSITION_BUDGET)
    }

    pub fn distribution_with_budget(&self, n: u64, budget: u64) -> Result<CylinderDistribution> {
        if n == 0 {
            return Ok(CylinderDistribution::point_mass());
        }
        if n > MAX_EXACT_LEVEL {
            return Err(Error::Budget {
                n,
                reason: format!("exact type classes are limited to n ≤ {MAX_EXACT_LEVEL}"),
            });
        }
        let count = self.composition_count(n);
        if count > budget as f64 {
            return Err(Error::Budget {
                n,
                reason: format!("{count:.3e} type classes exceed the budget of {budget}"),
            });
        }
        let nn = n as usize;
        let mut fact = Vec::with_capacity(nn + 1);
        fact.push(BigUint::one());
        for i in 1..=nn {
            let next = &fact[i - 1] * BigUint::from(i);
            fact.push(next);
        }
        let sizes: Vec<Vec<BigUint>> = self
            .groups
            .iter()
            .map(|g| {
                let mut pw = Vec::with_capacity(nn + 1);
                pw.push(BigUint::one());
                for c in 1..=nn {
                    let next = &pw[c - 1] * &g.size;
                    pw.push(next);
                }
                pw
            })
            .collect();

        let k = self.groups.len();
        let mut atoms = Vec::with_capacity(count as usize);
        for_each_composition(nn, k, &mut |comp| {
            let mut denom = BigUint::one();
            let mut weight = BigUint::one();
            let mut log2_p = 0.0;
            let mut dyadic = Some(0u64);
            for (i, &c) in comp.iter().enumerate() {
                denom *= &fact[c];
                weight *= &sizes[i][c];
                log2_p += c as f64 * self.groups[i].prob.log2_p;
                dyadic = match (dyadic, self.groups[i].prob.exact_dyadic) {
                    (Some(acc), Some(e)) => {
                        e.checked_mul(c as u64).and_then(|v| acc.checked_add(v))
                    }
                    _ => None,
                };
            }
            let mult = &fact[nn] / denom * weight;
            let log2_p = match dyadic {
                Some(e) => -(e as f64),
                None => log2_p.min(0.0),
            };
            atoms.push(Atom::new(
                LogProb {
                    log2_p,
                    exact_dyadic: dyadic,
                },
                Multiplicity::Exact(mult),
            ));
        });
        CylinderDistribution::new(n, atoms)
    }
}

/// Calls `f` on every composition of `n` into `k` nonnegative parts.
fn for_each_composition(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(i: usize, rem: usize, c: &mut [usize], f: &mut dyn FnMut(&[usize])) {
        if i + 1 == c.len() {
            c[i] = rem;
            f(c);
            return;
        }
        for v in 0..=rem {
            c[i] = v;
            rec(i + 1, rem - v, c, f);
        }
    }
    let mut c = vec![0; k];
    rec(0, n, &mut c, f);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfun::GFunction;

    fn all_compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for_each_composition(n, k, &mut |c| out.push(c.to_vec()));
        out
    }

    #[test]
    fn compositions_are_complete() {
        for (n, k) in [(0, 1), (3, 1), (4, 2), (5, 3), (4, 4)] {
            let all = all_compositions(n, k);
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), all.len());
            let want = (1..k).fold(1usize, |acc, i| acc * (n + i) / i);
            assert_eq!(all.len(), want, "n={n} k={k}");
            assert!(all.iter().all(|c| c.iter().sum::<usize>() == n));
        }
    }

    #[test]
    fn fair_coin_is_uniform() {
        let s = BernoulliSystem::new(&[0.5, 0.5]).unwrap();
        let d = s.distribution(3).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert_eq!(d.atoms()[0].prob.exact_dyadic, Some(3));
        assert_eq!(d.atoms()[0].multiplicity, Multiplicity::Exact(8u32.into()));
    }

    #[test]
    fn biased_coin_level_two() {
        let s = BernoulliSystem::new(&[0.3, 0.7]).unwrap();
        let d = s.distribution(2).unwrap();
        let mut got: Vec<(f64, f64)> = d
            .atoms()
            .iter()
            .map(|a| (a.prob.prob(), a.multiplicity.log2().exp2()))
            .collect();
        got.sort_by(|a, b| a.0.total_cmp(&b.0));
        let want = [(0.09, 1.0), (0.21, 2.0), (0.49, 1.0)];
        for (g, w) in got.iter().zip(want) {
            assert!((g.0 - w.0).abs() < 1e-15 && g.1 == w.1);
        }
    }

    #[test]
    fn zero_probabilities_are_skipped() {
        let s = BernoulliSystem::new(&[0.5, 0.0, 0.5]).unwrap();
        let d = s.distribution(4).unwrap();
        assert_eq!(d.atoms().len(), 1);
        let eta = GFunction::shannon();
        assert!((d.static_entropy(&eta).unwrap() - 4.0 * 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn power_system_matches_longer_words() {
        let s = BernoulliSystem::new(&[0.3, 0.7]).unwrap();
        let t3 = s.power(3).unwrap();
        assert_eq!(t3.alphabet_size(), &BigUint::from(8u32));
        let eta = GFunction::shannon();
        let a = t3.distribution(5).unwrap().static_entropy(&eta).unwrap();
        let b = s.distribution(15).unwrap().static_entropy(&eta).unwrap();
        assert!((a - b).abs() < 1e-12 * b);
    }

    #[test]
    fn invalid_inputs() {
        assert!(BernoulliSystem::new(&[1.0]).is_err());
        assert!(BernoulliSystem::new(&[0.5, 0.6]).is_err());
        assert!(BernoulliSystem::new(&[-0.5, 1.5]).is_err());
        let s = BernoulliSystem::new(&[0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(s.distribution(2000), Err(Error::Budget { .. })));
        assert!(matches!(
            s.distribution_with_budget(100, 10),
            Err(Error::Budget { .. })
        ));
    }
}
