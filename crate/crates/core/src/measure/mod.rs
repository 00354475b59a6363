//! Measure profiles of finite partitions and their static g-entropy.
//!
//! A [`CylinderDistribution`] stores each distinct cell measure once, in
//! `log₂`, together with how many cells carry it.

mod assignment;
mod multiplicity;

pub use assignment::partition_distance;
pub use multiplicity::{biguint_log2, Multiplicity};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfun::GFunction;
use crate::numeric::stable_sum;

/// Relative tolerance on the total mass.
pub const MASS_TOL: f64 = 1e-9;
/// Relative tolerance under which two `log₂ p` values are one atom.
pub const MERGE_TOL: f64 = 1e-15;
/// Default bound on the atom count of a product.
pub const DEFAULT_ATOM_CAP: usize = 10_000_000;

/// Measure of a cell, `2^{log2_p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProb {
    pub log2_p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_dyadic: Option<u64>,
}

impl LogProb {
    pub fn new(log2_p: f64) -> Result<Self> {
        if !(log2_p <= 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "log2 p = {log2_p} is not a valid log-probability"
            )));
        }
        Ok(Self {
            log2_p,
            exact_dyadic: None,
        })
    }

    /// `p = 2^{-e}`.
    pub fn dyadic(e: u64) -> Self {
        Self {
            log2_p: -(e as f64),
            exact_dyadic: Some(e),
        }
    }

    pub fn from_prob(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "probability {p} outside (0, 1]"
            )));
        }
        Self::new(p.log2())
    }

    pub fn prob(&self) -> f64 {
        self.log2_p.exp2()
    }

    fn product(&self, other: &LogProb) -> LogProb {
        LogProb {
            log2_p: self.log2_p + other.log2_p,
            exact_dyadic: match (self.exact_dyadic, other.exact_dyadic) {
                (Some(a), Some(b)) => a.checked_add(b),
                _ => None,
            },
        }
    }
}

/// `multiplicity` cells, each of measure `prob`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub prob: LogProb,
    pub multiplicity: Multiplicity,
}

impl Atom {
    pub fn new(prob: LogProb, multiplicity: Multiplicity) -> Self {
        Self { prob, multiplicity }
    }

    pub fn exact(log2_p: f64, count: u64) -> Result<Self> {
        Ok(Self::new(
            LogProb::new(log2_p)?,
            Multiplicity::Exact(BigUint::from(count)),
        ))
    }

    /// `log₂` of the mass carried by the atom.
    pub fn log2_mass(&self) -> f64 {
        self.multiplicity.log2() + self.prob.log2_p
    }
}

/// Measure profile of a partition at refinement level `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "repr::DistRepr", into = "repr::DistRepr")]
pub struct CylinderDistribution {
    level: u64,
    atoms: Vec<Atom>,
}

impl CylinderDistribution {
    /// Validates a probability profile and merges equal cell measures.
    pub fn new(level: u64, atoms: Vec<Atom>) -> Result<Self> {
        let d = Self::build(level, atoms, true)?;
        d.check_mass(false)?;
        Ok(d)
    }

    /// Like [`CylinderDistribution::new`] but keeps one atom per input entry.
    pub fn new_unmerged(level: u64, atoms: Vec<Atom>) -> Result<Self> {
        let d = Self::build(level, atoms, false)?;
        d.check_mass(false)?;
        Ok(d)
    }

    /// A profile of total mass at most one (a partition of a subset).
    pub fn sub_probability(level: u64, atoms: Vec<Atom>) -> Result<Self> {
        let d = Self::build(level, atoms, true)?;
        d.check_mass(true)?;
        Ok(d)
    }

    /// Profile of the given cell measures; zero cells are dropped.
    pub fn from_probs(level: u64, probs: &[f64]) -> Result<Self> {
        let atoms = probs
            .iter()
            .filter(|&&p| p != 0.0)
            .map(|&p| Ok(Atom::new(LogProb::from_prob(p)?, Multiplicity::one())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(level, atoms)
    }

    /// `count` cells of measure `1/count`.
    pub fn uniform(level: u64, count: BigUint) -> Result<Self> {
        if count == BigUint::from(0u32) {
            return Err(Error::InvalidDistribution("uniform over zero cells".into()));
        }
        let log2_p = -biguint_log2(&count);
        let exact_dyadic = (count.count_ones() == 1).then(|| count.bits() - 1);
        Self::new(
            level,
            vec![Atom::new(
                LogProb {
                    log2_p,
                    exact_dyadic,
                },
                Multiplicity::Exact(count),
            )],
        )
    }

    /// `k^n` cells of measure `k^{-n}`.
    pub fn uniform_power(k: u32, n: u64) -> Result<Self> {
        let exp = u32::try_from(n).map_err(|_| Error::Budget {
            n,
            reason: "exponent too large".into(),
        })?;
        Self::uniform(n, BigUint::from(k).pow(exp))
    }

    /// `2^{log2_count}` cells of measure `2^{-log2_count}`, count kept in log form.
    pub fn uniform_log2(level: u64, log2_count: f64) -> Result<Self> {
        Self::new(
            level,
            vec![Atom::new(
                LogProb::new(-log2_count)?,
                Multiplicity::Log2(log2_count),
            )],
        )
    }

    /// The trivial partition `{X}`.
    pub fn point_mass() -> Self {
        Self {
            level: 0,
            atoms: vec![Atom::new(LogProb::dyadic(0), Multiplicity::one())],
        }
    }

    fn build(level: u64, mut atoms: Vec<Atom>, merge: bool) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        for a in &atoms {
            if !(a.prob.log2_p <= 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "log2 p = {} is positive or NaN",
                    a.prob.log2_p
                )));
            }
            if let Some(e) = a.prob.exact_dyadic {
                if a.prob.log2_p != -(e as f64) {
                    return Err(Error::InvalidDistribution(format!(
                        "exact dyadic exponent {e} disagrees with log2 p = {}",
                        a.prob.log2_p
                    )));
                }
            }
            if !a.multiplicity.is_at_least_one() {
                return Err(Error::InvalidDistribution("multiplicity below one".into()));
            }
        }
        if merge {
            atoms.sort_by(|a, b| b.prob.log2_p.total_cmp(&a.prob.log2_p));
            let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
            for a in atoms {
                match merged.last_mut() {
                    Some(last) if same_prob(last.prob.log2_p, a.prob.log2_p) => {
                        if last.prob.exact_dyadic != a.prob.exact_dyadic {
                            last.prob.exact_dyadic = None;
                        }
                        last.multiplicity = last.multiplicity.add(&a.multiplicity);
                    }
                    _ => merged.push(a),
                }
            }
            atoms = merged;
        }
        Ok(Self { level, atoms })
    }

    fn check_mass(&self, sub: bool) -> Result<()> {
        let mass = self.total_mass();
        let ok = if sub {
            mass <= 1.0 + MASS_TOL
        } else {
            (mass - 1.0).abs() <= MASS_TOL
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MassMismatch { mass })
        }
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Total mass, summed with compensation.
    pub fn total_mass(&self) -> f64 {
        stable_sum(self.atoms.iter().map(|a| a.log2_mass().exp2()).collect())
    }

    /// Number of cells.
    pub fn total_cells(&self) -> Multiplicity {
        let mut it = self.atoms.iter();
        let first = it.next().expect("nonempty").multiplicity.clone();
        it.fold(first, |acc, a| acc.add(&a.multiplicity))
    }

    /// `H(g, P) = Σ g(μ(A))`.
    pub fn static_entropy(&self, g: &GFunction) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let lg = g.log2_value(a.prob.log2_p)?;
            terms.push((a.multiplicity.log2() + lg).exp2());
        }
        Ok(stable_sum(terms))
    }

    /// Profile of the join of two independent partitions.
    pub fn product(&self, other: &CylinderDistribution) -> Result<Self> {
        self.product_with_cap(other, DEFAULT_ATOM_CAP)
    }

    pub fn product_with_cap(&self, other: &CylinderDistribution, cap: usize) -> Result<Self> {
        let count = self.atoms.len().saturating_mul(other.atoms.len());
        if count > cap {
            return Err(Error::AtomCap { count, cap });
        }
        let mut atoms = Vec::with_capacity(count);
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(Atom::new(
                    a.prob.product(&b.prob),
                    a.multiplicity.mul(&b.multiplicity),
                ));
            }
        }
        let d = Self::build(self.level + other.level, atoms, true)?;
        let mass = d.total_mass();
        let expect = self.total_mass() * other.total_mass();
        if (mass - expect).abs() > MASS_TOL * expect.max(1.0) {
            return Err(Error::MassMismatch { mass });
        }
        Ok(d)
    }
}

fn same_prob(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= MERGE_TOL * a.abs().max(b.abs())
}

/// `H(g, P)` for the profile `d`.
pub fn static_entropy(g: &GFunction, d: &CylinderDistribution) -> Result<f64> {
    d.static_entropy(g)
}

mod repr {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum Count {
        Small(u64),
        Big(String),
    }

    #[derive(Serialize, Deserialize)]
    pub struct AtomRepr {
        pub log2_p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub exact_dyadic: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub multiplicity: Option<Count>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub log2_multiplicity: Option<f64>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct DistRepr {
        pub level: u64,
        pub atoms: Vec<AtomRepr>,
    }

    impl From<CylinderDistribution> for DistRepr {
        fn from(d: CylinderDistribution) -> Self {
            let atoms = d
                .atoms
                .into_iter()
                .map(|a| {
                    let (multiplicity, log2_multiplicity) = match a.multiplicity {
                        Multiplicity::Exact(m) => {
                            let c = match u64::try_from(&m) {
                                Ok(v) => Count::Small(v),
                                Err(_) => Count::Big(m.to_str_radix(10)),
                            };
                            (Some(c), None)
                        }
                        Multiplicity::Log2(v) => (None, Some(v)),
                    };
                    AtomRepr {
                        log2_p: a.prob.log2_p,
                        exact_dyadic: a.prob.exact_dyadic,
                        multiplicity,
                        log2_multiplicity,
                    }
                })
                .collect();
            DistRepr {
                level: d.level,
                atoms,
            }
        }
    }

    impl TryFrom<DistRepr> for CylinderDistribution {
        type Error = Error;

        fn try_from(r: DistRepr) -> Result<Self> {
            let atoms = r
                .atoms
                .into_iter()
                .map(|a| {
                    let m = match (a.multiplicity, a.log2_multiplicity) {
                        (Some(Count::Small(v)), None) => Multiplicity::Exact(BigUint::from(v)),
                        (Some(Count::Big(s)), None) => {
                            Multiplicity::Exact(s.parse::<BigUint>().map_err(|e| Error::Parse {
                                input: s.clone(),
                                reason: e.to_string(),
                            })?)
                        }
                        (None, Some(v)) => Multiplicity::Log2(v),
                        _ => {
                            return Err(Error::InvalidDistribution(
                                "each atom needs exactly one of multiplicity and log2_multiplicity"
                                    .into(),
                            ))
                        }
                    };
                    Ok(Atom::new(
                        LogProb {
                            log2_p: a.log2_p,
                            exact_dyadic: a.exact_dyadic,
                        },
                        m,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            CylinderDistribution::new_unmerged(r.level, atoms)
        }
    }
}
