//! Dynamical g-entropy traces `H(g, P_n)/n` and checks built on them.

mod checks;

pub use checks::{
    infinite_rate_check, power_rate_check, sandwich_check, Crossing, InfiniteRateReport,
    PowerRateReport, SandwichReport, SANDWICH_DEPTH,
};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfun::GFunction;
use crate::measure::CylinderDistribution;
use crate::numeric::{ext_real, tail_estimate, TailMethod};
use crate::systems::{BernoulliSystem, ConstructionState, SturmianSystem};

/// A system together with its generating partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolicSystem {
    Bernoulli(BernoulliSystem),
    Sturmian(SturmianSystem),
    Standard(Box<ConstructionState>),
}

impl SymbolicSystem {
    /// `bernoulli:p₁,…,p_k`, `uniform:k` or `sturmian:<β>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim();
        let parse_err = |reason: String| Error::Parse {
            input: spec.into(),
            reason,
        };
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| parse_err("expected <kind>:<parameters>".into()))?;
        match kind {
            "bernoulli" => {
                let p = rest
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| parse_err(e.to_string()))?;
                Ok(Self::Bernoulli(BernoulliSystem::new(&p)?))
            }
            "uniform" => {
                let k = rest
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| parse_err(e.to_string()))?;
                Ok(Self::Bernoulli(BernoulliSystem::uniform(k)?))
            }
            "sturmian" => Ok(Self::Sturmian(SturmianSystem::parse(rest)?)),
            _ => Err(parse_err(format!("unknown system kind `{kind}`"))),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Self::Bernoulli(b) => {
                let groups: Vec<String> = b
                    .probability_groups()
                    .iter()
                    .map(|(p, c)| format!("{p}x{c}"))
                    .collect();
                format!("bernoulli[{}]", groups.join(","))
            }
            Self::Sturmian(s) => format!("sturmian[beta={}]", s.beta()),
            Self::Standard(st) => {
                let ns: Vec<String> = st.stages.iter().map(|s| s.n.to_string()).collect();
                format!(
                    "standard[k={},gamma={},N={}]",
                    st.k,
                    st.target_gamma.map_or("-".into(), |g| g.to_string()),
                    ns.join(",")
                )
            }
        }
    }

    /// Shannon rate of the generating partition, when known in closed form.
    pub fn shannon_rate(&self) -> Option<f64> {
        match self {
            Self::Bernoulli(b) => Some(b.shannon_rate()),
            Self::Sturmian(_) | Self::Standard(_) => Some(0.0),
        }
    }

    /// Cylinder distribution of `P_n`.
    pub fn distribution(&self, n: u64) -> Result<CylinderDistribution> {
        match self {
            Self::Bernoulli(b) => b.distribution(n),
            Self::Sturmian(s) => s.distribution(n),
            Self::Standard(st) => st.distribution(&BigUint::from(n)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: u64,
    pub h: f64,
    pub rate: f64,
}

/// Where and why a trace stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub deepest_valid: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyTrace {
    pub system: String,
    pub g_name: String,
    pub values: Vec<TracePoint>,
    #[serde(with = "ext_real")]
    pub liminf_est: f64,
    #[serde(with = "ext_real")]
    pub limsup_est: f64,
    pub method: TailMethod,
    /// Levels the estimates are taken along, when not all of `values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsequence: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<Truncation>,
}

impl EntropyTrace {
    fn from_values(
        system: &SymbolicSystem,
        g: &GFunction,
        values: Vec<TracePoint>,
        subsequence: Option<Vec<u64>>,
        truncated: Option<Truncation>,
    ) -> Self {
        let chosen: Vec<&TracePoint> = match &subsequence {
            Some(ns) => values.iter().filter(|p| ns.contains(&p.n)).collect(),
            None => values.iter().collect(),
        };
        let (liminf_est, limsup_est, method) = if chosen.is_empty() {
            (f64::NAN, f64::NAN, TailMethod::Raw)
        } else {
            let xs: Vec<f64> = chosen.iter().map(|p| p.n as f64).collect();
            let ys: Vec<f64> = chosen.iter().map(|p| p.rate).collect();
            let t = tail_estimate(&xs, &ys);
            (t.liminf, t.limsup, t.method)
        };
        Self {
            system: system.descriptor(),
            g_name: g.name().to_string(),
            values,
            liminf_est,
            limsup_est,
            method,
            subsequence,
            truncated,
        }
    }

    pub fn last(&self) -> Option<&TracePoint> {
        self.values.last()
    }

    /// CSV with columns `n,H_n,H_n_over_n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,H_n,H_n_over_n\n");
        for p in &self.values {
            out.push_str(&format!("{},{:e},{:e}\n", p.n, p.h, p.rate));
        }
        if let Some(t) = &self.truncated {
            out.push_str(&format!(
                "# truncated after n = {}: {}\n",
                t.deepest_valid, t.reason
            ));
        }
        out
    }
}

fn point(n: u64, h: f64) -> TracePoint {
    TracePoint {
        n,
        h,
        rate: h / n as f64,
    }
}

/// `H(g, P_n)` and `H(g, P_n)/n` for `n = 1..=n_max`.
///
/// Fails on the first level that cannot be evaluated; see
/// [`entropy_trace_partial`] for a trace that keeps the valid prefix.
pub fn entropy_trace(system: &SymbolicSystem, g: &GFunction, n_max: u64) -> Result<EntropyTrace> {
    let t = entropy_trace_partial(system, g, n_max)?;
    match t.truncated {
        Some(tr) => Err(Error::Numeric {
            deepest_valid: tr.deepest_valid,
            reason: tr.reason,
        }),
        None => Ok(t),
    }
}

/// Like [`entropy_trace`], truncating at the first failing level.
///
/// For the standard example the limit estimates are taken along the
/// saturation lengths `D_n + 1` that fall in range.
pub fn entropy_trace_partial(
    system: &SymbolicSystem,
    g: &GFunction,
    n_max: u64,
) -> Result<EntropyTrace> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(n_max as usize);
    let mut truncated = None;
    match system {
        SymbolicSystem::Sturmian(s) => match s.entropy_trace(g, n_max) {
            Ok(hs) => values.extend(hs.iter().enumerate().map(|(i, &h)| point(i as u64 + 1, h))),
            Err(e) => {
                truncated = Some(Truncation {
                    deepest_valid: 0,
                    reason: e.to_string(),
                })
            }
        },
        _ => {
            for n in 1..=n_max {
                match system.distribution(n).and_then(|d| d.static_entropy(g)) {
                    Ok(h) => values.push(point(n, h)),
                    Err(e) => {
                        truncated = Some(Truncation {
                            deepest_valid: n - 1,
                            reason: e.to_string(),
                        });
                        break;
                    }
                }
            }
        }
    }
    let subsequence = match system {
        SymbolicSystem::Standard(st) => {
            let ns: Vec<u64> = estimation_lengths(st)
                .into_iter()
                .filter(|&m| m <= n_max)
                .collect();
            Some(ns)
        }
        _ => None,
    };
    Ok(EntropyTrace::from_values(
        system,
        g,
        values,
        subsequence,
        truncated,
    ))
}

/// `D_n + 1` for every materialized level `n ≥ 1` that fits in `u64`.
pub fn saturation_lengths(st: &ConstructionState) -> Vec<u64> {
    (1..=st.stages_materialized())
        .map_while(|n| st.saturation_length(n).ok())
        .map_while(|m| u64::try_from(m).ok())
        .collect()
}

/// Saturation lengths used for limit estimates: `D_n + 1` for `n > N_{M−2}`,
/// where the ratio has settled within `1/N_{M−2}` of its target.
pub fn estimation_lengths(st: &ConstructionState) -> Vec<u64> {
    let all = saturation_lengths(st);
    let from = match st.stages.len() {
        0 | 1 => 1,
        m => st.stages[m - 2].n + 1,
    };
    all.into_iter()
        .enumerate()
        .filter(|&(i, _)| i as u64 + 1 >= from)
        .map(|(_, m)| m)
        .collect()
}

/// Trace of the standard example evaluated only at the saturation lengths.
pub fn standard_subsequence_trace(st: &ConstructionState, g: &GFunction) -> Result<EntropyTrace> {
    let system = SymbolicSystem::Standard(Box::new(st.clone()));
    let ns = saturation_lengths(st);
    if ns.is_empty() {
        return Err(Error::NotMaterialized(
            "no saturation lengths are materialized".into(),
        ));
    }
    let mut values = Vec::with_capacity(ns.len());
    for &m in &ns {
        let h = st.distribution(&BigUint::from(m))?.static_entropy(g)?;
        values.push(point(m, h));
    }
    Ok(EntropyTrace::from_values(
        &system,
        g,
        values,
        Some(estimation_lengths(st)),
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_systems() {
        assert!(matches!(
            SymbolicSystem::parse("bernoulli:0.3,0.7").unwrap(),
            SymbolicSystem::Bernoulli(_)
        ));
        assert!(matches!(
            SymbolicSystem::parse("sturmian:golden").unwrap(),
            SymbolicSystem::Sturmian(_)
        ));
        assert!(SymbolicSystem::parse("uniform:1").is_err());
        assert!(SymbolicSystem::parse("tent:2").is_err());
        assert!(SymbolicSystem::parse("bernoulli").is_err());
    }

    #[test]
    fn uniform_shannon_trace() {
        let s = SymbolicSystem::parse("uniform:2").unwrap();
        let t = entropy_trace(&s, &GFunction::shannon(), 40).unwrap();
        let ln2 = 2f64.ln();
        assert!(t.values.iter().all(|p| (p.rate - ln2).abs() < 1e-12));
        assert!((t.limsup_est - ln2).abs() < 1e-12 && (t.liminf_est - ln2).abs() < 1e-12);
        assert!(t.to_csv().starts_with("n,H_n,H_n_over_n\n1,"));
    }

    #[test]
    fn sqrt_on_fair_coin_diverges() {
        let s = SymbolicSystem::parse("uniform:2").unwrap();
        let g = GFunction::power(0.5).unwrap();
        let t = entropy_trace(&s, &g, 40).unwrap();
        assert!(t.limsup_est.is_infinite());
        let p = t.values[29];
        assert!((p.rate - 2f64.powf(15.0) / 30.0).abs() < 1e-9 * p.rate);
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"limsup_est\":\"inf\""));
    }

    #[test]
    fn truncation_keeps_prefix() {
        let s = SymbolicSystem::parse("uniform:2").unwrap();
        let t = entropy_trace_partial(&s, &GFunction::shannon(), 1200).unwrap();
        let tr = t.truncated.as_ref().unwrap();
        assert_eq!(tr.deepest_valid as usize, t.values.len());
        assert!(t.to_csv().contains("# truncated"));
        assert!(entropy_trace(&s, &GFunction::shannon(), 1200).is_err());
    }
}
