use serde::{Deserialize, Serialize};

use super::{entropy_trace, EntropyTrace, SymbolicSystem};
use crate::error::{Error, Result};
use crate::gfun::{estimate_ratio_limits, GClass, GFunction, RatioLimits, DEFAULT_DEPTH};
use crate::numeric::ext_real;

/// Grid depth (base 2) of the ratio estimate in [`sandwich_check`].
///
/// Piecewise-linear functions alternate between their target ratios on
/// geometrically growing scales, so a shallow grid may miss a full swing.
pub const SANDWICH_DEPTH: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// Grid estimate of `liminf`/`limsup g₁/g₂`.
    pub ratio: RatioLimits,
    /// `C_i`, `C^s` used for the bounds.
    #[serde(with = "ext_real")]
    pub c_lower: f64,
    #[serde(with = "ext_real")]
    pub c_upper: f64,
    /// The constants are the construction targets of a piecewise-linear `g₁`.
    pub from_targets: bool,
    pub trace1: EntropyTrace,
    pub trace2: EntropyTrace,
    #[serde(with = "ext_real")]
    pub h1: f64,
    pub h2: f64,
    pub tol: f64,
    /// `C_i·h₂ ≤ h₁ + tol`.
    pub lower_ok: bool,
    /// `h₁ ≤ C^s·h₂ + tol`.
    pub upper_ok: bool,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

/// Compares `h(g₁, P)` with `C_i·h(g₂, P)` and `C^s·h(g₂, P)`.
///
/// When `g₁` is piecewise linear with targets relative to `g₂`, the targets
/// are the constants: the grid estimate only approaches them on scales far
/// below any cylinder measure reached by the trace.
pub fn sandwich_check(
    system: &SymbolicSystem,
    g1: &GFunction,
    g2: &GFunction,
    n_max: u64,
) -> Result<SandwichReport> {
    let ratio = estimate_ratio_limits(g1, g2, SANDWICH_DEPTH, 2)?;
    let targets = g1
        .as_piecewise()
        .filter(|pl| pl.reference() == Some(g2.name()))
        .and_then(|pl| pl.targets());
    let (c_lower, c_upper) = targets.unwrap_or((ratio.liminf_est, ratio.limsup_est));
    if !c_upper.is_finite() {
        return Err(Error::Precondition(format!(
            "limsup of {}/{} is not finite",
            g1.name(),
            g2.name()
        )));
    }
    let trace2 = entropy_trace(system, g2, n_max)?;
    let h2 = trace2.limsup_est;
    if !h2.is_finite() {
        return Err(Error::Precondition(format!(
            "h({}, P) is not finite on {}",
            g2.name(),
            trace2.system
        )));
    }
    let trace1 = entropy_trace(system, g1, n_max)?;
    let h1 = trace1.limsup_est;
    let tol = 1e-3 * h2.max(1.0);
    let lower_ok = c_lower * h2 <= h1 + tol;
    let upper_ok = h1 <= c_upper * h2 + tol;
    Ok(SandwichReport {
        ratio,
        c_lower,
        c_upper,
        from_targets: targets.is_some(),
        trace1,
        trace2,
        h1,
        h2,
        tol,
        lower_ok,
        upper_ok,
    })
}

/// First level at which `H(g, P_n)/n` exceeds `bound` and stays above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub bound: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfiniteRateReport {
    pub classification: GClass,
    pub shannon_rate: f64,
    pub trace: EntropyTrace,
    /// Crossings of `10^j` for `j = 0, 1, …`.
    pub crossings: Vec<Crossing>,
    /// The trace is nondecreasing over its last half.
    pub monotone_tail: bool,
    /// The limsup estimate is `+∞`.
    pub escaped: bool,
}

/// Confirms that `H(g, P_n)/n` escapes every bound when `g ∈ G₀^∞` and the
/// partition has positive Shannon rate.
pub fn infinite_rate_check(
    system: &SymbolicSystem,
    g: &GFunction,
    n_max: u64,
) -> Result<InfiniteRateReport> {
    let ratio = estimate_ratio_limits(g, &GFunction::shannon(), DEFAULT_DEPTH, 2)?;
    if ratio.classification != GClass::G0Infinity {
        return Err(Error::Precondition(format!(
            "`{}` is {} rather than G0_infinity",
            g.name(),
            ratio.classification.as_str()
        )));
    }
    let shannon_rate = match system.shannon_rate() {
        Some(r) => r,
        None => entropy_trace(system, &GFunction::shannon(), n_max)?.liminf_est,
    };
    if !(shannon_rate > 1e-9) {
        return Err(Error::Precondition(format!(
            "Shannon rate {shannon_rate:e} of {} is not positive",
            system.descriptor()
        )));
    }
    let trace = entropy_trace(system, g, n_max)?;
    let rates: Vec<f64> = trace.values.iter().map(|p| p.rate).collect();
    let mut crossings = Vec::new();
    let mut bound = 1.0;
    loop {
        // Last index at or below the bound; the crossing follows it.
        let after = rates.iter().rposition(|&r| r <= bound).map_or(0, |i| i + 1);
        if after >= rates.len() {
            break;
        }
        crossings.push(Crossing {
            bound,
            n: trace.values[after].n,
        });
        bound *= 10.0;
    }
    let tail = &rates[rates.len() / 2..];
    let monotone_tail = tail.windows(2).all(|w| w[1] >= w[0]);
    let escaped = trace.limsup_est.is_infinite();
    Ok(InfiniteRateReport {
        classification: ratio.classification,
        shannon_rate,
        trace,
        crossings,
        monotone_tail,
        escaped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRateReport {
    pub m: u64,
    /// Trace of `T^m` with the `m`-blocked partition, from the power system.
    pub power_trace: EntropyTrace,
    /// Trace of `T` up to level `m·n_max`.
    pub base_trace: EntropyTrace,
    /// `H(g, (P^{(m)})_n)/n ≤ m·H(g, P_{mn})/(mn) + tol` at each `n`.
    pub per_level_ok: Vec<bool>,
    #[serde(with = "ext_real")]
    pub lhs: f64,
    #[serde(with = "ext_real")]
    pub rhs: f64,
    /// `h(g, T^m, P^{(m)}) ≤ m·h(g, T, P) + tol`.
    pub inequality_ok: bool,
}

impl PowerRateReport {
    pub fn passed(&self) -> bool {
        self.inequality_ok && self.per_level_ok.iter().all(|&b| b)
    }
}

/// Checks `h(g, T^m) ≤ m·h(g, T)` on the `m`-blocked generating partition.
pub fn power_rate_check(
    system: &SymbolicSystem,
    g: &GFunction,
    m: u64,
    n_max: u64,
) -> Result<PowerRateReport> {
    let SymbolicSystem::Bernoulli(b) = system else {
        return Err(Error::Unsupported(
            "power systems are available for Bernoulli shifts only".into(),
        ));
    };
    if m == 0 {
        return Err(Error::Precondition("power m must be at least 1".into()));
    }
    let power = SymbolicSystem::Bernoulli(b.power(m)?);
    let power_trace = entropy_trace(&power, g, n_max)?;
    let base_trace = entropy_trace(system, g, m * n_max)?;
    let mf = m as f64;
    let per_level_ok = power_trace
        .values
        .iter()
        .map(|p| {
            let base = &base_trace.values[(m * p.n - 1) as usize];
            let rhs = mf * base.rate;
            p.rate <= rhs + 1e-9 * rhs.abs().max(1.0)
        })
        .collect();
    let lhs = power_trace.limsup_est;
    let rhs = mf * base_trace.limsup_est;
    let inequality_ok = if rhs.is_infinite() {
        true
    } else {
        lhs <= rhs + 1e-3 * rhs.abs().max(1.0)
    };
    Ok(PowerRateReport {
        m,
        power_trace,
        base_trace,
        per_level_ok,
        lhs,
        rhs,
        inequality_ok,
    })
}
