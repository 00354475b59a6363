//! Ratio limits, the `U(λ)` function and elasticity near zero.

use serde::{Deserialize, Serialize};

use super::GFunction;
use crate::error::{Error, Result};
use crate::numeric::{tail_estimate, TailMethod};

/// Grid depth used by callers that do not choose one.
pub const DEFAULT_DEPTH: usize = 256;

const ZERO_TOL: f64 = 1e-6;
const SHANNON_REL_TOL: f64 = 1e-3;

/// Class of `g` relative to the reference function near zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GClass {
    #[serde(rename = "G0_zero")]
    G0Zero,
    #[serde(rename = "G0_shannon")]
    G0Shannon,
    #[serde(rename = "G0_infinity")]
    G0Infinity,
    #[serde(rename = "indeterminate")]
    Indeterminate,
}

impl GClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            GClass::G0Zero => "G0_zero",
            GClass::G0Shannon => "G0_shannon",
            GClass::G0Infinity => "G0_infinity",
            GClass::Indeterminate => "indeterminate",
        }
    }

    pub fn from_limits(liminf: f64, limsup: f64) -> Self {
        if liminf == f64::INFINITY {
            GClass::G0Infinity
        } else if limsup <= ZERO_TOL {
            GClass::G0Zero
        } else if liminf > ZERO_TOL
            && limsup.is_finite()
            && limsup - liminf <= SHANNON_REL_TOL * limsup
        {
            GClass::G0Shannon
        } else {
            GClass::Indeterminate
        }
    }
}

/// Evaluation grid of a ratio estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// `log₂` of the first and last abscissa.
    pub log2_x_first: f64,
    pub log2_x_last: f64,
    pub points: usize,
    /// Index of the first point of the tail.
    pub tail_start: usize,
    pub base: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioLimits {
    #[serde(with = "crate::numeric::ext_real")]
    pub liminf_est: f64,
    #[serde(with = "crate::numeric::ext_real")]
    pub limsup_est: f64,
    pub grid: GridSpec,
    pub classification: GClass,
    pub method: TailMethod,
}

/// Tail `liminf`/`limsup` of `g₁(k^{-n})/g₂(k^{-n})` for `n = 1..depth`.
///
/// The classification is relative to `g₂`; it is the `G₀` class when `g₂ = η`.
pub fn estimate_ratio_limits(
    g1: &GFunction,
    g2: &GFunction,
    depth: usize,
    base: u32,
) -> Result<RatioLimits> {
    if depth < 8 {
        return Err(Error::Precondition(format!("depth {depth} is below 8")));
    }
    if base < 2 {
        return Err(Error::Precondition(format!("base {base} is below 2")));
    }
    let step = f64::from(base).log2();
    let grid: Vec<f64> = (1..=depth).map(|n| -(n as f64) * step).collect();
    let mut r = estimate_ratio_limits_on_grid(g1, g2, &grid)?;
    r.grid.base = Some(base);
    Ok(r)
}

/// Like [`estimate_ratio_limits`] on an explicit decreasing grid of `log₂ x`.
pub fn estimate_ratio_limits_on_grid(
    g1: &GFunction,
    g2: &GFunction,
    log2_grid: &[f64],
) -> Result<RatioLimits> {
    if log2_grid.len() < 8 {
        return Err(Error::Precondition("grid has fewer than 8 points".into()));
    }
    let mut xs = Vec::with_capacity(log2_grid.len());
    let mut ys = Vec::with_capacity(log2_grid.len());
    for (i, &l) in log2_grid.iter().enumerate() {
        let v = match (g1.log2_value(l), g2.log2_value(l)) {
            (Ok(a), Ok(b)) if b.is_finite() && !a.is_nan() => (a - b).exp2(),
            (Err(e), _) | (_, Err(e)) => return Err(deepest(e, i)),
            _ => {
                return Err(Error::Numeric {
                    deepest_valid: i as u64,
                    reason: format!("`{}` vanishes at log2 x = {l}", g2.name()),
                })
            }
        };
        xs.push((i + 1) as f64);
        ys.push(v);
    }
    let t = tail_estimate(&xs, &ys);
    Ok(RatioLimits {
        liminf_est: t.liminf,
        limsup_est: t.limsup,
        grid: GridSpec {
            log2_x_first: log2_grid[0],
            log2_x_last: log2_grid[log2_grid.len() - 1],
            points: log2_grid.len(),
            tail_start: log2_grid.len() / 2,
            base: None,
        },
        classification: GClass::from_limits(t.liminf, t.limsup),
        method: t.method,
    })
}

fn deepest(e: Error, valid: usize) -> Error {
    Error::Numeric {
        deepest_valid: valid as u64,
        reason: e.to_string(),
    }
}

/// Tail `liminf` of `λ g(x) / g(λx)` on `x = λ^{-n}`, `n = 1..depth`.
pub fn estimate_u(g: &GFunction, lambda: f64, depth: usize) -> Result<f64> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!(
            "lambda {lambda} must exceed 1"
        )));
    }
    if depth < 2 {
        return Err(Error::Precondition(format!("depth {depth} is below 2")));
    }
    let s = lambda.log2();
    let mut xs = Vec::with_capacity(depth);
    let mut ys = Vec::with_capacity(depth);
    for n in 1..=depth {
        let l = -(n as f64) * s;
        let lo = g.log2_value(l).map_err(|e| deepest(e, n - 1))?;
        let hi = g.log2_value(l + s).map_err(|e| deepest(e, n - 1))?;
        xs.push(n as f64);
        ys.push((s + lo - hi).exp2());
    }
    let start = depth / 2;
    if ys[start..].iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            deepest_valid: start as u64,
            reason: format!("`{}` vanishes on the tail of the grid", g.name()),
        });
    }
    Ok(tail_estimate(&xs, &ys).liminf)
}

/// Tail `limsup` of the elasticity `x g′(x)/g(x)` on `x = 2^{-n}`.
pub fn estimate_elasticity(g: &GFunction, depth: usize) -> Result<f64> {
    if depth < 2 {
        return Err(Error::Precondition(format!("depth {depth} is below 2")));
    }
    let mut xs = Vec::with_capacity(depth);
    let mut ys = Vec::with_capacity(depth);
    for n in 1..=depth {
        let e = g
            .log_elasticity(-(n as f64))
            .map_err(|e| deepest(e, n - 1))?;
        xs.push(n as f64);
        ys.push(e);
    }
    Ok(tail_estimate(&xs, &ys).limsup)
}
