//! Sampled checks of the `G₀` axioms.

use serde::Serialize;

use super::GFunction;
use crate::error::Result;

const ABS_TOL: f64 = 1e-12;
const LOG_REL_TOL: f64 = 1e-9;

/// Worst violation found for each axiom (nonpositive means satisfied).
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub zero_at_origin: bool,
    pub vanishes_at_zero: bool,
    pub concavity_violation: f64,
    pub phi_monotonicity_violation: f64,
    pub subadditivity_violation: f64,
    pub log_phi_monotonicity_violation: f64,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.zero_at_origin
            && self.vanishes_at_zero
            && self.concavity_violation <= ABS_TOL
            && self.phi_monotonicity_violation <= ABS_TOL
            && self.subadditivity_violation <= ABS_TOL
            && self.log_phi_monotonicity_violation <= LOG_REL_TOL
    }
}

fn linear_grid() -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=208).map(|i| (-(i as f64) / 4.0).exp2()).collect();
    xs.extend((1..100).map(|i| i as f64 / 100.0));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Samples concavity, subadditivity and monotonicity of `φ_g`.
///
/// Linear-domain checks use an absolute tolerance on `[2^-52, 1]`; the
/// log-domain `φ_g` check is relative and runs down to `x = 2^-4096` when
/// `g` has a log form.
pub fn check_invariants(g: &GFunction) -> Result<InvariantReport> {
    let xs = linear_grid();
    let vals: Vec<f64> = xs.iter().map(|&x| g.eval(x)).collect();

    let mut conc = f64::NEG_INFINITY;
    let mut sub = f64::NEG_INFINITY;
    for i in 0..xs.len() {
        for j in i..xs.len() {
            let (x, y) = (xs[i], xs[j]);
            let mid = g.eval(0.5 * (x + y));
            conc = conc.max(0.5 * (vals[i] + vals[j]) - mid);
            if x + y <= 1.0 {
                sub = sub.max(g.eval(x + y) - vals[i] - vals[j]);
            }
        }
    }
    let mut phi_v = f64::NEG_INFINITY;
    for i in 1..xs.len() {
        // xs increasing: φ(x_{i-1}) ≥ φ(x_i).
        phi_v = phi_v.max(vals[i] / xs[i] - vals[i - 1] / xs[i - 1]);
    }

    let deep_floor = if g.has_log_form() { -4096.0 } else { -900.0 };
    let mut log_v = f64::NEG_INFINITY;
    let mut prev: Option<f64> = None;
    let mut l = 0.0;
    while l >= deep_floor {
        let p = g.log2_phi(l)?;
        if let Some(q) = prev {
            // Moving toward zero: log φ must not decrease.
            log_v = log_v.max((q - p) / q.abs().max(1.0));
        }
        prev = Some(p);
        l -= if l > -64.0 { 0.25 } else { 16.0 };
    }
    let vanishes = g.log2_value(deep_floor)? < -100.0;

    Ok(InvariantReport {
        zero_at_origin: g.eval(0.0) == 0.0,
        vanishes_at_zero: vanishes,
        concavity_violation: conc,
        phi_monotonicity_violation: phi_v,
        subadditivity_violation: sub,
        log_phi_monotonicity_violation: log_v,
    })
}
