//! Concave entropy functions `g: [0,1] → ℝ` with `g(0) = 0`.
//!
//! Every builtin family evaluates both in the linear domain and in closed
//! form on `ℓ = log₂ x`, so cells of measure `2^{-2^{20}}` are no harder than
//! cells of measure `1/2`. Natural logarithms are used throughout: entropies
//! are in nats.

mod asymptotics;
mod checks;
mod piecewise;
mod spec;

pub use asymptotics::{
    estimate_elasticity, estimate_ratio_limits, estimate_ratio_limits_on_grid, estimate_u, GClass,
    GridSpec, RatioLimits, DEFAULT_DEPTH,
};
pub use checks::{check_invariants, InvariantReport};
pub use piecewise::{make_piecewise_linear, Breakpoint, PiecewiseLinear};
pub use spec::parse_g_spec;

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::log2_sum;

/// Below this `log₂ x` a function without a closed log form is refused.
pub const LINEAR_DOMAIN_FLOOR: f64 = -960.0;

type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Shannon,
    Power {
        a: f64,
    },
    HavrdaCharvat {
        q: f64,
    },
    LogSquare,
    Affine(Vec<(f64, GFunction)>),
    Piecewise(Arc<PiecewiseLinear>),
    Custom {
        eval: Arc<RealFn>,
        deriv: Option<Arc<RealFn>>,
    },
}

/// An entropy function from the class `G₀`.
///
/// Values are immutable and cheap to clone.
#[derive(Clone)]
pub struct GFunction {
    name: String,
    kind: Kind,
}

impl fmt::Debug for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GFunction")
            .field("name", &self.name)
            .field("family", &self.family())
            .field("params", &self.params())
            .finish()
    }
}

impl GFunction {
    /// Shannon function `η(x) = −x ln x`.
    pub fn shannon() -> Self {
        Self {
            name: "shannon".into(),
            kind: Kind::Shannon,
        }
    }

    /// `x^a` for `a ∈ (0, 1]`.
    pub fn power(a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidParams {
                family: "power".into(),
                reason: format!("exponent {a} outside (0, 1]"),
            });
        }
        Ok(Self {
            name: format!("power:{a}"),
            kind: Kind::Power { a },
        })
    }

    /// Havrda–Charvát `(x^q − x)/(2^{1−q} − 1)` for `q > 0`, `q ≠ 1`.
    pub fn havrda_charvat(q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) || q == 1.0 {
            return Err(Error::InvalidParams {
                family: "havrda_charvat".into(),
                reason: format!("order {q} must be positive, finite and different from 1"),
            });
        }
        Ok(Self {
            name: format!("hc:{q}"),
            kind: Kind::HavrdaCharvat { q },
        })
    }

    /// `x (ln x − 1)²`.
    pub fn log_square() -> Self {
        Self {
            name: "log_square".into(),
            kind: Kind::LogSquare,
        }
    }

    /// `Σ cᵢ gᵢ` with nonnegative coefficients.
    pub fn affine(terms: Vec<(f64, GFunction)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParams {
                family: "affine".into(),
                reason: "no terms".into(),
            });
        }
        if let Some((c, _)) = terms.iter().find(|(c, _)| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidParams {
                family: "affine".into(),
                reason: format!("coefficient {c} is not a finite nonnegative number"),
            });
        }
        let name = terms
            .iter()
            .map(|(c, g)| format!("{c}*{}", g.name))
            .collect::<Vec<_>>()
            .join("+");
        Ok(Self {
            name,
            kind: Kind::Affine(terms),
        })
    }

    /// `c · g`.
    pub fn scaled(c: f64, g: GFunction) -> Result<Self> {
        Self::affine(vec![(c, g)])
    }

    pub(crate) fn from_piecewise(name: String, pl: PiecewiseLinear) -> Self {
        Self {
            name,
            kind: Kind::Piecewise(Arc::new(pl)),
        }
    }

    /// A user-supplied function evaluated only in the linear domain.
    ///
    /// Evaluation below `x = 2^{-960}` is refused.
    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: Kind::Custom {
                eval: Arc::new(eval),
                deriv: None,
            },
        }
    }

    /// Like [`GFunction::custom`] with an analytic derivative.
    pub fn custom_with_deriv<F, D>(name: impl Into<String>, eval: F, deriv: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            kind: Kind::Custom {
                eval: Arc::new(eval),
                deriv: Some(Arc::new(deriv)),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Family identifier of the builtin catalog.
    pub fn family(&self) -> &'static str {
        match &self.kind {
            Kind::Shannon => "shannon",
            Kind::Power { .. } => "power",
            Kind::HavrdaCharvat { .. } => "havrda_charvat",
            Kind::LogSquare => "log_square",
            Kind::Affine(_) => "affine",
            Kind::Piecewise(_) => "piecewise_linear",
            Kind::Custom { .. } => "custom",
        }
    }

    /// Numeric parameters of the family (coefficients for affine combinations).
    pub fn params(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Power { a } => vec![*a],
            Kind::HavrdaCharvat { q } => vec![*q],
            Kind::Affine(t) => t.iter().map(|(c, _)| *c).collect(),
            Kind::Piecewise(pl) => pl.targets().map_or_else(Vec::new, |(a, b)| vec![a, b]),
            _ => Vec::new(),
        }
    }

    /// The piecewise-linear data, when this is a piecewise-linear function.
    pub fn as_piecewise(&self) -> Option<&PiecewiseLinear> {
        match &self.kind {
            Kind::Piecewise(pl) => Some(pl),
            _ => None,
        }
    }

    /// True when `log2_value` works at any depth.
    pub fn has_log_form(&self) -> bool {
        match &self.kind {
            Kind::Custom { .. } => false,
            Kind::Affine(t) => t.iter().all(|(_, g)| g.has_log_form()),
            _ => true,
        }
    }

    /// `g(x)` for `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Shannon => -x * x.ln(),
            Kind::Power { a } => x.powf(*a),
            Kind::HavrdaCharvat { q } => (x.powf(*q) - x) / ((1.0 - q).exp2() - 1.0),
            Kind::LogSquare => {
                let l = x.ln() - 1.0;
                x * l * l
            }
            Kind::Affine(t) => t.iter().map(|(c, g)| c * g.eval(x)).sum(),
            Kind::Piecewise(pl) => pl.eval(x),
            Kind::Custom { eval, .. } => eval(x),
        }
    }

    /// `log₂ g(2^ℓ)` for `ℓ ≤ 0`; `−∞` where `g` vanishes.
    pub fn log2_value(&self, log2_x: f64) -> Result<f64> {
        let l = log2_x.min(0.0);
        let v = match &self.kind {
            Kind::Shannon => {
                if l == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    l + (-l * LN_2).log2()
                }
            }
            Kind::Power { a } => a * l,
            Kind::HavrdaCharvat { q } => {
                if l == 0.0 {
                    f64::NEG_INFINITY
                } else if *q < 1.0 {
                    // (x^q − x)/(2^{1−q} − 1) = x^q (1 − x^{1−q}) / (2^{1−q} − 1)
                    q * l + crate::numeric::log2_one_minus_exp2((1.0 - q) * l)
                        - ((1.0 - q) * LN_2).exp_m1().log2()
                } else {
                    l + crate::numeric::log2_one_minus_exp2((q - 1.0) * l)
                        - (-((1.0 - q) * LN_2).exp_m1()).log2()
                }
            }
            Kind::LogSquare => l + 2.0 * (1.0 - l * LN_2).log2(),
            Kind::Affine(t) => {
                let mut logs = Vec::with_capacity(t.len());
                for (c, g) in t {
                    if *c > 0.0 {
                        logs.push(c.log2() + g.log2_value(l)?);
                    }
                }
                log2_sum(&logs)
            }
            Kind::Piecewise(pl) => pl.log2_value(l),
            Kind::Custom { eval, .. } => {
                if l < LINEAR_DOMAIN_FLOOR {
                    return Err(Error::Evaluation {
                        name: self.name.clone(),
                        log2_x: l,
                        reason: "function has no log-domain form below 2^-960".into(),
                    });
                }
                let v = eval(l.exp2());
                if v < 0.0 || v.is_nan() {
                    return Err(Error::Evaluation {
                        name: self.name.clone(),
                        log2_x: l,
                        reason: format!("value {v} is negative or NaN"),
                    });
                }
                v.log2()
            }
        };
        if v.is_nan() {
            return Err(Error::Evaluation {
                name: self.name.clone(),
                log2_x: l,
                reason: "NaN in log-domain evaluation".into(),
            });
        }
        Ok(v)
    }

    /// `g(2^ℓ)` as an ordinary float (may underflow to zero).
    pub fn eval_log2(&self, log2_x: f64) -> Result<f64> {
        Ok(self.log2_value(log2_x)?.exp2())
    }

    /// `log₂ φ_g(2^ℓ)` where `φ_g(x) = g(x)/x`.
    pub fn log2_phi(&self, log2_x: f64) -> Result<f64> {
        Ok(self.log2_value(log2_x)? - log2_x)
    }

    /// `φ_g(2^ℓ)`.
    pub fn phi_log2(&self, log2_x: f64) -> Result<f64> {
        Ok(self.log2_phi(log2_x)?.exp2())
    }

    /// `φ_g(x) = g(x)/x`.
    pub fn phi(&self, x: f64) -> f64 {
        self.eval(x) / x
    }

    /// Analytic derivative when the family provides one.
    pub fn deriv(&self, x: f64) -> Option<f64> {
        match &self.kind {
            Kind::Shannon => Some(-x.ln() - 1.0),
            Kind::Power { a } => Some(a * x.powf(a - 1.0)),
            Kind::HavrdaCharvat { q } => {
                Some((q * x.powf(q - 1.0) - 1.0) / ((1.0 - q).exp2() - 1.0))
            }
            Kind::LogSquare => {
                let l = x.ln();
                Some(l * l - 1.0)
            }
            Kind::Affine(t) => {
                let mut s = 0.0;
                for (c, g) in t {
                    s += c * g.deriv(x)?;
                }
                Some(s)
            }
            Kind::Piecewise(pl) => Some(pl.slope_at(x.log2(), false)),
            Kind::Custom { deriv, .. } => deriv.as_ref().map(|d| d(x)),
        }
    }

    /// `g′(x)`, falling back to a central difference with relative step `1e-8`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        if let Some(d) = self.deriv(x) {
            if d.is_finite() {
                return Ok(d);
            }
        }
        let h = 1e-8 * x;
        let hi = (x + h).min(1.0);
        let lo = x - h;
        let d = (self.eval(hi) - self.eval(lo)) / (hi - lo);
        if !d.is_finite() || h <= 0.0 {
            return Err(Error::Evaluation {
                name: self.name.clone(),
                log2_x: x.log2(),
                reason: "finite-difference derivative is not finite".into(),
            });
        }
        Ok(d)
    }

    /// Left derivative `g′₋(x)`.
    pub fn left_derivative(&self, x: f64) -> Result<f64> {
        if let Kind::Piecewise(pl) = &self.kind {
            return Ok(pl.slope_at(x.log2(), true));
        }
        if let Some(d) = self.deriv(x) {
            if d.is_finite() {
                return Ok(d);
            }
        }
        let h = 1e-7 * x;
        let d = (self.eval(x) - self.eval(x - h)) / h;
        if !d.is_finite() {
            return Err(Error::Evaluation {
                name: self.name.clone(),
                log2_x: x.log2(),
                reason: "one-sided difference is not finite".into(),
            });
        }
        Ok(d)
    }

    /// Logarithmic derivative `x g′(x)/g(x)` at `x = 2^ℓ`.
    pub fn log_elasticity(&self, log2_x: f64) -> Result<f64> {
        let l = log2_x;
        let e = match &self.kind {
            Kind::Shannon => 1.0 + 1.0 / (l * LN_2),
            Kind::Power { a } => *a,
            Kind::HavrdaCharvat { q } => {
                if *q < 1.0 {
                    let u = ((1.0 - q) * l).exp2();
                    (q - u) / (1.0 - u)
                } else {
                    let u = ((q - 1.0) * l).exp2();
                    (1.0 - q * u) / (1.0 - u)
                }
            }
            Kind::LogSquare => 1.0 - 2.0 / (1.0 - l * LN_2),
            Kind::Affine(t) => {
                let total = self.log2_value(l)?;
                let mut acc = 0.0;
                for (c, g) in t {
                    if *c > 0.0 {
                        let w = (c.log2() + g.log2_value(l)? - total).exp2();
                        acc += w * g.log_elasticity(l)?;
                    }
                }
                acc
            }
            Kind::Piecewise(pl) => {
                let s = pl.slope_at(l, false);
                s * (l - pl.log2_value(l)).exp2()
            }
            Kind::Custom { .. } => {
                let h = 1e-4;
                (self.log2_value(l + h)? - self.log2_value(l - h)?) / (2.0 * h)
            }
        };
        if !e.is_finite() {
            return Err(Error::Evaluation {
                name: self.name.clone(),
                log2_x: l,
                reason: "elasticity is not finite".into(),
            });
        }
        Ok(e)
    }
}

/// Builds a builtin function from a family identifier and parameter list.
pub fn make_builtin(family: &str, params: &[f64]) -> Result<GFunction> {
    let want = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidParams {
                family: family.into(),
                reason: format!("expected {n} parameter(s), got {}", params.len()),
            })
        }
    };
    match family {
        "shannon" | "eta" => {
            want(0)?;
            Ok(GFunction::shannon())
        }
        "power" | "pow" => {
            want(1)?;
            GFunction::power(params[0])
        }
        "havrda_charvat" | "hc" | "tsallis" => {
            want(1)?;
            GFunction::havrda_charvat(params[0])
        }
        "log_square" => {
            want(0)?;
            Ok(GFunction::log_square())
        }
        "piecewise_linear" | "pl" => {
            want(2)?;
            make_piecewise_linear(&GFunction::shannon(), params[0], params[1])
        }
        other => Err(Error::UnknownFamily(other.into())),
    }
}

/// The builtin catalog used by checks that quantify over all families.
pub fn builtin_catalog() -> Vec<GFunction> {
    let ok = |r: Result<GFunction>| r.expect("catalog parameters are valid");
    vec![
        GFunction::shannon(),
        ok(GFunction::power(0.3)),
        ok(GFunction::power(0.5)),
        ok(GFunction::power(0.9)),
        ok(GFunction::power(1.0)),
        ok(GFunction::havrda_charvat(0.5)),
        ok(GFunction::havrda_charvat(2.0)),
        ok(GFunction::havrda_charvat(3.0)),
        GFunction::log_square(),
        ok(GFunction::scaled(2.0, GFunction::shannon())),
        ok(GFunction::affine(vec![
            (1.0, GFunction::shannon()),
            (1.0, ok(GFunction::havrda_charvat(2.0))),
        ])),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn builtin_examples() {
        let eta = make_builtin("shannon", &[]).unwrap();
        assert!(close(eta.eval(0.25), 0.25 * 4f64.ln(), 1e-15));
        let sq = make_builtin("power", &[0.5]).unwrap();
        assert!(close(sq.eval(0.25), 0.5, 1e-15));
        let ls = make_builtin("log_square", &[]).unwrap();
        let e_inv = (-1f64).exp();
        assert!(close(ls.eval(e_inv), 4.0 * e_inv, 1e-14));
        assert!((ls.eval(e_inv) - 1.471518).abs() < 1e-6);
    }

    #[test]
    fn unknown_family_and_bad_params() {
        assert!(matches!(
            make_builtin("renyi", &[]),
            Err(Error::UnknownFamily(_))
        ));
        assert!(make_builtin("power", &[1.5]).is_err());
        assert!(make_builtin("power", &[0.0]).is_err());
        assert!(make_builtin("hc", &[1.0]).is_err());
        assert!(make_builtin("hc", &[-2.0]).is_err());
        assert!(make_builtin("power", &[]).is_err());
        assert!(GFunction::affine(vec![(-1.0, GFunction::shannon())]).is_err());
    }

    #[test]
    fn log_and_linear_forms_agree() {
        for g in builtin_catalog() {
            for i in 1..200 {
                let l = -(i as f64) * 0.37;
                let lin = g.eval(l.exp2());
                let viaexp = g.eval_log2(l).unwrap();
                assert!(
                    (lin - viaexp).abs() <= 1e-12 * lin.abs().max(1e-300) + 1e-300,
                    "{} at {l}: {lin} vs {viaexp}",
                    g.name()
                );
            }
        }
    }

    #[test]
    fn log_form_is_finite_far_below_underflow() {
        for g in builtin_catalog() {
            let v = g.log2_value(-(2f64.powi(30))).unwrap();
            assert!(v.is_finite() && v < -1e8, "{}: {v}", g.name());
        }
    }

    #[test]
    fn custom_function_refused_deep() {
        let g = GFunction::custom("sqrt", f64::sqrt);
        assert!(g.log2_value(-100.0).is_ok());
        assert!(g.log2_value(-1000.0).is_err());
        assert!(!g.has_log_form());
    }

    #[test]
    fn analytic_elasticity_matches_finite_difference() {
        for g in builtin_catalog() {
            for &l in &[-3.0, -17.5, -80.0] {
                let h = 1e-5;
                let fd = (g.log2_value(l + h).unwrap() - g.log2_value(l - h).unwrap()) / (2.0 * h);
                let e = g.log_elasticity(l).unwrap();
                assert!((fd - e).abs() < 1e-6, "{} at {l}: {fd} vs {e}", g.name());
            }
        }
    }

    #[test]
    fn analytic_derivative_matches_finite_difference() {
        for g in builtin_catalog() {
            for &x in &[0.01, 0.3, 0.5, 0.77] {
                let h = 1e-6;
                let fd = (g.eval(x + h) - g.eval(x - h)) / (2.0 * h);
                let d = g.deriv(x).unwrap();
                assert!(
                    (fd - d).abs() < 1e-5 * d.abs().max(1.0),
                    "{} at {x}",
                    g.name()
                );
            }
        }
    }

    #[test]
    fn deriv_fallback_for_custom() {
        let g = GFunction::custom("sqrt", f64::sqrt);
        let d = g.derivative(0.25).unwrap();
        assert!((d - 1.0).abs() < 1e-6);
    }
}
