//! Piecewise-linear concave functions with a prescribed oscillation of
//! `g₁/g₂` near zero.

use serde::{Deserialize, Serialize};

use super::GFunction;
use crate::error::{Error, Result};

/// Start of the construction grid.
const START_LOG2: f64 = -1.0;
/// Initial stretch that follows `a·g₂`.
const WARMUP_END: f64 = -64.0;
/// Deepest breakpoint placed by the construction.
const DEPTH_END: f64 = -16384.0;
/// Relative slack in the concavity check.
const SLOPE_TOL: f64 = 1e-12;

/// A breakpoint `(x_k, y_k)` stored as `(log₂ x_k, y_k / x_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub log2_x: f64,
    pub phi: f64,
}

impl Breakpoint {
    pub fn log2_y(&self) -> f64 {
        self.log2_x + self.phi.log2()
    }
}

/// Concave piecewise-linear `g` defined by breakpoints `x₀ > x₁ > …`.
///
/// `g` is constant on `[x₀, 1]`, linear on each `J_k = [x_{k+1}, x_k]` and
/// equal to `φ_last · x` below the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    points: Vec<Breakpoint>,
    /// `slopes[k]` is the slope on `J_k`.
    slopes: Vec<f64>,
    targets: Option<(f64, f64)>,
    /// Name of the function the targets refer to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<String>,
}

fn chord_slope(p: &Breakpoint, q: &Breakpoint) -> f64 {
    // (y_p − y_q)/(x_p − x_q) with x_q < x_p, scaled by x_p.
    let u = (q.log2_x - p.log2_x).exp2();
    (p.phi - q.phi * u) / (1.0 - u)
}

impl PiecewiseLinear {
    /// Validates concavity and monotonicity of the breakpoint data.
    pub fn new(points: Vec<Breakpoint>) -> Result<Self> {
        let fail = |m: String| Error::InvalidParams {
            family: "piecewise_linear".into(),
            reason: m,
        };
        if points.is_empty() {
            return Err(fail("no breakpoints".into()));
        }
        if points[0].log2_x > 0.0 {
            return Err(fail("first breakpoint lies above x = 1".into()));
        }
        for w in points.windows(2) {
            if !(w[1].log2_x < w[0].log2_x) {
                return Err(fail(format!(
                    "breakpoints not strictly decreasing at log2 x = {}",
                    w[1].log2_x
                )));
            }
        }
        if points.iter().any(|p| !(p.phi > 0.0 && p.phi.is_finite())) {
            return Err(fail("breakpoint values must be positive".into()));
        }
        let slopes: Vec<f64> = points
            .windows(2)
            .map(|w| chord_slope(&w[0], &w[1]))
            .collect();
        let mut prev = 0.0_f64;
        for (k, &s) in slopes.iter().enumerate() {
            if s < prev - SLOPE_TOL * prev.abs().max(1.0) {
                return Err(fail(format!("slope decreases on J_{k}: {s} < {prev}")));
            }
            if s > points[k].phi * (1.0 + SLOPE_TOL) {
                return Err(fail(format!("slope on J_{k} is not below y_k/x_k")));
            }
            prev = s;
        }
        let last = points[points.len() - 1].phi;
        if last < prev - SLOPE_TOL * prev.abs().max(1.0) {
            return Err(fail("tail slope is below the last chord".into()));
        }
        Ok(Self {
            points,
            slopes,
            targets: None,
            reference: None,
        })
    }

    pub fn points(&self) -> &[Breakpoint] {
        &self.points
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// `(liminf, limsup)` targets when built by [`make_piecewise_linear`].
    pub fn targets(&self) -> Option<(f64, f64)> {
        self.targets
    }

    /// Name of the reference function of [`Self::targets`].
    pub fn reference(&self) -> Option<&str> {
        self.reference.as_deref()
    }

    /// Index `k` with `ℓ_{k+1} ≤ ℓ ≤ ℓ_k`, or `None` outside the breakpoint range.
    fn piece(&self, l: f64) -> Option<usize> {
        let n = self.points.len();
        if n < 2 || l > self.points[0].log2_x || l < self.points[n - 1].log2_x {
            return None;
        }
        // First index whose log2_x is < l; the piece ends just above it.
        let idx = self.points.partition_point(|p| p.log2_x >= l);
        Some(idx.saturating_sub(1).min(n - 2))
    }

    pub fn log2_value(&self, l: f64) -> f64 {
        let first = &self.points[0];
        if l >= first.log2_x {
            return first.log2_y();
        }
        match self.piece(l) {
            None => {
                let last = &self.points[self.points.len() - 1];
                l + last.phi.log2()
            }
            Some(k) => {
                let q = &self.points[k + 1];
                let s = self.slopes[k];
                let d = l - q.log2_x;
                if d < 32.0 {
                    let t = (d * std::f64::consts::LN_2).exp_m1();
                    q.log2_x + (q.phi + s * t).log2()
                } else {
                    // φ_q + s(2^d − 1) = (φ_q − s) + s·2^d
                    let rest = (q.phi - s).max(0.0).log2();
                    q.log2_x + crate::numeric::log2_add(rest, s.log2() + d)
                }
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.log2_value(x.log2()).exp2()
        }
    }

    /// Slope at `2^ℓ`; at a breakpoint the left or right one is chosen.
    pub fn slope_at(&self, l: f64, left: bool) -> f64 {
        let n = self.points.len();
        let at = |k: usize| -> f64 {
            if k == 0 {
                0.0
            } else if k >= n {
                self.points[n - 1].phi
            } else {
                self.slopes[k - 1]
            }
        };
        // Region r: r = 0 is [x₀, 1], r = k+1 is J_k, r = n is below x_{n−1}.
        let region = self.points.partition_point(|p| p.log2_x > l);
        let on_break = region < n && self.points[region].log2_x == l;
        if on_break {
            // Left of x_region is the piece below it.
            if left {
                at(region + 1)
            } else {
                at(region)
            }
        } else {
            at(region)
        }
    }
}

type Push<'a> = dyn FnMut(&mut Vec<Breakpoint>, f64, f64) -> Result<()> + 'a;

/// Constructs a concave piecewise-linear `g₁` whose ratio to `g₂` has
/// `liminf ≈ a` and `limsup ≈ b` near zero (`b = ∞` allowed).
///
/// Breakpoints alternate between stretches that follow `a·g₂` and `b·g₂`.
/// Passing from `a` to `b` extends the current chord until it meets `b·g₂`;
/// passing back takes the minimum-slope line from the last point down to
/// `a·g₂`. Each passage therefore costs a factor of order `b/a` in `log x`,
/// and the construction stops at `x = 2^{-16384}`. For `b = ∞` the upper
/// targets double on every cycle.
pub fn make_piecewise_linear(g2: &GFunction, a: f64, b: f64) -> Result<GFunction> {
    if !(a > 0.0 && a.is_finite()) || b.is_nan() || b < a {
        return Err(Error::InfeasibleTargets {
            liminf: a,
            limsup: b,
        });
    }
    check_g2(g2)?;
    let phi2 = |l: f64| -> Result<f64> { g2.log2_phi(l) };
    let mut pts: Vec<Breakpoint> = Vec::new();
    let mut push = |pts: &mut Vec<Breakpoint>, l: f64, log2_phi: f64| -> Result<()> {
        let phi = log2_phi.exp2();
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::ConstructionFailed(format!(
                "breakpoint at log2 x = {l} has unrepresentable value"
            )));
        }
        pts.push(Breakpoint { log2_x: l, phi });
        Ok(())
    };

    let mut l = START_LOG2;
    push(&mut pts, l, a.log2() + phi2(l)?)?;
    let follow = |pts: &mut Vec<Breakpoint>,
                  l: &mut f64,
                  c: f64,
                  until: f64,
                  push: &mut Push|
     -> Result<()> {
        while *l - 1.0 >= until {
            *l -= 1.0;
            push(pts, *l, c.log2() + phi2(*l)?)?;
        }
        Ok(())
    };

    follow(&mut pts, &mut l, a, WARMUP_END.min(START_LOG2), &mut push)?;
    if b == a {
        follow(&mut pts, &mut l, a, DEPTH_END, &mut push)?;
    } else {
        let mut cycle = 0_i32;
        'cycles: loop {
            let hi = if b.is_finite() {
                b
            } else {
                a * 2f64.powi(cycle + 1)
            };
            // A → B: extend the last chord until it reaches hi·g₂.
            let n = pts.len();
            let (p, q) = (pts[n - 2], pts[n - 1]);
            let s = chord_slope(&p, &q);
            // On the line: φ_line(ℓ) = s + (φ_q − s)·2^{ℓ_q − ℓ}.
            let line_gap = |ll: f64| -> Result<f64> {
                let line = s + (q.phi - s) * (q.log2_x - ll).exp2();
                Ok(line.log2() - hi.log2() - phi2(ll)?)
            };
            let mut upper = q.log2_x;
            let mut lower = upper;
            loop {
                lower -= 1.0;
                if lower < DEPTH_END {
                    // No further swing fits; stay on a·g₂ to the floor.
                    follow(&mut pts, &mut l, a, DEPTH_END, &mut push)?;
                    break 'cycles;
                }
                if line_gap(lower)? >= 0.0 {
                    break;
                }
                upper = lower;
            }
            for _ in 0..60 {
                let mid = 0.5 * (upper + lower);
                if line_gap(mid)? >= 0.0 {
                    lower = mid;
                } else {
                    upper = mid;
                }
            }
            l = lower;
            push(&mut pts, l, hi.log2() + phi2(l)?)?;
            let until = l - (l.abs() / 8.0).max(4.0);
            follow(&mut pts, &mut l, hi, until, &mut push)?;

            // B → A: minimum-slope line from the last point down to a·g₂.
            // The slope is φ_P − u(aφ₂ − φ_P)/(1 − u) with u = x/x_P, so the
            // tangency maximizes the log of the decrease.
            let p = pts[pts.len() - 1];
            let gain = |ll: f64| -> Result<f64> {
                let d = a * phi2(ll)?.exp2() - p.phi;
                if d <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                let du = ll - p.log2_x;
                Ok(du + d.log2() - crate::numeric::log2_one_minus_exp2(du))
            };
            let mut best_l = p.log2_x - 1.0;
            let mut best = gain(best_l)?;
            let mut ll = best_l;
            loop {
                ll -= 1.0;
                if ll < DEPTH_END {
                    break 'cycles;
                }
                let v = gain(ll)?;
                if v > best {
                    best = v;
                    best_l = ll;
                } else if best.is_finite() && ll < best_l - 4.0 {
                    break;
                }
            }
            // Golden-section refinement of the tangency.
            let (mut lo, mut hi_l) = (best_l - 1.0, (best_l + 1.0).min(p.log2_x - 0.5));
            let r = 0.5 * (5f64.sqrt() - 1.0);
            let mut c1 = hi_l - r * (hi_l - lo);
            let mut c2 = lo + r * (hi_l - lo);
            let (mut f1, mut f2) = (gain(c1)?, gain(c2)?);
            for _ in 0..80 {
                if f1 > f2 {
                    hi_l = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = hi_l - r * (hi_l - lo);
                    f1 = gain(c1)?;
                } else {
                    lo = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = lo + r * (hi_l - lo);
                    f2 = gain(c2)?;
                }
            }
            let t = 0.5 * (lo + hi_l);
            l = if gain(t)? >= best { t } else { best_l };
            push(&mut pts, l, a.log2() + phi2(l)?)?;
            let stretch = (l.abs() / 8.0).max(4.0);
            let until = (l - stretch).max(DEPTH_END);
            follow(&mut pts, &mut l, a, until, &mut push)?;
            if l - 1.0 < DEPTH_END {
                break;
            }
            cycle += 1;
        }
    }
    let mut pl = PiecewiseLinear::new(pts)
        .map_err(|e| Error::ConstructionFailed(format!("breakpoints failed verification: {e}")))?;
    pl.targets = Some((a, b));
    pl.reference = Some(g2.name().to_string());
    let name = format!("pl:{a},{b}/{}", g2.name());
    Ok(GFunction::from_piecewise(name, pl))
}

/// Sampled check that `g₂ ≥ 0` and `φ_{g₂}` grows without bound near zero.
fn check_g2(g2: &GFunction) -> Result<()> {
    if !g2.has_log_form() {
        return Err(Error::Precondition(format!(
            "`{}` has no log-domain form; the construction needs x down to 2^-16384",
            g2.name()
        )));
    }
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=14 {
        let l = -(2f64.powi(i));
        let v = g2.log2_phi(l)?;
        if !v.is_finite() {
            return Err(Error::Precondition(format!(
                "`{}` is not positive at log2 x = {l}",
                g2.name()
            )));
        }
        if v < prev - 1e-9 {
            return Err(Error::Precondition(format!(
                "g2(x)/x decreases toward zero for `{}`",
                g2.name()
            )));
        }
        prev = v;
    }
    let far = g2.log2_phi(-16384.0)? - g2.log2_phi(-64.0)?;
    if far < 1.0 {
        return Err(Error::Precondition(format!(
            "`{}` does not have infinite slope at zero",
            g2.name()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(l: f64, y: f64) -> Breakpoint {
        Breakpoint {
            log2_x: l,
            phi: y / l.exp2(),
        }
    }

    #[test]
    fn explicit_breakpoints_evaluate_linearly() {
        // g = 1/2 on [1/2,1], chord to (1/4, 3/8), then 3x/2 below.
        let pl = PiecewiseLinear::new(vec![bp(-1.0, 0.5), bp(-2.0, 0.375)]).unwrap();
        assert!((pl.eval(0.75) - 0.5).abs() < 1e-15);
        assert!((pl.eval(0.375) - (0.375 + 0.5 * 0.125)).abs() < 1e-15);
        assert!((pl.eval(0.125) - 0.1875).abs() < 1e-15);
        assert_eq!(pl.slope_at(-1.0, true), 0.5);
        assert_eq!(pl.slope_at(-1.0, false), 0.0);
        assert_eq!(pl.slope_at(-3.0, false), 1.5);
    }

    #[test]
    fn rejects_convex_data() {
        let r = PiecewiseLinear::new(vec![bp(-1.0, 0.5), bp(-2.0, 0.45), bp(-3.0, 0.1)]);
        assert!(r.is_err());
    }

    #[test]
    fn infeasible_targets() {
        let eta = GFunction::shannon();
        assert!(matches!(
            make_piecewise_linear(&eta, 2.0, 1.0),
            Err(Error::InfeasibleTargets { .. })
        ));
        assert!(make_piecewise_linear(&eta, 0.0, 1.0).is_err());
    }

    #[test]
    fn g2_without_infinite_slope_is_refused() {
        let lin = GFunction::power(1.0).unwrap();
        assert!(matches!(
            make_piecewise_linear(&lin, 1.0, 2.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn breakpoints_follow_targets() {
        let eta = GFunction::shannon();
        let g = make_piecewise_linear(&eta, 1.0, 2.0).unwrap();
        let pl = g.as_piecewise().unwrap();
        assert!(pl.points().len() > 1000);
        // Below the last breakpoint φ is constant; the ratio stays in range.
        let tail = g.log2_phi(-16384.0).unwrap() - eta.log2_phi(-16384.0).unwrap();
        assert!(tail.exp2() > 1.0 - 1e-9 && tail.exp2() < 2.0 + 1e-9);
        let mut seen_hi = false;
        for p in pl.points() {
            let r = p.phi / eta.phi_log2(p.log2_x).unwrap();
            assert!(r > 1.0 - 1e-9 && r < 2.0 + 1e-9, "{r}");
            seen_hi |= r > 2.0 - 1e-9;
        }
        assert!(seen_hi);
    }
}
