//! Log-domain helpers, compensated summation and finite-tail limit estimation.

use serde::{Deserialize, Serialize};

/// Values above this are reported as `+∞` by the tail estimators.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Neumaier (improved Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sorts by magnitude (ascending) and sums with compensation.
pub fn stable_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut acc = NeumaierSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// `log2(2^a + 2^b)`.
pub fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

/// `log2(Σ 2^v)` over the slice; `-∞` for an empty slice.
pub fn log2_sum(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let mut acc = NeumaierSum::new();
    for &v in values {
        acc.add((v - max).exp2());
    }
    max + acc.value().log2()
}

/// `log2(1 - 2^x)` for `x < 0`, accurate near both ends.
pub fn log2_one_minus_exp2(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x > -1.0 {
        // 1 - 2^x = -expm1(x ln 2)
        (-(x * std::f64::consts::LN_2).exp_m1()).log2()
    } else {
        (-(x.exp2())).ln_1p() / std::f64::consts::LN_2
    }
}

/// How a tail statistic was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    /// Minimum and maximum of the raw tail values.
    Raw,
    /// Monotone tail extrapolated with a quadratic model in `1/n`.
    Extrapolated,
    /// Monotone increasing tail that does not fit a convergent model.
    Divergent,
    /// Some statistic crossed [`DIVERGENCE_THRESHOLD`].
    Threshold,
}

/// Lower and upper limit estimates from the tail of a finite sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    #[serde(with = "ext_real")]
    pub liminf: f64,
    #[serde(with = "ext_real")]
    pub limsup: f64,
    pub method: TailMethod,
}

const MIN_FIT_POINTS: usize = 8;
const FIT_TOLERANCE: f64 = 1e-5;
const GROWTH_FACTOR: f64 = 1.5;

/// Estimates `liminf`/`limsup` of `ys` as the abscissa `xs → ∞`.
///
/// The tail is the last half of the samples. A monotone tail with at least
/// eight points is fitted by `C + c₁/x + c₂/x²` through its first, middle and
/// last points; when every point agrees with the fit to a relative `1e-5`,
/// both limits are `C`. Failing that, the fit is retried on the last half of
/// the window while it keeps eight points. A monotone increasing tail that fails the fit
/// and grows by at least a factor 1.5 is declared divergent. Anything else is
/// reported as the raw tail minimum and maximum, and values above `1e12` are
/// reported as `+∞`.
pub fn tail_estimate(xs: &[f64], ys: &[f64]) -> TailEstimate {
    assert_eq!(xs.len(), ys.len(), "abscissa and values differ in length");
    assert!(!ys.is_empty(), "tail estimate of an empty sequence");
    let start = ys.len() / 2;
    let tx = &xs[start..];
    let ty = &ys[start..];

    let raw_min = ty.iter().copied().fold(f64::INFINITY, f64::min);
    let raw_max = ty.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if raw_max > DIVERGENCE_THRESHOLD {
        let liminf = if raw_min > DIVERGENCE_THRESHOLD {
            f64::INFINITY
        } else {
            raw_min
        };
        return TailEstimate {
            liminf,
            limsup: f64::INFINITY,
            method: TailMethod::Threshold,
        };
    }

    if ty.len() >= MIN_FIT_POINTS && ty.iter().all(|y| y.is_finite()) {
        let scale = ty.iter().fold(1.0_f64, |m, y| m.max(y.abs()));
        let eps = 1e-14 * scale;
        let nondecreasing = ty.windows(2).all(|w| w[1] >= w[0] - eps);
        let nonincreasing = ty.windows(2).all(|w| w[1] <= w[0] + eps);
        if nondecreasing || nonincreasing {
            // Later windows drop transients that decay faster than 1/x².
            // Growth over the whole tail outranks a fit on a short late window.
            let first = ty[0];
            let last = ty[ty.len() - 1];
            let grows = nondecreasing && first > 0.0 && last / first >= GROWTH_FACTOR;
            let mut fit = fit_inverse_quadratic(tx, ty, scale);
            let mut from = ty.len() / 2;
            while fit.is_none() && !grows && ty.len() - from >= MIN_FIT_POINTS {
                fit = fit_inverse_quadratic(&tx[from..], &ty[from..], scale);
                from += (ty.len() - from) / 2;
            }
            if let Some(limit) = fit {
                let limit = if ty.iter().all(|&y| y >= 0.0) {
                    limit.max(0.0)
                } else {
                    limit
                };
                return TailEstimate {
                    liminf: limit,
                    limsup: limit,
                    method: TailMethod::Extrapolated,
                };
            }
            if grows {
                return TailEstimate {
                    liminf: f64::INFINITY,
                    limsup: f64::INFINITY,
                    method: TailMethod::Divergent,
                };
            }
        }
    }

    TailEstimate {
        liminf: raw_min,
        limsup: raw_max,
        method: TailMethod::Raw,
    }
}

/// Fits `y = C + c₁ u + c₂ u²` with `u = 1/x` through three tail points and
/// returns `C` when all tail points match the fit.
fn fit_inverse_quadratic(xs: &[f64], ys: &[f64], scale: f64) -> Option<f64> {
    let n = xs.len();
    let idx = [0, n / 2, n - 1];
    let u: Vec<f64> = idx.iter().map(|&i| 1.0 / xs[i]).collect();
    let y: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    // Newton divided differences on (u, y).
    let d01 = (y[1] - y[0]) / (u[1] - u[0]);
    let d12 = (y[2] - y[1]) / (u[2] - u[1]);
    let c2 = (d12 - d01) / (u[2] - u[0]);
    let c1 = d01 - c2 * (u[0] + u[1]);
    let c0 = y[0] - c1 * u[0] - c2 * u[0] * u[0];
    if !(c0.is_finite() && c1.is_finite() && c2.is_finite()) {
        return None;
    }
    let tol = FIT_TOLERANCE * scale;
    let fits = xs.iter().zip(ys).all(|(&x, &yv)| {
        let uu = 1.0 / x;
        (c0 + c1 * uu + c2 * uu * uu - yv).abs() <= tol
    });
    fits.then_some(c0)
}

/// Serde adapter writing non-finite reals as `"inf"`, `"-inf"` or `"nan"`.
pub mod ext_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(de::Error::custom(format!("expected a real, got `{t}`"))),
            },
        }
    }
}
