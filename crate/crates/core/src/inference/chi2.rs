//! Chi-squared distribution via the regularized incomplete gamma function.

use serde::{Deserialize, Serialize};

use super::InferenceError;

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(a) for a > 0 (Lanczos, g = 7).
pub fn ln_gamma(a: f64) -> f64 {
    if a < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * a).sin()).ln() - ln_gamma(1.0 - a);
    }
    let a = a - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (a + i as f64);
    }
    let t = a + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (a + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized incomplete gamma pair (P(a, x), Q(a, x)).
///
/// Series for x < a + 1, Lentz continued fraction otherwise.
pub fn regularized_gamma(a: f64, x: f64) -> (f64, f64) {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        for n in 1..MAX_ITER {
            term *= x / (a + n as f64);
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        let p = (sum.ln() + log_prefactor).exp().min(1.0);
        (p, 1.0 - p)
    } else {
        let tiny = f64::MIN_POSITIVE / EPS;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        let q = (h.ln() + log_prefactor).exp().min(1.0);
        (1.0 - q, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chi2 {
    pub df: u32,
}

impl Chi2 {
    pub fn new(df: u32) -> Result<Self, InferenceError> {
        if df == 0 {
            return Err(InferenceError::Domain("degrees of freedom must be positive".into()));
        }
        Ok(Self { df })
    }

    fn half_df(&self) -> f64 {
        f64::from(self.df) / 2.0
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if self.df == 2 {
            return -(-x / 2.0).exp_m1();
        }
        regularized_gamma(self.half_df(), x / 2.0).0
    }

    /// Upper tail P(X ≥ x).
    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if self.df == 2 {
            return (-x / 2.0).exp();
        }
        regularized_gamma(self.half_df(), x / 2.0).1
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return if self.df == 2 { 0.5 } else { 0.0 };
        }
        let k = self.half_df();
        ((k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
    }

    /// Inverse of [`Chi2::cdf`].
    pub fn quantile(&self, u: f64) -> Result<f64, InferenceError> {
        if !(u > 0.0 && u < 1.0) {
            return Err(InferenceError::Domain(format!("quantile level {u} outside (0, 1)")));
        }
        if self.df == 2 {
            return Ok(-2.0 * (-u).ln_1p());
        }
        Ok(self.solve(|x| self.cdf(x) - u))
    }

    /// Inverse of [`Chi2::sf`]: the x with P(X ≥ x) = p. Accurate for tiny
    /// tail probabilities where `quantile(1 − p)` would lose precision.
    pub fn quantile_upper(&self, p: f64) -> Result<f64, InferenceError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(InferenceError::Domain(format!("tail probability {p} outside (0, 1)")));
        }
        if self.df == 2 {
            return Ok(-2.0 * p.ln());
        }
        Ok(self.solve(|x| p - self.sf(x)))
    }

    /// Bracketed Newton on an increasing function `f` whose derivative is
    /// the density, with a root in (0, ∞).
    fn solve<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut lo = 0.0;
        let mut hi = f64::from(self.df).max(1.0);
        while f(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let fx = f(x);
            if fx == 0.0 {
                return x;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = self.pdf(x);
            let newton = x - fx / slope;
            let next = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 2.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * hi {
                return next;
            }
            x = next;
        }
        x
    }
}
