//! Scalar helpers on top of `libm`.
//!
//! Everything numeric in the crate funnels through here so results do not
//! depend on the host's libm.

pub use core::f64::consts::LN_2;

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn atanh(x: f64) -> f64 {
    libm::atanh(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `ln cosh(x)` without overflow for large `|x|`.
#[inline]
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + libm::log1p(libm::exp(-2.0 * a)) - LN_2
}

/// `ln(1 + e^x)`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(libm::exp(-x))
    } else {
        libm::log1p(libm::exp(x))
    }
}

/// `1 / (1 + e^{-x})`.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// Streaming log-sum-exp accumulator.
///
/// Weighted sums `Σ e^{w} v` are kept relative to the running maximum of the
/// log-weights, and rescaled when a larger one arrives.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    /// Adds `e^{log_w}` and returns `(scale_old, weight_new)`: the factor by
    /// which sums accumulated so far must be multiplied, and the relative
    /// weight of the new term.
    #[inline]
    pub fn push(&mut self, log_w: f64) -> (f64, f64) {
        if log_w > self.max {
            let scale = if self.max == f64::NEG_INFINITY {
                0.0
            } else {
                libm::exp(self.max - log_w)
            };
            self.sum = self.sum * scale + 1.0;
            self.max = log_w;
            (scale, 1.0)
        } else {
            let w = libm::exp(log_w - self.max);
            self.sum += w;
            (1.0, w)
        }
    }

    /// Merges another accumulator; returns the scale factors to apply to
    /// sums tied to `self` and to `other` respectively.
    pub fn merge(&mut self, other: &LogSumExp) -> (f64, f64) {
        if other.max == f64::NEG_INFINITY {
            return (1.0, 0.0);
        }
        if self.max == f64::NEG_INFINITY {
            *self = other.clone();
            return (0.0, 1.0);
        }
        let max = self.max.max(other.max);
        let a = libm::exp(self.max - max);
        let b = libm::exp(other.max - max);
        self.sum = self.sum * a + other.sum * b;
        self.max = max;
        (a, b)
    }

    /// Normalizer `Σ e^{w}` relative to the running maximum.
    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn ln_total(&self) -> f64 {
        self.max + libm::log(self.sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_cosh_matches_naive_in_safe_range() {
        for &x in &[-5.0, -0.3, 0.0, 0.7, 3.0] {
            let naive = libm::log(libm::cosh(x));
            assert!((ln_cosh(x) - naive).abs() < 1e-14, "x = {x}");
        }
        assert_eq!(ln_cosh(0.0), 0.0);
        // no overflow
        assert!((ln_cosh(1000.0) - (1000.0 - LN_2)).abs() < 1e-10);
    }

    #[test]
    fn softplus_is_stable() {
        assert!((softplus(0.0) - LN_2).abs() < 1e-16);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!(softplus(-800.0) >= 0.0);
    }

    #[test]
    fn logsumexp_matches_direct() {
        let ws = [0.1, 5.0, -3.0, 2.5, 7.0];
        let mut acc = LogSumExp::new();
        for &w in &ws {
            acc.push(w);
        }
        let direct: f64 = ws.iter().map(|w| libm::exp(*w)).sum::<f64>();
        assert!((acc.ln_total() - libm::log(direct)).abs() < 1e-13);

        let mut left = LogSumExp::new();
        let mut right = LogSumExp::new();
        for &w in &ws[..2] {
            left.push(w);
        }
        for &w in &ws[2..] {
            right.push(w);
        }
        left.merge(&right);
        assert!((left.ln_total() - acc.ln_total()).abs() < 1e-13);
    }
}
