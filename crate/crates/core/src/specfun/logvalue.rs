use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Operands whose log magnitudes differ by more than this are not combined;
/// the larger one is returned unchanged.
pub const LOG_SUM_CUTOFF: f64 = 700.0;

/// Tolerance in log magnitude used for all invariant comparisons.
pub const LOG_TOL: f64 = 1e-10;

/// A nonnegative extended real stored as its natural logarithm.
///
/// Negative infinity encodes zero. All arithmetic stays in log space so that
/// measures of order `10^{±1000}` (ball volumes at `d = 10^4`) remain
/// representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    /// Wraps a natural logarithm. NaN is rejected.
    pub fn from_log(log_magnitude: f64) -> Self {
        assert!(!log_magnitude.is_nan(), "LogValue from NaN");
        LogValue(log_magnitude)
    }

    /// Converts a nonnegative real.
    pub fn from_value(x: f64) -> Self {
        assert!(x >= 0.0, "LogValue from negative value {x}");
        LogValue(x.ln())
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    /// The represented value; underflows to 0 or overflows to infinity
    /// outside the f64 range.
    #[inline]
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn powf(self, e: f64) -> Self {
        if self.is_zero() {
            return if e > 0.0 {
                Self::ZERO
            } else if e == 0.0 {
                Self::ONE
            } else {
                LogValue(f64::INFINITY)
            };
        }
        LogValue(self.0 * e)
    }

    /// `self - other`, or `None` when the difference would be negative
    /// beyond `LOG_TOL`. Differences within tolerance of zero clamp to zero.
    pub fn checked_sub(self, other: LogValue) -> Option<LogValue> {
        if other.is_zero() {
            return Some(self);
        }
        let diff = other.0 - self.0;
        if diff > LOG_TOL {
            return None;
        }
        if diff >= 0.0 {
            return Some(Self::ZERO);
        }
        // ln(1 - e^{diff}) with diff < 0
        Some(LogValue(self.0 + ln_one_minus_exp(diff)))
    }

    /// `1 - self` for values in `[0, 1]`.
    pub fn complement(self) -> Option<LogValue> {
        Self::ONE.checked_sub(self)
    }

    pub fn max(self, other: LogValue) -> LogValue {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: LogValue) -> LogValue {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }

    /// Log-sum-exp over an iterator.
    pub fn sum<I: IntoIterator<Item = LogValue>>(iter: I) -> LogValue {
        let items: Vec<f64> = iter.into_iter().map(|v| v.0).collect();
        LogValue(log_sum_exp(&items))
    }
}

/// `ln(1 - e^x)` for `x <= 0`, accurate on both ends.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY || hi == f64::INFINITY {
        return hi;
    }
    let gap = hi - lo;
    if gap > LOG_SUM_CUTOFF {
        return hi;
    }
    hi + (-gap).exp().ln_1p()
}

/// Stable `ln Σ exp(x_i)`; empty input gives negative infinity.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    let s: f64 = xs
        .iter()
        .filter(|&&x| m - x <= LOG_SUM_CUTOFF)
        .map(|&x| (x - m).exp())
        .sum();
    m + s.ln()
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        LogValue(log_add(self.0, rhs.0))
    }
}

impl AddAssign for LogValue {
    fn add_assign(&mut self, rhs: LogValue) {
        self.0 = log_add(self.0, rhs.0);
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        LogValue(self.0 + rhs.0)
    }
}

impl MulAssign for LogValue {
    fn mul_assign(&mut self, rhs: LogValue) {
        *self = *self * rhs;
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.is_zero(), "LogValue division by zero");
        if self.is_zero() {
            return Self::ZERO;
        }
        LogValue(self.0 - rhs.0)
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for LogValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(LogValue(x)),
            Repr::Str(s) => match s.as_str() {
                "-inf" => Ok(LogValue::ZERO),
                "inf" => Ok(LogValue(f64::INFINITY)),
                other => other
                    .parse::<f64>()
                    .map(LogValue)
                    .map_err(serde::de::Error::custom),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_is_additive_identity() {
        let x = LogValue::from_value(3.5);
        assert_eq!((x + LogValue::ZERO).ln(), x.ln());
        assert_eq!((LogValue::ZERO + x).ln(), x.ln());
        assert!((LogValue::ZERO + LogValue::ZERO).is_zero());
    }

    #[test]
    fn far_apart_operands_return_larger() {
        let a = LogValue::from_log(1000.0);
        let b = LogValue::from_log(-1000.0);
        assert_eq!((a + b).ln(), 1000.0);
    }

    #[test]
    fn sum_near_cutoff_is_exact() {
        let a = LogValue::from_log(0.0);
        let b = LogValue::from_log(-699.0);
        let expect = (-699.0f64).exp().ln_1p();
        assert_eq!((a + b).ln(), expect);
    }

    #[test]
    fn subtraction() {
        let a = LogValue::from_value(5.0);
        let b = LogValue::from_value(2.0);
        assert!((a.checked_sub(b).unwrap().value() - 3.0).abs() < 1e-14);
        assert!(b.checked_sub(a).is_none());
        assert!(a.checked_sub(a).unwrap().is_zero());
        let tiny = LogValue::from_log(-1e-3);
        assert!((tiny.complement().unwrap().value() - (-(-1e-3f64).exp_m1())).abs() < 1e-15);
    }

    #[test]
    fn powers_and_products() {
        let a = LogValue::from_value(4.0);
        assert!((a.powf(0.5).value() - 2.0).abs() < 1e-15);
        assert!((LogValue::ZERO * a).is_zero());
        assert!(LogValue::ZERO.powf(0.0) == LogValue::ONE);
        assert!(((a / LogValue::from_value(2.0)).value() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn serde_roundtrip_with_zero() {
        let v = vec![LogValue::ZERO, LogValue::from_log(-3.25)];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["-inf",-3.25]"#);
        let back: Vec<LogValue> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    fn lv() -> impl Strategy<Value = LogValue> {
        prop_oneof![
            1 => Just(LogValue::ZERO),
            8 => (-300.0f64..300.0).prop_map(LogValue::from_log),
        ]
    }

    proptest! {
        #[test]
        fn addition_commutes(a in lv(), b in lv()) {
            let x = (a + b).ln();
            let y = (b + a).ln();
            prop_assert!(x == y || (x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }

        #[test]
        fn addition_associates(a in lv(), b in lv(), c in lv()) {
            let x = ((a + b) + c).ln();
            let y = (a + (b + c)).ln();
            if x.is_finite() {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            } else {
                prop_assert_eq!(x, y);
            }
        }
    }
}
