//! Ball volumes, sphere areas and spherical caps in log space.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::beta::ln_beta_inc_reg;
use super::gamma::log_gamma_unchecked;
use super::logvalue::LogValue;
use crate::error::{domain, Result};

/// `ln λ^d(B^d) = (d/2) ln π - ln Γ(1 + d/2)`.
pub fn log_ball_volume(d: u64) -> Result<LogValue> {
    if d == 0 {
        return domain("ball volume requires d >= 1");
    }
    Ok(LogValue::from_log(ball_volume_ln(d)))
}

/// `ln σ^{d-1}(S^{d-1}) = ln d + ln λ^d(B^d)`.
pub fn log_sphere_area(d: u64) -> Result<LogValue> {
    if d == 0 {
        return domain("sphere area requires d >= 1");
    }
    Ok(LogValue::from_log(sphere_area_ln(d)))
}

pub(crate) fn ball_volume_ln(d: u64) -> f64 {
    let h = d as f64 / 2.0;
    h * PI.ln() - log_gamma_unchecked(1.0 + h)
}

pub(crate) fn sphere_area_ln(d: u64) -> f64 {
    (d as f64).ln() + ball_volume_ln(d)
}

/// A spherical cap `{θ ∈ S^{d-1} : <θ, e1> >= s}` with angular radius `r`,
/// `s = cos r`, `t = sin r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapSpec {
    dim: u64,
    s: f64,
    t: f64,
}

impl CapSpec {
    pub fn new(dim: u64, s: f64, t: f64) -> Result<Self> {
        if dim < 2 {
            return domain(format!("cap requires dim >= 2, got {dim}"));
        }
        if !(0.0..1.0).contains(&s) || !(t > 0.0 && t <= 1.0) {
            return domain(format!("cap requires s in [0,1), t in (0,1], got s={s}, t={t}"));
        }
        if (s * s + t * t - 1.0).abs() > 1e-12 {
            return domain(format!("cap requires s^2 + t^2 = 1, got s={s}, t={t}"));
        }
        Ok(CapSpec { dim, s, t })
    }

    /// Cap from its cosine; `t` is derived.
    pub fn from_cos(dim: u64, s: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&s) {
            return domain(format!("cap requires s in [0,1), got {s}"));
        }
        Self::new(dim, s, sine_from_cos(s))
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }
    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn t(&self) -> f64 {
        self.t
    }
}

/// `√(1 - s²)` computed as `√((1-s)(1+s))`.
pub(crate) fn sine_from_cos(s: f64) -> f64 {
    ((1.0 - s) * (1.0 + s)).sqrt()
}

/// Normalized area of the cap: `σ_N = I_{t²}((d-1)/2, 1/2) / 2`.
pub fn cap_area_exact(cap: &CapSpec) -> LogValue {
    LogValue::from_log(ln_cap_fraction_sine(cap.dim, cap.t))
}

fn ln_cap_fraction_sine(d: u64, t: f64) -> f64 {
    let a = (d as f64 - 1.0) / 2.0;
    ln_beta_inc_reg(a, 0.5, (t * t).min(1.0)) - std::f64::consts::LN_2
}

/// `(lower, upper) = (t^{d-1}/√(2πd), t^{d-1}√(1+1/d)/(s√(2πd)))`.
pub fn cap_area_bounds(cap: &CapSpec) -> Result<(LogValue, LogValue)> {
    if cap.s <= 0.0 {
        return domain("cap upper bound is undefined at s = 0");
    }
    let (lo, up) = cap_bound_logs(cap.dim, cap.s, cap.t);
    Ok((LogValue::from_log(lo), LogValue::from_log(up)))
}

pub(crate) fn cap_bound_logs(d: u64, s: f64, t: f64) -> (f64, f64) {
    let df = d as f64;
    let lower = (df - 1.0) * t.ln() - 0.5 * (2.0 * PI * df).ln();
    let upper = lower + 0.5 * (1.0 / df).ln_1p() - s.ln();
    (lower, upper)
}

/// Log of the fraction of `S^{d-1}` with `<θ, e1> >= s` for any
/// `s ∈ [-1, 1]`. Handles `d = 1`, where the sphere is `{±1}`.
pub fn ln_cap_fraction(d: u64, s: f64) -> f64 {
    if s <= -1.0 {
        return 0.0;
    }
    if s > 1.0 {
        return f64::NEG_INFINITY;
    }
    if d == 1 {
        // {+1} is in when s <= 1; {-1} only when s <= -1.
        return -std::f64::consts::LN_2;
    }
    if s == 1.0 {
        return f64::NEG_INFINITY;
    }
    let t = sine_from_cos(s);
    if s >= 0.0 {
        ln_cap_fraction_sine(d, t)
    } else {
        let small = ln_cap_fraction_sine(d, t);
        crate::specfun::logvalue::ln_one_minus_exp(small.min(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn ball_and_sphere_low_dims() {
        assert!((log_ball_volume(1).unwrap().ln() - LN_2).abs() < 1e-15);
        assert!((log_ball_volume(2).unwrap().ln() - PI.ln()).abs() < 1e-15);
        assert!((log_ball_volume(3).unwrap().ln() - (4.0 * PI / 3.0).ln()).abs() < 1e-15);
        assert!((log_sphere_area(2).unwrap().ln() - (2.0 * PI).ln()).abs() < 1e-15);
        assert!((log_sphere_area(3).unwrap().ln() - (4.0 * PI).ln()).abs() < 1e-15);
        assert!(log_ball_volume(0).is_err());
        assert!(log_sphere_area(0).is_err());
    }

    #[test]
    fn sphere_minus_ball_is_ln_d() {
        for d in [1u64, 2, 7, 100, 12345] {
            let diff = log_sphere_area(d).unwrap().ln() - log_ball_volume(d).unwrap().ln();
            assert!((diff - (d as f64).ln()).abs() < 1e-12 * (d as f64).ln().max(1.0));
        }
    }

    #[test]
    fn hemisphere_is_half() {
        for d in [2u64, 3, 10, 500, 5000] {
            let cap = CapSpec::new(d, 0.0, 1.0).unwrap();
            assert!((cap_area_exact(&cap).ln() + LN_2).abs() < 1e-14, "d={d}");
        }
    }

    #[test]
    fn circle_arc_fraction() {
        for theta in [0.1, 0.7, 1.0, 1.5] {
            let cap = CapSpec::from_cos(2, f64::cos(theta)).unwrap();
            let exact = (theta / PI).ln();
            assert!((cap_area_exact(&cap).ln() - exact).abs() < 1e-13, "theta={theta}");
        }
    }

    #[test]
    fn bounds_reject_s_zero_and_low_dim() {
        let cap = CapSpec::new(5, 0.0, 1.0).unwrap();
        assert!(cap_area_bounds(&cap).is_err());
        assert!(CapSpec::new(1, 0.5, 0.75f64.sqrt()).is_err());
        assert!(CapSpec::new(3, 0.5, 0.5).is_err());
        assert!(CapSpec::from_cos(3, 1.0).is_err());
    }

    #[test]
    fn bounds_bracket_circle_arc() {
        let cap = CapSpec::new(2, 0.5, 0.75f64.sqrt()).unwrap();
        let (lo, up) = cap_area_bounds(&cap).unwrap();
        let exact = (1.0f64 / 3.0).ln();
        assert!(lo.ln() < exact && exact < up.ln());
    }

    #[test]
    fn negative_cosine_is_complement() {
        for d in [1u64, 2, 3, 8, 40] {
            for s in [0.1, 0.4, 0.9] {
                let a = ln_cap_fraction(d, s).exp();
                let b = ln_cap_fraction(d, -s).exp();
                if d == 1 {
                    assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
                } else {
                    assert!((a + b - 1.0).abs() < 1e-13, "d={d} s={s}");
                }
            }
        }
        assert_eq!(ln_cap_fraction(4, -1.0), 0.0);
        assert_eq!(ln_cap_fraction(4, 1.0), f64::NEG_INFINITY);
    }
}
