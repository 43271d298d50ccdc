use serde::{Deserialize, Serialize};

use super::{lemma_with_tag, Certificate, Construction};
use crate::error::{domain, Result};
use crate::geometry::cap_containment_params;
use crate::radial::{log_ball_at_origin, RadialDensity};
use crate::specfun::{cap_bound_logs, sphere_area_ln};

const OUTER_S: f64 = 0.375;
const OUTER_T: f64 = 0.927_024_810_886_958_2;

/// Exact route for `||x||^{-td} dx` at `(v = 1/2, R = 1, H = √5/2)` next to
/// the three-piece floor `(1/6)(2^{1/p}/c)^{(1-t)d}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub certificate: Certificate,
    pub c: f64,
    pub p0_budget: f64,
    /// `ln μ(B(0, c/2))` through the radial measure module.
    pub log_inner: f64,
    /// `ln[σ^{d-1} (c/2)^{(1-t)d} / ((1-t)d)]`
    pub log_inner_closed_form: f64,
    pub log_middle_bound: f64,
    pub log_outer_bound: f64,
    /// Both cap pieces are below the inner piece, so the floor is proven.
    pub inner_dominates: bool,
    pub log_floor: f64,
    pub d0: u64,
    pub ln_b0: f64,
}

/// Smallest `d0 >= 2` past which the explicit cap constants
/// `√(1+1/d) / (s t √(2πd))` of both cap pieces are at most 1.
pub fn doubling_d0(c: f64) -> Result<u64> {
    let cap = cap_containment_params(c)?;
    let m = (cap.s * cap.t).min(OUTER_S * OUTER_T);
    let a = 2.0 * std::f64::consts::PI * m * m;
    // a d² - d - 1 >= 0
    let root = (1.0 + (1.0 + 4.0 * a).sqrt()) / (2.0 * a);
    let mut d0 = (root.ceil() as u64).max(2);
    let fits = |d: u64| {
        let df = d as f64;
        (1.0 + 1.0 / df).sqrt() / (m * (2.0 * std::f64::consts::PI * df).sqrt()) <= 1.0
    };
    while d0 > 2 && fits(d0 - 1) {
        d0 -= 1;
    }
    while !fits(d0) {
        d0 += 1;
    }
    Ok(d0)
}

pub fn doubling_certificate(t: f64, d: u64, p: f64, p0_budget: f64, c: f64) -> Result<DoublingReport> {
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("t must lie in (0, 1), got {t}"));
    }
    if d < 2 {
        return domain(format!("doubling construction needs d >= 2, got {d}"));
    }
    if !(p >= 1.0 && p0_budget >= p) || !p0_budget.is_finite() {
        return domain(format!("need 1 <= p <= p0_budget, got p={p}, p0_budget={p0_budget}"));
    }
    let c_max = 2f64.powf(1.0 / p0_budget);
    if !(c > 1.0 && c < c_max) {
        return domain(format!(
            "c must lie in (1, 2^(1/p0_budget)) = (1, {c_max}), got {c}; base 2^(1/p0)/c would be <= 1"
        ));
    }
    let density = RadialDensity::power(d, t)?;
    let certificate = lemma_with_tag(&density, p, 0.5, 1.0, Construction::Doubling)?;

    let df = d as f64;
    let k = (1.0 - t) * df;
    let ln_sigma = sphere_area_ln(d);
    let ln_unit = ln_sigma - k.ln();
    let log_inner = log_ball_at_origin(&density, 0.5 * c)?.ln();
    let log_inner_closed_form = ln_unit + k * (0.5 * c).ln();
    let cap = cap_containment_params(c)?;
    let log_middle_bound = cap_bound_logs(d, cap.s, cap.t).1 + ln_unit;
    let log_outer_bound =
        cap_bound_logs(d, OUTER_S, OUTER_T).1 + ln_unit + k * (1.0 + 0.5 * 5f64.sqrt()).ln();
    let inner_dominates = log_middle_bound <= log_inner_closed_form && log_outer_bound <= log_inner_closed_form;
    let ln2 = std::f64::consts::LN_2;
    let log_floor = -6f64.ln() + k * (ln2 / p - c.ln());
    let d0 = doubling_d0(c)?;
    let ln_b0 = (6f64.ln() / d0 as f64).min(ln2 / p0_budget - c.ln());
    Ok(DoublingReport {
        certificate,
        c,
        p0_budget,
        log_inner,
        log_inner_closed_form,
        log_middle_bound,
        log_outer_bound,
        inner_dominates,
        log_floor,
        d0,
        ln_b0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_closed_form_agrees() {
        for (t, d, c) in [(0.5, 3, 1.1), (0.95, 100, 1.3), (0.99, 1000, 1.9)] {
            let r = doubling_certificate(t, d, 1.0, 1.0, c).unwrap();
            assert!((r.log_inner - r.log_inner_closed_form).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_radius_at_c2() {
        let (t, d) = (0.7, 12);
        let r = doubling_certificate(t, d, 1.0, 1.0, 2.0 - 1e-12).unwrap();
        let k = (1.0 - t) * d as f64;
        assert!((r.log_inner_closed_form - (sphere_area_ln(d) - k.ln())).abs() < 1e-10);
    }

    #[test]
    fn cap_pieces_vanish_as_t_to_one() {
        let gap = |t: f64| {
            let r = doubling_certificate(t, 200, 1.0, 1.0, 1.5).unwrap();
            r.log_inner_closed_form - r.log_middle_bound.max(r.log_outer_bound)
        };
        assert!(gap(0.999) > gap(0.99));
        assert!(gap(0.99) > gap(0.9));
        let r = doubling_certificate(0.999, 200, 1.0, 1.0, 1.5).unwrap();
        assert!(r.inner_dominates);
        assert!(r.certificate.log_lower_bound >= r.log_floor - 1e-9);
    }

    #[test]
    fn d0_is_explicit() {
        let d0 = doubling_d0(1.3).unwrap();
        let cap = cap_containment_params(1.3).unwrap();
        let m = (cap.s * cap.t).min(OUTER_S * OUTER_T);
        let k = |d: f64| (1.0 + 1.0 / d).sqrt() / (m * (2.0 * std::f64::consts::PI * d).sqrt());
        assert!(k(d0 as f64) <= 1.0);
        assert!(d0 == 2 || k(d0 as f64 - 1.0) > 1.0);
        assert!(doubling_d0(1.01).unwrap() > d0);
    }

    #[test]
    fn parameter_ranges() {
        assert!(doubling_certificate(0.9, 10, 2.0, 2.0, 2f64.sqrt()).is_err());
        assert!(doubling_certificate(0.9, 10, 2.0, 1.5, 1.2).is_err());
        assert!(doubling_certificate(1.0, 10, 1.0, 1.0, 1.2).is_err());
        let r = doubling_certificate(0.9, 10, 1.5, 2.0, 1.2).unwrap();
        assert!(r.ln_b0 > 0.0);
    }
}
