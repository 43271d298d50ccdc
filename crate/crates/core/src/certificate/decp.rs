use serde::{Deserialize, Serialize};

use super::{inv_conjugate, lemma_with_tag, Certificate, Construction};
use crate::error::{domain, Error, Result};
use crate::radial::{growth_h, RadialDensity};
use crate::specfun::{cap_bound_logs, log_sum_exp};

/// `u = √(2/3)`.
pub const DECP_U: f64 = 0.816_496_580_927_726;
pub const DEFAULT_EPSILON: f64 = 0.01;

const GRID_DECADES: f64 = 6.0;
const GRID_PER_DECADE: usize = 10;
const TAIL_DECADES: [f64; 4] = [1e3, 1e4, 1e5, 1e6];
const HYP_SLACK: f64 = 1e-9;
const OUTER_CAP_S: f64 = 0.375;
const OUTER_CAP_T: f64 = 0.927_024_810_886_958_2; // √55 / 8

/// Cosine and sine of the cap cut out by `|y| = uR1` from `B(R1 e1, H)`.
fn middle_cap() -> (f64, f64) {
    (75f64.sqrt() / 1152f64.sqrt(), 1077f64.sqrt() / 1152f64.sqrt())
}

/// Outcome of the growth-hypothesis check. Only ever claims
/// "verified on grid": a finite sample is a semi-decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub u: f64,
    pub ln_sup_threshold: f64,
    pub ln_limsup_threshold: f64,
    pub ln_sup_on_grid: f64,
    pub argsup: f64,
    pub grid_points: usize,
    pub tail: Vec<(f64, f64)>,
    pub ln_limsup_estimate: f64,
    pub status: String,
}

struct Grid {
    radii: Vec<f64>,
    ln_h: Vec<f64>,
}

fn ln_h(density: &RadialDensity, r: f64) -> Result<f64> {
    growth_h(density, DECP_U, r).map(|h| h.ln())
}

fn sample_grid(density: &RadialDensity) -> Result<Grid> {
    let scale = density.scale();
    let n = 2 * GRID_DECADES as usize * GRID_PER_DECADE + 1;
    let radii: Vec<f64> = (0..n)
        .map(|i| scale * 10f64.powf(-GRID_DECADES + i as f64 / GRID_PER_DECADE as f64))
        .collect();
    let ln_h = radii.iter().map(|&r| ln_h(density, r)).collect::<Result<_>>()?;
    Ok(Grid { radii, ln_h })
}

fn refine_sup(density: &RadialDensity, grid: &Grid) -> Result<(f64, f64)> {
    let (i, &best) = grid
        .ln_h
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    let mut best = (grid.radii[i], best);
    let lo = grid.radii[i.saturating_sub(1)].ln();
    let hi = grid.radii[(i + 1).min(grid.radii.len() - 1)].ln();
    let (mut a, mut b) = (lo, hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = ln_h(density, x1.exp())?;
    let mut f2 = ln_h(density, x2.exp())?;
    for _ in 0..40 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = ln_h(density, x1.exp())?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = ln_h(density, x2.exp())?;
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f > best.1 {
            best = (x.exp(), f);
        }
    }
    Ok(best)
}

fn run_hypothesis(
    density: &RadialDensity,
    ln_sup_threshold: f64,
    ln_limsup_threshold: f64,
) -> Result<(HypothesisReport, Grid)> {
    let grid = sample_grid(density)?;
    let (argsup, ln_sup) = refine_sup(density, &grid)?;
    let scale = density.scale();
    let tail = TAIL_DECADES
        .iter()
        .map(|&k| ln_h(density, k * scale).map(|h| (k * scale, h)))
        .collect::<Result<Vec<_>>>()?;
    let report = HypothesisReport {
        u: DECP_U,
        ln_sup_threshold,
        ln_limsup_threshold,
        ln_sup_on_grid: ln_sup,
        argsup,
        grid_points: grid.radii.len(),
        ln_limsup_estimate: tail.last().expect("nonempty tail").1,
        tail,
        status: "verified on grid".into(),
    };
    if report.tail.windows(2).any(|w| w[1].1 > w[0].1 + HYP_SLACK) {
        return Err(Error::InconclusiveHypothesis(format!(
            "h_u tail is not settling on [1e3, 1e6]·{scale}: {:?}",
            report.tail
        )));
    }
    if ln_sup < ln_sup_threshold - HYP_SLACK {
        return Err(Error::HypothesisViolation(format!(
            "sup_R ln h_u(R) = {ln_sup:.6} < {ln_sup_threshold:.6} on the grid"
        )));
    }
    if report.ln_limsup_estimate > ln_limsup_threshold + HYP_SLACK {
        return Err(Error::HypothesisViolation(format!(
            "limsup ln h_u(R) ~ {:.6} > {ln_limsup_threshold:.6} at R = {:e}",
            report.ln_limsup_estimate,
            TAIL_DECADES[3] * scale
        )));
    }
    Ok((report, grid))
}

/// Checks `sup_R h_u(R) >= e^{ln_sup_threshold}` and
/// `limsup h_u(R) <= e^{ln_limsup_threshold}` with `u = √(2/3)`.
pub fn check_growth_hypothesis(
    density: &RadialDensity,
    ln_sup_threshold: f64,
    ln_limsup_threshold: f64,
) -> Result<HypothesisReport> {
    run_hypothesis(density, ln_sup_threshold, ln_limsup_threshold).map(|(r, _)| r)
}

/// Picks `R1` with `h_u(R1) >= lower` and `h_u(R1/u), h_u(R1/u²) < upper`,
/// as far out in `A = {h_u >= lower}` as the grid allows.
fn select_r1(density: &RadialDensity, grid: &Grid, lower: f64, upper: f64) -> Result<f64> {
    let ok = |r: f64| -> Result<bool> {
        Ok(ln_h(density, r)? >= lower
            && ln_h(density, r / DECP_U)? < upper
            && ln_h(density, r / (DECP_U * DECP_U))? < upper)
    };
    let n = grid.radii.len();
    for i in (0..n).rev().filter(|&i| grid.ln_h[i] >= lower) {
        if i + 1 < n && grid.ln_h[i + 1] < lower {
            let (mut a, mut b) = (grid.radii[i].ln(), grid.radii[i + 1].ln());
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if ln_h(density, m.exp())? >= lower {
                    a = m;
                } else {
                    b = m;
                }
            }
            if ok(a.exp())? {
                return Ok(a.exp());
            }
        }
        if ok(grid.radii[i])? {
            return Ok(grid.radii[i]);
        }
    }
    Err(Error::HypothesisViolation(
        "no grid radius R1 has h_u(R1) >= (1-eps)L with h_u(R1/u), h_u(R1/u^2) < (1+eps)L".into(),
    ))
}

/// `C(d)` in the floor `(2^{1/p} 55^{-1/6})^d / (4/(1-ε) + C/√d)`.
pub fn decp_floor_constant(d: u64, epsilon: f64) -> f64 {
    let (s, t) = middle_cap();
    let df = d as f64;
    let k = (1.0 + epsilon).powi(2) * 64.0 / (3.0 * 55f64.sqrt()) + 1.0 / (s * t);
    4.0 * k * (1.0 + 1.0 / df).sqrt() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Exact lemma route at `(v = 1/2, R1)` plus the analytic floor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecpReport {
    pub certificate: Certificate,
    pub epsilon: f64,
    pub r1: f64,
    pub log_floor: f64,
    pub floor_constant: f64,
    pub hypothesis: HypothesisReport,
    pub warnings: Vec<String>,
}

fn check_p_eps(p: f64, epsilon: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("p must be a finite real >= 1, got {p}"));
    }
    if !(epsilon > 0.0 && epsilon < 0.1) {
        return domain(format!("epsilon must lie in (0, 0.1), got {epsilon}"));
    }
    Ok(())
}

pub fn decp_certificate(density: &RadialDensity, p: f64, epsilon: f64) -> Result<DecpReport> {
    check_p_eps(p, epsilon)?;
    let d = density.dim();
    let df = d as f64;
    let ln_l = df / 6.0 * (64.0f64 / 55.0).ln();
    let (hypothesis, grid) = run_hypothesis(density, ln_l, ln_l)?;
    let r1 = select_r1(
        density,
        &grid,
        ln_l + (-epsilon).ln_1p(),
        ln_l + epsilon.ln_1p(),
    )?;
    let certificate = lemma_with_tag(density, p, 0.5, r1, Construction::Decp)?;
    let c = decp_floor_constant(d, epsilon);
    let ln_base = super::CriticalBase::Decp.ln_base(p);
    let log_floor = df * ln_base - (4.0 / (1.0 - epsilon) + c / df.sqrt()).ln();
    let mut warnings = Vec::new();
    if ln_base <= 0.0 {
        warnings.push(format!(
            "degenerate rate: p = {p} >= 6 ln2 / ln55, floor base 2^(1/p) 55^(-1/6) <= 1"
        ));
    }
    Ok(DecpReport {
        certificate,
        epsilon,
        r1,
        log_floor,
        floor_constant: c,
        hypothesis,
        warnings,
    })
}

/// Per-dimension log rates of the three decomposition pieces and the
/// resulting base `b` and critical exponent `p0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedRate {
    pub t0: f64,
    pub t1: f64,
    /// `t0 ln u`
    pub rate_inner: f64,
    /// `t1 ln(3/2) + ln(√55/8)`
    pub rate_outer: f64,
    /// `ln t` of the middle cap
    pub rate_middle: f64,
    /// `ln b(p) = -(1/q) ln 2 - max(rates)`
    pub ln_base: f64,
    pub p0: f64,
}

/// Upper end of the admissible `t1` range, `ln(64/55)/ln(9/4)`.
pub fn t1_max() -> f64 {
    (64.0f64 / 55.0).ln() / 2.25f64.ln()
}

pub fn generalized_rate(p: f64, t0: f64, t1: f64) -> Result<GeneralizedRate> {
    if !(t0 > 0.0 && t0 < 1.0) {
        return domain(format!("t0 must lie in (0, 1), got {t0}"));
    }
    if !(t1 > 0.0 && t1 < t1_max()) {
        return domain(format!("t1 must lie in (0, ln(64/55)/ln(9/4)), got {t1}"));
    }
    if !(p >= 1.0) {
        return domain(format!("p must be >= 1, got {p}"));
    }
    let rate_inner = t0 * DECP_U.ln();
    let rate_outer = t1 * 1.5f64.ln() + OUTER_CAP_T.ln();
    let rate_middle = middle_cap().1.ln();
    let worst = rate_inner.max(rate_outer).max(rate_middle);
    let ln2 = std::f64::consts::LN_2;
    Ok(GeneralizedRate {
        t0,
        t1,
        rate_inner,
        rate_outer,
        rate_middle,
        ln_base: -inv_conjugate(p) * ln2 - worst,
        p0: 1.0 / (1.0 + worst / ln2),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedReport {
    pub certificate: Certificate,
    pub epsilon: f64,
    pub r1: f64,
    pub rate: GeneralizedRate,
    pub log_floor: f64,
    pub hypothesis: HypothesisReport,
    pub warnings: Vec<String>,
}

/// The decp chain with thresholds `u^{-t0 d}` (choice of `R1`) and
/// `u^{-t1 d}` (outer shell). The floor keeps the three pieces explicit:
///
/// `2^{-d/q} / (4 [u^{t0 d}/(1-ε) + (1+ε)² u^{-2 t1 d} U(3/8) + U(s_mid)])`
/// with `U` the cap upper bound.
pub fn decp_generalized_certificate(
    density: &RadialDensity,
    p: f64,
    t0: f64,
    t1: f64,
) -> Result<GeneralizedReport> {
    let rate = generalized_rate(p, t0, t1)?;
    let epsilon = DEFAULT_EPSILON;
    check_p_eps(p, epsilon)?;
    let d = density.dim();
    let df = d as f64;
    let ln_u = DECP_U.ln();
    let ln_l0 = -t0 * df * ln_u;
    let ln_l1 = -t1 * df * ln_u;
    let (hypothesis, grid) = run_hypothesis(density, ln_l0, ln_l1)?;
    let r1 = select_r1(density, &grid, ln_l0 + (-epsilon).ln_1p(), ln_l1 + epsilon.ln_1p())?;
    let certificate = lemma_with_tag(density, p, 0.5, r1, Construction::DecpGeneralized)?;

    let (s_mid, t_mid) = middle_cap();
    let piece_inner = -ln_l0 - (-epsilon).ln_1p();
    let piece_outer = 2.0 * epsilon.ln_1p() + 2.0 * ln_l1 + cap_bound_logs(d, OUTER_CAP_S, OUTER_CAP_T).1;
    let piece_middle = cap_bound_logs(d, s_mid, t_mid).1;
    let log_floor = -df * inv_conjugate(p) * std::f64::consts::LN_2
        - 4f64.ln()
        - log_sum_exp(&[piece_inner, piece_outer, piece_middle]);
    let mut warnings = Vec::new();
    if rate.ln_base <= 0.0 {
        warnings.push(format!("degenerate rate: p = {p} >= p0 = {:.6}, base b <= 1", rate.p0));
    }
    Ok(GeneralizedReport {
        certificate,
        epsilon,
        r1,
        rate,
        log_floor,
        hypothesis,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{critical_p, CriticalBase};

    fn t0_star() -> f64 {
        (6.0 * 2f64.ln() - 55f64.ln()) / (3.0 * 3f64.ln() - 3.0 * 2f64.ln())
    }

    #[test]
    fn constants() {
        assert!((DECP_U - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((OUTER_CAP_T - 55f64.sqrt() / 8.0).abs() < 1e-15);
        let (s, t) = middle_cap();
        assert!((s - 0.25516).abs() < 1e-5);
        assert!((s * s + t * t - 1.0).abs() < 1e-15);
        assert!(t < (55.0f64 / 64.0).powf(1.0 / 6.0));
        assert!((t0_star() - 0.1246).abs() < 1e-4);
    }

    #[test]
    fn truncated_power_at_threshold() {
        let dens = RadialDensity::truncated_power(40, 1.0 - t0_star()).unwrap();
        let ln_l = 40.0 / 6.0 * (64.0f64 / 55.0).ln();
        let rep = check_growth_hypothesis(&dens, ln_l, ln_l).unwrap();
        assert!((rep.ln_sup_on_grid - ln_l).abs() < 1e-9);
        let h = ln_h(&dens, 0.5).unwrap();
        assert!((h - ln_l).abs() < 1e-10);
    }

    #[test]
    fn restricted_lebesgue_exact_dominates_floor() {
        for d in [5u64, 20, 60] {
            let dens = RadialDensity::restricted_lebesgue(d).unwrap();
            let rep = decp_certificate(&dens, 1.0, DEFAULT_EPSILON).unwrap();
            assert!(rep.certificate.log_lower_bound >= rep.log_floor - 1e-9, "d={d}");
            assert!(rep.warnings.is_empty());
            assert!(rep.r1 > 1.0 && rep.r1 < 1.0 / DECP_U);
        }
    }

    #[test]
    fn lebesgue_violates_limsup() {
        let dens = RadialDensity::lebesgue(10).unwrap();
        match decp_certificate(&dens, 1.0, 0.01) {
            Err(Error::HypothesisViolation(msg)) => assert!(msg.contains("limsup")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slow_growth_violates_sup() {
        let dens = RadialDensity::power(10, 0.99).unwrap();
        match decp_certificate(&dens, 1.0, 0.01) {
            Err(Error::HypothesisViolation(msg)) => assert!(msg.contains("sup")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_warning() {
        let dens = RadialDensity::restricted_lebesgue(10).unwrap();
        let rep = decp_certificate(&dens, 1.1, 0.01).unwrap();
        assert_eq!(rep.warnings.len(), 1);
        assert!(decp_certificate(&dens, 1.0, 0.2).is_err());
    }

    #[test]
    fn generalized_reproduces_critical_p() {
        let r = generalized_rate(1.0, t0_star(), t0_star()).unwrap();
        assert!((r.p0 - critical_p(CriticalBase::Decp)).abs() < 1e-12);
        let r = generalized_rate(1.0, 0.5, t1_max() - 1e-6).unwrap();
        assert!(r.p0 > 1.0 && r.p0.is_finite() && r.ln_base > 0.0);
        assert!(generalized_rate(1.0, 0.5, t1_max()).is_err());
        assert!(generalized_rate(1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn generalized_power_family() {
        let (t0, t1) = (0.1, 0.15);
        let dens = RadialDensity::power(30, 1.0 - 0.12).unwrap();
        let rep = decp_generalized_certificate(&dens, 1.0, t0, t1).unwrap();
        assert!(rep.certificate.log_lower_bound >= rep.log_floor - 1e-9);
        let dens = RadialDensity::truncated_power(30, 0.5).unwrap();
        let rep = decp_generalized_certificate(&dens, 1.0, 0.3, t1).unwrap();
        assert!(rep.certificate.log_lower_bound >= rep.log_floor - 1e-9);
    }

    #[test]
    fn generalized_floor_at_least_decp_floor() {
        let d = 80;
        let dens = RadialDensity::restricted_lebesgue(d).unwrap();
        let a = decp_certificate(&dens, 1.0, DEFAULT_EPSILON).unwrap();
        let b = decp_generalized_certificate(&dens, 1.0, t0_star(), t0_star()).unwrap();
        assert!(b.log_floor >= a.log_floor - 1e-12);
    }
}
