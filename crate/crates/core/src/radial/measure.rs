//! Log-measures of origin-centered balls, off-center balls and their
//! intersections with origin-centered shells.
//!
//! Off-center balls are reduced to a single radial integral: the fraction of
//! the sphere `|y| = ρ` inside `B(x0, r)` is a spherical cap whose normalized
//! area is exact, so only the ρ-integral is discretized.

use serde::{Deserialize, Serialize};

use super::density::{PowerPiece, RadialDensity};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_log, DEFAULT_REL_TOL};
use crate::specfun::{ln_beta_inc_reg_xy, ln_one_minus_exp, sphere_area_ln, LogValue};

/// `ln ∫_a^b c ρ^{k-1} dρ` with `k = d - e > 0`.
fn ln_power_piece_integral(coef: f64, k: f64, a: f64, b: f64) -> f64 {
    if coef == 0.0 || b <= a {
        return f64::NEG_INFINITY;
    }
    if b.is_infinite() {
        return f64::INFINITY;
    }
    let head = coef.ln() + k * b.ln() - k.ln();
    if a <= 0.0 {
        head
    } else {
        head + ln_one_minus_exp(k * (a.ln() - b.ln()))
    }
}

fn closed_form_radial(pieces: &[PowerPiece], d: f64, lo: f64, hi: f64) -> LogValue {
    let terms: Vec<LogValue> = pieces
        .iter()
        .filter_map(|p| {
            let a = p.start.max(lo);
            let b = p.end.min(hi);
            (b > a).then(|| LogValue::from_log(ln_power_piece_integral(p.coef, d - p.exponent, a, b)))
        })
        .collect();
    LogValue::sum(terms)
}

/// `ln ∫_lo^hi f(ρ) ρ^{d-1} dρ` by quadrature in `σ = ln ρ`.
fn quadrature_radial(density: &RadialDensity, lo: f64, hi: f64) -> Result<LogValue> {
    let d = density.dim() as f64;
    let top = hi.min(density.support_radius().unwrap_or(f64::INFINITY));
    if !(top > lo) {
        return Ok(LogValue::ZERO);
    }
    if top.is_infinite() {
        return domain("quadrature over an unbounded radial range");
    }
    let window = 100.0 / d + 5.0;
    let s_hi = top.ln();
    let s_lo = if lo > 0.0 { lo.ln().max(s_hi - window) } else { s_hi - window };
    let mut points = vec![s_lo];
    points.extend(
        density
            .breakpoints()
            .into_iter()
            .map(f64::ln)
            .filter(|&b| b > s_lo && b < s_hi),
    );
    points.push(s_hi);
    integrate_log(|s| density.ln_density(s.exp()) + d * s, &points, DEFAULT_REL_TOL)
}

fn radial_integral(density: &RadialDensity, lo: f64, hi: f64) -> Result<LogValue> {
    if !(hi > lo) {
        return Ok(LogValue::ZERO);
    }
    match density.power_pieces() {
        Some(pieces) => Ok(closed_form_radial(&pieces, density.dim() as f64, lo, hi)),
        None => quadrature_radial(density, lo, hi),
    }
}

/// `ln μ(B(0, R))`.
pub fn log_ball_at_origin(density: &RadialDensity, radius: f64) -> Result<LogValue> {
    if !(radius > 0.0) {
        return domain(format!("ball radius must be positive, got {radius}"));
    }
    let radial = radial_integral(density, 0.0, radius)?;
    Ok(radial * LogValue::from_log(sphere_area_ln(density.dim())))
}

/// `ln h_u(R) = ln μ(B(0,R)) - ln μ(B(0,uR))`.
pub fn growth_h(density: &RadialDensity, u: f64, radius: f64) -> Result<LogValue> {
    if !(u > 0.0 && u < 1.0) {
        return domain(format!("growth ratio u must lie in (0,1), got {u}"));
    }
    let inner = log_ball_at_origin(density, u * radius)?;
    if inner.is_zero() {
        return Err(Error::UndefinedGrowth);
    }
    let outer = log_ball_at_origin(density, radius)?;
    Ok(LogValue::from_log((outer.ln() - inner.ln()).max(0.0)))
}

/// Sampled values of `h_u` at a list of radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub u: f64,
    pub samples: Vec<(f64, LogValue)>,
}

impl GrowthProfile {
    pub fn new(density: &RadialDensity, u: f64, radii: &[f64]) -> Result<Self> {
        let samples = radii
            .iter()
            .map(|&r| growth_h(density, u, r).map(|h| (r, h)))
            .collect::<Result<Vec<_>>>()?;
        Ok(GrowthProfile { u, samples })
    }

    /// Largest sampled `ln h_u`.
    pub fn ln_sup(&self) -> f64 {
        self.samples.iter().map(|(_, h)| h.ln()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether every sample lies in `[0, -d ln u]` up to `slack`.
    pub fn within_bounds(&self, dim: u64, slack: f64) -> bool {
        let cap = -(dim as f64) * self.u.ln() + slack;
        self.samples.iter().all(|(_, h)| h.ln() >= -slack && h.ln() <= cap)
    }
}

/// Geometry of the sphere/ball intersection `{|y| = ρ} ∩ B(x0, r)` with
/// `|x0| = R0 > 0`: caps exist for `ρ ∈ (|R0 - r|, R0 + r)`.
struct CapBand {
    r0: f64,
    r: f64,
    a0: f64,
    b0: f64,
    half_dim: f64,
    dim: u64,
}

impl CapBand {
    fn new(dim: u64, r0: f64, r: f64) -> Self {
        CapBand {
            r0,
            r,
            a0: (r0 - r).abs(),
            b0: r0 + r,
            half_dim: (dim as f64 - 1.0) / 2.0,
            dim,
        }
    }

    fn width(&self) -> f64 {
        self.b0 - self.a0
    }

    /// `ρ(u) = a0 + (b0 - a0)(3u² - 2u³)`, flattening the square-root
    /// behavior of the cap area at both ends of the band.
    fn rho(&self, u: f64) -> (f64, f64, f64) {
        let w = self.width();
        let near = w * u * u * (3.0 - 2.0 * u);
        let far_end = w * (1.0 - u) * (1.0 - u) * (1.0 + 2.0 * u);
        (self.a0 + near, near, far_end)
    }

    fn u_of(&self, rho: f64) -> f64 {
        let y = ((rho - self.a0) / self.width()).clamp(0.0, 1.0);
        0.5 - ((1.0 - 2.0 * y).asin() / 3.0).sin()
    }

    /// ln of the fraction of the ρ-sphere inside the ball, given
    /// `ρ - a0` (`near`) and `b0 - ρ` (`far_end`) computed without cancellation.
    fn ln_fraction(&self, rho: f64, near: f64, far_end: f64) -> f64 {
        if self.dim == 1 {
            return -std::f64::consts::LN_2;
        }
        let denom = 2.0 * rho * self.r0;
        let (b, c) = if self.r0 >= self.r {
            (near, rho + self.a0)
        } else {
            (rho + self.a0, near)
        };
        let one_minus_s = far_end * b / denom;
        let one_plus_s = c * (rho + self.r0 + self.r) / denom;
        let s = 0.5 * (one_plus_s - one_minus_s);
        let t2 = one_minus_s * one_plus_s;
        let a = self.half_dim;
        let ln_small = if t2 < 0.5 {
            ln_beta_inc_reg_xy(a, 0.5, t2, s * s)
        } else {
            ln_beta_inc_reg_xy(a, 0.5, 1.0 - s * s, s * s)
        } - std::f64::consts::LN_2;
        if s >= 0.0 {
            ln_small
        } else {
            ln_one_minus_exp(ln_small.min(0.0))
        }
    }
}

/// `ln μ(B(x0, r) ∩ {rho_min < |y| <= rho_max})` with `|x0| = R0`.
pub fn shell_ball_intersection(
    density: &RadialDensity,
    rho_min: f64,
    rho_max: f64,
    center_radius: f64,
    r: f64,
) -> Result<LogValue> {
    if !(r > 0.0) {
        return domain(format!("ball radius must be positive, got {r}"));
    }
    if !(center_radius >= 0.0) {
        return domain(format!("center radius must be >= 0, got {center_radius}"));
    }
    if rho_min < 0.0 || rho_max.is_nan() {
        return domain("shell radii must satisfy 0 <= rho_min");
    }
    let d = density.dim();
    let ln_sphere = LogValue::from_log(sphere_area_ln(d));
    if !(rho_max > rho_min) {
        return Ok(LogValue::ZERO);
    }
    // Spheres entirely inside the ball.
    let full_hi = (r - center_radius).min(rho_max);
    let full = radial_integral(density, rho_min, full_hi)?;
    if center_radius == 0.0 {
        return Ok(full * ln_sphere);
    }
    let band = CapBand::new(d, center_radius, r);
    let lo = band.a0.max(rho_min);
    let hi = band.b0.min(rho_max).min(density.support_radius().unwrap_or(f64::INFINITY));
    if !(hi > lo) {
        return Ok(full * ln_sphere);
    }
    let u_lo = if lo > band.a0 { band.u_of(lo) } else { 0.0 };
    let u_hi = if hi < band.b0 { band.u_of(hi) } else { 1.0 };
    let mut points = vec![u_lo];
    points.extend(
        density
            .breakpoints()
            .into_iter()
            .filter(|&b| b > lo && b < hi)
            .map(|b| band.u_of(b)),
    );
    points.push(u_hi);
    let ln_width6 = (6.0 * band.width()).ln();
    let dm1 = d as f64 - 1.0;
    let integrand = |u: f64| {
        let (rho, near, far_end) = band.rho(u);
        if !(rho > 0.0) || !(near > 0.0) || !(far_end > 0.0) {
            return f64::NEG_INFINITY;
        }
        let lf = density.ln_density(rho);
        if lf == f64::NEG_INFINITY {
            return lf;
        }
        lf + dm1 * rho.ln() + band.ln_fraction(rho, near, far_end) + ln_width6 + u.ln() + (1.0 - u).ln()
    };
    let capped = integrate_log(integrand, &points, DEFAULT_REL_TOL)?;
    Ok((full + capped) * ln_sphere)
}

/// `ln μ(B(x0, r))` with `|x0| = R0`.
pub fn log_ball_offcenter(density: &RadialDensity, center_radius: f64, r: f64) -> Result<LogValue> {
    shell_ball_intersection(density, 0.0, f64::INFINITY, center_radius, r)
}

/// `ln μ(B(0, rho_max) ∩ B(x0, r))` with `|x0| = R0`.
pub fn intersect_origin_ball(
    density: &RadialDensity,
    rho_max: f64,
    center_radius: f64,
    r: f64,
) -> Result<LogValue> {
    if !(rho_max > 0.0) {
        return domain(format!("rho_max must be positive, got {rho_max}"));
    }
    shell_ball_intersection(density, 0.0, rho_max, center_radius, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn lebesgue_disk() {
        let leb = RadialDensity::lebesgue(2).unwrap();
        assert!((log_ball_at_origin(&leb, 1.0).unwrap().ln() - PI.ln()).abs() < 1e-15);
        assert!(log_ball_at_origin(&leb, 0.0).is_err());
        assert!(log_ball_at_origin(&leb, -1.0).is_err());
    }

    #[test]
    fn power_closed_form() {
        for (d, t, r) in [(3u64, 0.5, 0.7), (50, 0.9, 2.0), (10_000, 0.95, 0.5)] {
            let dens = RadialDensity::power(d, t).unwrap();
            let k = (1.0 - t) * d as f64;
            let expect = sphere_area_ln(d) + k * f64::ln(r) - k.ln();
            let got = log_ball_at_origin(&dens, r).unwrap().ln();
            assert!((got - expect).abs() < 1e-12 * expect.abs().max(1.0), "d={d}");
        }
    }

    #[test]
    fn log_singularity_matches_antiderivative() {
        // ∫_0^R (-ln ρ) ρ^{d-1} dρ = R^d (1/d - ln R)/d for R <= 1
        for (d, r) in [(1u64, 0.3), (3, 0.5), (10, 0.9), (100, 0.99), (3, 4.0)] {
            let dens = RadialDensity::log_singularity(d).unwrap();
            let df = d as f64;
            let rr = f64::min(r, 1.0);
            let exact = df * rr.ln() + (1.0 / df - rr.ln()).ln() - df.ln() + sphere_area_ln(d);
            let got = log_ball_at_origin(&dens, r).unwrap().ln();
            assert!((got - exact).abs() < 1e-10, "d={d} r={r}: {got} vs {exact}");
        }
    }

    #[test]
    fn growth_examples() {
        let leb = RadialDensity::lebesgue(7).unwrap();
        for r in [1e-3, 1.0, 1e4] {
            let h = growth_h(&leb, 0.5, r).unwrap().ln();
            assert!((h - 7.0 * 2f64.ln()).abs() < 1e-12);
        }
        let rl = RadialDensity::restricted_lebesgue(5).unwrap();
        assert_eq!(growth_h(&rl, 0.5, 4.0).unwrap().ln(), 0.0);
        let tp = RadialDensity::truncated_power(20, 0.3).unwrap();
        let h = growth_h(&tp, 0.8, 0.9).unwrap().ln();
        assert!((h + 0.7 * 20.0 * 0.8f64.ln()).abs() < 1e-10);
        let pw = RadialDensity::piecewise(
            3,
            vec![super::super::Segment {
                end: 1.0,
                profile: super::super::Profile::Constant(1.0),
            }],
        )
        .unwrap();
        assert!(growth_h(&pw, 0.5, 2.0).is_ok());
        assert!(growth_h(&leb, 1.0, 1.0).is_err());
    }

    #[test]
    fn growth_undefined_when_inner_ball_empty() {
        let pw = RadialDensity::piecewise(
            3,
            vec![
                super::super::Segment { end: 1.0, profile: super::super::Profile::Constant(0.0) },
                super::super::Segment { end: 2.0, profile: super::super::Profile::Constant(0.0) },
            ],
        );
        assert!(pw.is_err());
    }

    #[test]
    fn offcenter_at_origin_reduces() {
        let leb = RadialDensity::lebesgue(3).unwrap();
        let v = log_ball_offcenter(&leb, 0.0, 1.0).unwrap().ln();
        assert!((v - (4.0 * PI / 3.0).ln()).abs() < 1e-14);
    }

    fn lens_area(d: f64, r1: f64, r2: f64) -> f64 {
        // two disks of radii r1, r2 with centers at distance d
        let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
        let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
        r1 * r1 * (a1 - a1.sin() * a1.cos()) + r2 * r2 * (a2 - a2.sin() * a2.cos())
    }

    #[test]
    fn planar_lens() {
        let rl = RadialDensity::restricted_lebesgue(2).unwrap();
        let h = 5f64.sqrt() / 2.0;
        let got = log_ball_offcenter(&rl, 1.0, h).unwrap().value();
        let exact = lens_area(1.0, 1.0, h);
        assert!(rel(got, exact) < 1e-8, "{got} vs {exact}");
        let leb = RadialDensity::lebesgue(2).unwrap();
        let got = intersect_origin_ball(&leb, 1.0, 1.0, h).unwrap().value();
        assert!(rel(got, exact) < 1e-8);
    }

    #[test]
    fn one_dimensional_interval() {
        let leb = RadialDensity::lebesgue(1).unwrap();
        let v = log_ball_offcenter(&leb, 1.0, 2f64.sqrt()).unwrap().value();
        assert!(rel(v, 2.0 * 2f64.sqrt()) < 1e-12);
        let v = log_ball_offcenter(&leb, 3.0, 0.5).unwrap().value();
        assert!(rel(v, 1.0) < 1e-12);
    }

    #[test]
    fn constraint_inactive_and_vanishing() {
        let dens = RadialDensity::power(4, 0.5).unwrap();
        let full = log_ball_offcenter(&dens, 1.0, 1.2).unwrap().ln();
        let capped = intersect_origin_ball(&dens, 2.2, 1.0, 1.2).unwrap().ln();
        assert!((full - capped).abs() < 1e-12);
        let tiny = intersect_origin_ball(&dens, 1e-9, 1.0, 1.2).unwrap().ln();
        assert!(tiny < full - 20.0);
        let none = intersect_origin_ball(&dens, 0.1, 1.0, 0.5).unwrap();
        assert!(none.is_zero());
    }

    #[test]
    fn additivity_of_shells() {
        let dens = RadialDensity::truncated_power(5, 0.4).unwrap();
        for (r0, r, cut) in [(1.0, 1.118, 0.6), (0.7, 0.4, 0.8), (0.3, 0.9, 0.5)] {
            let whole = log_ball_offcenter(&dens, r0, r).unwrap();
            let inner = intersect_origin_ball(&dens, cut, r0, r).unwrap();
            let outer = shell_ball_intersection(&dens, cut, f64::INFINITY, r0, r).unwrap();
            assert!(((inner + outer).ln() - whole.ln()).abs() < 1e-8);
        }
    }
}
