//! A second, quadrature-only evaluation of ball measures: tensor
//! Gauss–Legendre over `(ρ, θ)` with `θ` the angle to `e1`. Shares nothing
//! with the log-space closed forms beyond the density itself.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::radial::RadialDensity;

const NODES: usize = 64;

struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

fn legendre_rule(n: usize) -> Rule {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    Rule { x, w }
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(NODES))
}

fn gauss<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let r = rule();
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    r.x.iter().zip(&r.w).map(|(x, w)| w * f(m + h * x)).sum::<f64>() * h
}

/// `∫_a^b f` under `x = a + (b-a)(1 - cos φ)/2`, which smooths square-root
/// and power endpoint behavior at both ends.
fn clustered<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let w = b - a;
    gauss(0.0, PI, |phi| {
        let x = a + 0.5 * w * (1.0 - phi.cos());
        0.5 * w * phi.sin() * f(x)
    })
}

/// Area of the unit sphere in `R^n` by `A(n) = A(n-2) 2π/(n-2)`.
pub(crate) fn sphere_area(n: u64) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => sphere_area(n - 2) * 2.0 * PI / (n as f64 - 2.0),
    }
}

/// `∫_0^θ sin^{d-2}`.
fn angular(d: u64, theta: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    gauss(0.0, theta, |x| x.sin().powi(d as i32 - 2))
}

fn radial_panels(density: &RadialDensity, lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(density.breakpoints());
    pts.extend(extra.iter().copied());
    if let Some(s) = density.support_radius() {
        pts.push(s);
    }
    pts.retain(|&x| x >= lo && x <= hi && x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs().max(1.0));
    pts
}

fn radial_weight(density: &RadialDensity, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    density.density(rho) * rho.powi(density.dim() as i32 - 1)
}

/// `μ(B(0, r))`.
pub fn ball_at_origin(density: &RadialDensity, r: f64) -> f64 {
    let pts = radial_panels(density, 0.0, r, &[]);
    let radial: f64 = pts
        .windows(2)
        .map(|w| clustered(w[0], w[1], |rho| radial_weight(density, rho)))
        .sum();
    sphere_area(density.dim()) * radial
}

/// `μ(B(x0, r))` with `|x0| = c > 0`.
pub fn ball_offcenter(density: &RadialDensity, c: f64, r: f64) -> f64 {
    let d = density.dim();
    let near = (c - r).abs();
    let far = c + r;
    if d == 1 {
        let half = |x: f64| {
            let pts = radial_panels(density, 0.0, x, &[]);
            pts.windows(2).map(|w| clustered(w[0], w[1], |rho| density.density(rho))).sum::<f64>()
        };
        return if r > c { half(near) + half(far) } else { half(far) - half(near) };
    }
    let full_sphere = angular(d, PI);
    let pts = radial_panels(density, 0.0, far, &[near]);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= near && r > c {
            total += full_sphere * clustered(a, b, |rho| radial_weight(density, rho));
        } else if a >= near {
            total += clustered(a, b, |rho| {
                let s = ((rho * rho + c * c - r * r) / (2.0 * rho * c)).clamp(-1.0, 1.0);
                radial_weight(density, rho) * angular(d, s.acos())
            });
        }
    }
    sphere_area(d - 1) * total
}
