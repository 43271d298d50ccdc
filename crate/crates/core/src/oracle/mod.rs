//! Brute-force checks in low dimension: the maximal function of
//! `χ_{B(0,vR)}` evaluated directly, level-set inclusion on random radii, an
//! independent recomputation of the certificate ratio, and a Monte Carlo
//! half-space comparison.
//!
//! Everything here is one-sided: suprema are approximated from below, so an
//! oracle can fail to confirm a certificate but never falsely refute one.

mod independent;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::lemma_certificate;
use crate::error::{domain, Error, Result};
use crate::radial::{intersect_origin_ball, log_ball_offcenter, RadialDensity};
use crate::specfun::LogValue;

pub use independent::{ball_at_origin as independent_ball_at_origin, ball_offcenter as independent_ball_offcenter};

pub const DEFAULT_GRID: usize = 512;
pub const MIN_GRID: usize = 64;
pub const GOLDEN_ITERS: usize = 20;
pub const MAX_ORACLE_DIM: u64 = 10;
pub const MAX_SAMPLING_DIM: u64 = 6;
/// Slack for comparisons against `α` in log space.
pub const LEVEL_SLACK: f64 = 1e-9;

fn check_inputs(density: &RadialDensity, v: f64, radius: f64, max_dim: u64) -> Result<()> {
    if density.dim() > max_dim {
        return domain(format!("oracle runs need d <= {max_dim}, got {}", density.dim()));
    }
    if !(v > 0.0 && v <= 1.0) {
        return domain(format!("v must lie in (0, 1], got {v}"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return domain(format!("R must be positive, got {radius}"));
    }
    Ok(())
}

/// `ln[μ(B(0,vR) ∩ B(x0,r)) / μ(B(x0,r))]`, `None` for a null ball.
fn log_average(density: &RadialDensity, v: f64, radius: f64, x0: f64, r: f64) -> Result<Option<f64>> {
    let den = log_ball_offcenter(density, x0, r)?;
    if den.is_zero() {
        return Ok(None);
    }
    let num = intersect_origin_ball(density, v * radius, x0, r)?;
    Ok(Some((num.ln() - den.ln()).min(0.0)))
}

/// Lower estimate of `M_μ χ_{B(0,vR)}(x0)` with `|x0| = eval_radius`.
///
/// Scans `grid` log-spaced radii over `[1e-3 vR, 10(R + H)]` together with
/// the witness radius `√(|x0|² + v²R²)`, then refines the best bracket by
/// golden section. Returns the largest average seen.
pub fn maximal_at_point(
    density: &RadialDensity,
    v: f64,
    radius: f64,
    eval_radius: f64,
    grid: usize,
) -> Result<LogValue> {
    check_inputs(density, v, radius, MAX_ORACLE_DIM)?;
    if grid < MIN_GRID {
        return domain(format!("radius grid needs at least {MIN_GRID} points, got {grid}"));
    }
    if !(eval_radius >= 0.0) || !eval_radius.is_finite() {
        return domain(format!("evaluation radius must be >= 0, got {eval_radius}"));
    }
    let h = radius * (1.0 + v * v).sqrt();
    let (lo, hi) = ((1e-3 * v * radius).ln(), (10.0 * (radius + h)).ln());
    let step = (hi - lo) / (grid - 1) as f64;
    let mut best: Option<(usize, f64)> = None;
    let mut values = Vec::with_capacity(grid);
    for i in 0..grid {
        let y = log_average(density, v, radius, eval_radius, (lo + step * i as f64).exp())?;
        let y = y.unwrap_or(f64::NEG_INFINITY);
        if y > best.map_or(f64::NEG_INFINITY, |b| b.1) {
            best = Some((i, y));
        }
        values.push(y);
    }
    let witness = eval_radius.hypot(v * radius);
    let mut top = log_average(density, v, radius, eval_radius, witness)?.unwrap_or(f64::NEG_INFINITY);
    let Some((i, y)) = best else {
        return if top.is_finite() {
            Ok(LogValue::from_log(top))
        } else {
            Err(Error::Oracle("every grid radius gives a null ball".into()))
        };
    };
    top = top.max(y);

    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = lo + step * i.saturating_sub(1) as f64;
    let mut b = lo + step * (i + 1).min(grid - 1) as f64;
    let f = |x: f64| -> Result<f64> {
        Ok(log_average(density, v, radius, eval_radius, x.exp())?.unwrap_or(f64::NEG_INFINITY))
    };
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_ITERS {
        top = top.max(f1).max(f2);
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(LogValue::from_log(top.max(f1).max(f2)))
}

/// Result of sampling the level set `{M_μ χ_{B(0,vR)} >= α}` on `B(0,R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetReport {
    pub passed: bool,
    pub alpha: LogValue,
    /// `min_i (ln M(x_i) - ln α)`
    pub worst_margin: f64,
    pub worst_radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub radius_grid_size: usize,
}

/// Radii of `n` uniform samples in `B(0,R)`, followed by `R` itself. By
/// rotational invariance the direction of a sample does not matter.
pub fn sample_radii(d: u64, radius: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<f64> = (0..n)
        .map(|_| radius * rng.random::<f64>().powf(1.0 / d as f64))
        .collect();
    out.push(radius);
    out
}

pub fn verify_level_set(
    density: &RadialDensity,
    v: f64,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<LevelSetReport> {
    verify_level_set_with_grid(density, v, radius, samples, seed, DEFAULT_GRID)
}

pub fn verify_level_set_with_grid(
    density: &RadialDensity,
    v: f64,
    radius: f64,
    samples: usize,
    seed: u64,
    grid: usize,
) -> Result<LevelSetReport> {
    check_inputs(density, v, radius, MAX_SAMPLING_DIM)?;
    let cert = lemma_certificate(density, 1.0, v, radius)?;
    let ln_alpha = cert.log_alpha();
    let radii = sample_radii(density.dim(), radius, samples, seed);
    let (worst_margin, worst_radius) = radii
        .par_iter()
        .map(|&rho| {
            maximal_at_point(density, v, radius, rho, grid).map(|m| (m.ln() - ln_alpha, rho))
        })
        .try_reduce(
            || (f64::INFINITY, f64::NAN),
            |a, b| Ok(if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
        )?;
    Ok(LevelSetReport {
        passed: worst_margin >= -LEVEL_SLACK,
        alpha: LogValue::from_log(ln_alpha),
        worst_margin,
        worst_radius,
        samples,
        seed,
        radius_grid_size: grid,
    })
}

/// `ln[α μ(B(0,R))^{1/p} / ||χ_{B(0,vR)}||_p]` recomputed by the
/// Gauss–Legendre path.
pub fn empirical_weak_ratio(density: &RadialDensity, p: f64, v: f64, radius: f64) -> Result<LogValue> {
    check_inputs(density, v, radius, MAX_SAMPLING_DIM)?;
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("p must be a finite real >= 1, got {p}"));
    }
    let inner = independent::ball_at_origin(density, v * radius);
    if !(inner > 0.0) {
        return Err(Error::EmptyTestFunction);
    }
    let level = independent::ball_at_origin(density, radius);
    let h = (radius * radius + v * v * radius * radius).sqrt();
    let denom = independent::ball_offcenter(density, radius, h);
    let ln_alpha = inner.ln() - std::f64::consts::LN_2 - denom.ln();
    Ok(LogValue::from_log(ln_alpha + level.ln() / p - inner.ln() / p))
}

/// Monte Carlo masses of `B(Re1, H)` on either side of `{x1 = R}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceReport {
    pub mass_far: f64,
    pub mass_near: f64,
    pub std_err: f64,
    pub samples: usize,
    pub seed: u64,
    /// `mass_far <= mass_near + 4 std_err`
    pub passed: bool,
}

pub fn halfspace_check(
    density: &RadialDensity,
    radius: f64,
    h: f64,
    samples: usize,
    seed: u64,
) -> Result<HalfSpaceReport> {
    let d = density.dim();
    if d > 4 {
        return domain(format!("half-space check needs d <= 4, got {d}"));
    }
    if !(radius > 0.0 && h > 0.0) || samples == 0 {
        return domain("half-space check needs R, H > 0 and samples > 0");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vol = independent::sphere_area(d) / d as f64 * h.powi(d as i32);
    let (mut sum_far, mut sum_near, mut sq) = (0.0, 0.0, 0.0);
    let mut dir = vec![0.0; d as usize];
    for _ in 0..samples {
        for x in dir.iter_mut() {
            *x = rng.sample::<f64, _>(StandardNormal);
        }
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = h * rng.random::<f64>().powf(1.0 / d as f64) / norm;
        let offset = scale * dir[0];
        let y1 = radius + offset;
        let rest: f64 = dir[1..].iter().map(|x| (scale * x).powi(2)).sum();
        let w = density.density((y1 * y1 + rest).sqrt());
        // signed difference far - near
        let diff = if offset >= 0.0 {
            sum_far += w;
            w
        } else {
            sum_near += w;
            -w
        };
        sq += diff * diff;
    }
    let n = samples as f64;
    let mean_diff = (sum_far - sum_near) / n;
    let var = (sq / n - mean_diff * mean_diff).max(0.0);
    let std_err = vol * (var / n).sqrt();
    let mass_far = vol * sum_far / n;
    let mass_near = vol * sum_near / n;
    Ok(HalfSpaceReport {
        mass_far,
        mass_near,
        std_err,
        samples,
        seed,
        passed: mass_far <= mass_near + 4.0 * std_err,
    })
}

/// Oracle output for one `(density, p, v, R)` configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub d: u64,
    pub density: String,
    pub p: f64,
    pub v: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub point_radius: f64,
    pub alpha: LogValue,
    pub max_value: LogValue,
    pub level_set_ok: bool,
    pub level_set_worst_margin: f64,
    pub certificate_log_bound: f64,
    pub empirical_weak_ratio: LogValue,
    pub radius_grid_size: usize,
    pub samples: usize,
    pub rng_seed: u64,
}

impl OracleReport {
    /// `|certificate - empirical| <= tol` in log space.
    pub fn agrees(&self, tol: f64) -> bool {
        (self.certificate_log_bound - self.empirical_weak_ratio.ln()).abs() <= tol
    }
}

pub fn oracle_report(
    density: &RadialDensity,
    p: f64,
    v: f64,
    radius: f64,
    samples: usize,
    seed: u64,
    grid: usize,
) -> Result<OracleReport> {
    let cert = lemma_certificate(density, p, v, radius)?;
    let max_value = maximal_at_point(density, v, radius, radius, grid)?;
    let level = verify_level_set_with_grid(density, v, radius, samples, seed, grid)?;
    let emp = empirical_weak_ratio(density, p, v, radius)?;
    Ok(OracleReport {
        d: density.dim(),
        density: density.id(),
        p,
        v,
        radius,
        point_radius: radius,
        alpha: level.alpha,
        max_value,
        level_set_ok: level.passed,
        level_set_worst_margin: level.worst_margin,
        certificate_log_bound: cert.log_lower_bound,
        empirical_weak_ratio: emp,
        radius_grid_size: grid,
        samples,
        rng_seed: seed,
    })
}
