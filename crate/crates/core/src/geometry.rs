//! Closed-form planar circle intersections that fix the cap parameters of
//! each ball decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{domain, DegenerateCap, Error, Result};
use crate::specfun::sine_from_cos;

/// A cap on the sphere of radius `sphere_radius` about the origin, given by
/// the cosine `s` and sine `t` of its angular radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCapParams {
    pub s: f64,
    pub t: f64,
    pub sphere_radius: f64,
}

/// Cap cut from the sphere `|y| = rho` by the ball `B(R0 e1, H)`.
pub fn sphere_ball_cap(rho: f64, r0: f64, h: f64) -> Result<ConeCapParams> {
    if !(rho > 0.0 && r0 > 0.0 && h > 0.0) {
        return domain(format!("sphere_ball_cap needs positive radii, got rho={rho}, R0={r0}, H={h}"));
    }
    let inner = (r0 - h).abs();
    let outer = r0 + h;
    let tol = 1e-14 * outer;
    if (rho - inner).abs() <= tol || (rho - outer).abs() <= tol {
        return Err(Error::DegenerateCap(DegenerateCap::Tangent));
    }
    if rho > outer {
        return Err(Error::DegenerateCap(DegenerateCap::Disjoint));
    }
    if rho < inner {
        return Err(Error::DegenerateCap(if h > r0 {
            DegenerateCap::Contained
        } else {
            DegenerateCap::Enclosed
        }));
    }
    let s = (rho * rho + r0 * r0 - h * h) / (2.0 * rho * r0);
    Ok(ConeCapParams {
        s,
        t: sine_from_cos(s),
        sphere_radius: rho,
    })
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 1.0 && c <= 2.0) {
        return domain(format!("c must lie in (1, 2], got {c}"));
    }
    Ok(())
}

/// `x2(c) = √(18c² - c⁴ - 1) / (4c)`: half-chord of the intersection of the
/// circles `|x| = c/2` and `|x - e1| = √5/2`, normalized by `c/2`.
pub fn doubling_cap_x2(c: f64) -> Result<f64> {
    check_c(c)?;
    Ok((18.0 * c * c - c.powi(4) - 1.0).sqrt() / (4.0 * c))
}

/// Unit-sphere cap `C((c² - 1)/(4c), e1)` whose cone contains the middle
/// piece `(B(0,1) \ B(0,c/2)) ∩ B(e1, √5/2)`.
///
/// `s² + t² = 1` holds identically: `(c²-1)² + 18c² - c⁴ - 1 = 16c²`.
pub fn cap_containment_params(c: f64) -> Result<ConeCapParams> {
    check_c(c)?;
    Ok(ConeCapParams {
        s: (c * c - 1.0) / (4.0 * c),
        t: doubling_cap_x2(c)?,
        sphere_radius: 1.0,
    })
}

/// Radius of the smallest origin ball containing `B(R0 e1, H) ∩ {x1 <= R0}`.
pub fn halfball_enclosing_radius(r0: f64, h: f64) -> f64 {
    r0.hypot(h)
}
