use serde::{Deserialize, Serialize};

use super::{conjugate, inv_conjugate, lemma_certificate, lemma_with_tag, Certificate, Construction};
use crate::error::{domain, Error, Result};
use crate::radial::{Family, RadialDensity};
use crate::specfun::ball_volume_ln;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueBallReport {
    pub certificate: Certificate,
    pub log_floor: f64,
}

/// `ln[(1/2)^{d/q} λ^d(B^d) / (2 λ^{d-1}(B^{d-1})) (3(d+1)/16) (8/√55)^{d+1}]`
pub fn lebesgue_ball_floor(d: u64, p: f64) -> Result<f64> {
    if d < 2 || !(p >= 1.0) {
        return domain(format!("need d >= 2 and p >= 1, got d={d}, p={p}"));
    }
    let df = d as f64;
    Ok(-df * inv_conjugate(p) * std::f64::consts::LN_2 + ball_volume_ln(d)
        - std::f64::consts::LN_2
        - ball_volume_ln(d - 1)
        + (3.0 * (df + 1.0) / 16.0).ln()
        + (df + 1.0) * (8.0 / 55f64.sqrt()).ln())
}

/// Lebesgue measure restricted to the unit ball, `(v, R) = (1/2, 1)`.
pub fn lebesgue_ball_certificate(d: u64, p: f64) -> Result<LebesgueBallReport> {
    let log_floor = lebesgue_ball_floor(d, p)?;
    let density = RadialDensity::restricted_lebesgue(d)?;
    let certificate = lemma_with_tag(&density, p, 0.5, 1.0, Construction::LebesgueBall)?;
    Ok(LebesgueBallReport { certificate, log_floor })
}

/// `g(v, q) = 2 v^{1/q} / √(3 + 2v² - v⁴)`, the per-dimension base of the
/// restricted-Lebesgue bound as a function of `v`.
pub fn proxy_g(v: f64, q: f64) -> f64 {
    let w = v * v;
    let num = if q.is_infinite() { 2.0 } else { 2.0 * v.powf(1.0 / q) };
    num / (3.0 + 2.0 * w - w * w).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub v_star: f64,
    pub certificate: Certificate,
    pub unimodal: bool,
    /// `g(v_star, q)`, restricted Lebesgue only.
    pub proxy_g: Option<f64>,
}

const COARSE: usize = 40;

/// Maximizes the exact lemma bound over `v ∈ (0, 1]`.
pub fn optimize_v(density: &RadialDensity, p: f64, radius: f64) -> Result<OptimizeReport> {
    if !(p > 1.0) || !p.is_finite() {
        return domain(format!("optimize_v needs a finite p > 1, got {p}"));
    }
    let eval = |v: f64| match lemma_certificate(density, p, v, radius) {
        Ok(c) => Ok(Some(c)),
        Err(Error::EmptyTestFunction) => Ok(None),
        Err(e) => Err(e),
    };
    let value = |c: &Option<Certificate>| c.as_ref().map_or(f64::NEG_INFINITY, |c| c.log_lower_bound);

    let vs: Vec<f64> = (1..=COARSE).map(|i| i as f64 / COARSE as f64).collect();
    let coarse = vs.iter().map(|&v| eval(v)).collect::<Result<Vec<_>>>()?;
    let ys: Vec<f64> = coarse.iter().map(value).collect();
    let (i_best, _) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    let mut best = coarse[i_best].clone().ok_or(Error::EmptyTestFunction)?;
    let tol = 1e-12;
    let finite: Vec<f64> = ys.iter().copied().filter(|y| y.is_finite()).collect();
    let peak = finite.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    let unimodal = finite[..=peak].windows(2).all(|w| w[1] >= w[0] - tol)
        && finite[peak..].windows(2).all(|w| w[1] <= w[0] + tol);

    if unimodal {
        let mut a = vs[i_best.saturating_sub(1)];
        let mut b = vs[(i_best + 1).min(COARSE - 1)];
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut c1 = eval(x1)?;
        let mut c2 = eval(x2)?;
        while b - a > 1e-9 {
            if value(&c1) >= value(&c2) {
                b = x2;
                x2 = x1;
                c2 = c1;
                x1 = b - g * (b - a);
                c1 = eval(x1)?;
            } else {
                a = x1;
                x1 = x2;
                c1 = c2;
                x2 = a + g * (b - a);
                c2 = eval(x2)?;
            }
        }
        for c in [c1, c2].into_iter().flatten() {
            if c.log_lower_bound > best.log_lower_bound {
                best = c;
            }
        }
    }
    let proxy = matches!(density.family(), Family::RestrictedLebesgue).then(|| proxy_g(best.v, conjugate(p)));
    Ok(OptimizeReport {
        v_star: best.v,
        certificate: best,
        unimodal,
        proxy_g: proxy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{critical_p, CriticalBase};
    use crate::radial::log_ball_offcenter;

    #[test]
    fn planar_case() {
        let r = lebesgue_ball_certificate(2, 1.0).unwrap();
        // unit disk ∩ disk(e1, √5/2): lens with chord at x = 3/8
        let lens = {
            let (r1, r2, dd) = (1.0f64, 5f64.sqrt() / 2.0, 1.0f64);
            let a1 = r1 * r1 * ((dd * dd + r1 * r1 - r2 * r2) / (2.0 * dd * r1)).acos();
            let a2 = r2 * r2 * ((dd * dd + r2 * r2 - r1 * r1) / (2.0 * dd * r2)).acos();
            let k = 0.5 * ((-dd + r1 + r2) * (dd + r1 - r2) * (dd - r1 + r2) * (dd + r1 + r2)).sqrt();
            a1 + a2 - k
        };
        let expect = std::f64::consts::PI.ln() - std::f64::consts::LN_2 - lens.ln();
        assert!((r.certificate.log_lower_bound - expect).abs() < 1e-10);
        assert!(r.certificate.log_lower_bound >= r.log_floor);
    }

    #[test]
    fn exact_dominates_floor() {
        let pc = critical_p(CriticalBase::LebesgueBall);
        for d in [2u64, 3, 7, 30, 150, 500] {
            for p in [1.0, 1.05, pc] {
                let r = lebesgue_ball_certificate(d, p).unwrap();
                assert!(r.certificate.log_lower_bound >= r.log_floor - 1e-9, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn matches_direct_lemma() {
        let d = 9;
        let r = lebesgue_ball_certificate(d, 1.05).unwrap();
        let dens = RadialDensity::restricted_lebesgue(d).unwrap();
        let denom = log_ball_offcenter(&dens, 1.0, 5f64.sqrt() / 2.0).unwrap().ln();
        let expect = -(d as f64) * inv_conjugate(1.05) * std::f64::consts::LN_2 + ball_volume_ln(d)
            - std::f64::consts::LN_2
            - denom;
        assert!((r.certificate.log_lower_bound - expect).abs() < 1e-10);
    }

    #[test]
    fn planar_optimum() {
        // brute force over the lens closed form, 1e-5 grid
        let dens = RadialDensity::restricted_lebesgue(2).unwrap();
        let opt = optimize_v(&dens, 1.05, 1.0).unwrap();
        assert!((opt.v_star - 0.24423).abs() < 2e-5);
        assert!((opt.certificate.log_lower_bound - 0.062_438_231_415_33).abs() < 1e-9);
    }

    #[test]
    fn proxy_at_critical_configuration() {
        let q0 = conjugate(critical_p(CriticalBase::LebesgueBall));
        assert!((q0 - 9.1474).abs() < 1e-4);
        assert!((proxy_g(0.5, q0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn proxy_below_one_for_small_q() {
        for i in 0..200 {
            let v = 0.995 * i as f64 / 199.0;
            for j in 0..200 {
                let q = 1.05 + (9.0 - 1.05) * j as f64 / 199.0;
                assert!(proxy_g(v, q) < 1.0, "v={v} q={q}");
            }
        }
    }

    #[test]
    fn optimizer_beats_fixed_choice() {
        let dens = RadialDensity::restricted_lebesgue(20).unwrap();
        let opt = optimize_v(&dens, 1.05, 1.0).unwrap();
        let fixed = lemma_certificate(&dens, 1.05, 0.5, 1.0).unwrap();
        assert!(opt.unimodal);
        assert!(opt.certificate.log_lower_bound >= fixed.log_lower_bound);
        // v* increases toward the maximizer of g(v, 21), √((40 - √1108)/82)
        assert!(opt.v_star > 0.25 && opt.v_star < 0.2862, "v* = {}", opt.v_star);
        assert!(opt.proxy_g.is_some());
        assert!(optimize_v(&dens, 1.0, 1.0).is_err());
    }
}
