//! Lower-bound certificates for the best weak-type `(p,p)` constant
//! `c_{p,d,μ}`, the universal covering upper bound, and the closed-form
//! critical exponents.
//!
//! Every construction funnels through [`lemma_certificate`]: with the test
//! function `χ_{B(0,vR)}` and the witness ball `B(Re1, H)`, `H = R√(1+v²)`,
//!
//! `c_{p,d,μ} >= μ(B(0,vR))^{1/q} μ(B(0,R))^{1/p} / (2 μ(B(Re1, H)))`.
//!
//! Constructions that also carry a closed-form estimate report it as an
//! analytic floor next to the exact value; the floor is obtained from the
//! exact route by inequalities only, so `exact >= floor` is checkable.

mod decp;
mod doubling;
mod lebesgue;
mod scan;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::radial::{log_ball_at_origin, log_ball_offcenter, RadialDensity};
use crate::specfun::LogValue;

pub use decp::{
    check_growth_hypothesis, decp_certificate, decp_generalized_certificate, generalized_rate,
    DecpReport, GeneralizedRate, GeneralizedReport, HypothesisReport, DECP_U, DEFAULT_EPSILON,
};
pub use doubling::{doubling_certificate, doubling_d0, DoublingReport};
pub use lebesgue::{
    lebesgue_ball_certificate, lebesgue_ball_floor, optimize_v, proxy_g, LebesgueBallReport,
    OptimizeReport,
};
pub use scan::ScanRow;

/// The universal covering constant in `c_{1,d,μ} <= (2.641 + o(1))^d`.
pub const BESICOVITCH_BASE: f64 = 2.641;

/// Which construction produced a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    LemmaDirect,
    Decp,
    DecpGeneralized,
    Doubling,
    LebesgueBall,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::LemmaDirect => "lemma_direct",
            Construction::Decp => "decp",
            Construction::DecpGeneralized => "decp_generalized",
            Construction::Doubling => "doubling",
            Construction::LebesgueBall => "lebesgue_ball",
        }
    }
}

impl std::str::FromStr for Construction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "lemma" | "lemma_direct" => Ok(Construction::LemmaDirect),
            "decp" => Ok(Construction::Decp),
            "decp_generalized" | "generalized" => Ok(Construction::DecpGeneralized),
            "doubling" => Ok(Construction::Doubling),
            "lebesgue_ball" => Ok(Construction::LebesgueBall),
            other => Err(Error::Parse(format!(
                "unknown construction `{other}`; expected lemma, decp, decp-generalized, doubling or lebesgue-ball"
            ))),
        }
    }
}

/// `1/q = 1 - 1/p`.
pub fn inv_conjugate(p: f64) -> f64 {
    1.0 - 1.0 / p
}

/// `q = p/(p-1)`, infinite at `p = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => s.parse::<f64>().map_err(serde::de::Error::custom),
        }
    }
}

/// A numerically evaluated instance of the lower-bound lemma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub density: RadialDensity,
    pub p: f64,
    #[serde(with = "ext_f64")]
    pub q: f64,
    pub v: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "H")]
    pub h: f64,
    /// `ln μ(B(0, vR))`
    pub term_inner: LogValue,
    /// `ln μ(B(0, R))`
    pub term_level: LogValue,
    /// `ln μ(B(R e1, H))`
    pub term_denom: LogValue,
    pub log_lower_bound: f64,
    pub construction: Construction,
}

impl Certificate {
    pub fn dim(&self) -> u64 {
        self.density.dim()
    }

    /// `ln α = ln μ(B(0,vR)) - ln 2 - ln μ(B(Re1,H))`, the level the maximal
    /// function provably exceeds on `B(0,R)`.
    pub fn log_alpha(&self) -> f64 {
        self.term_inner.ln() - std::f64::consts::LN_2 - self.term_denom.ln()
    }

    /// Recomputes the bound from the stored terms.
    pub fn recompute(&self) -> f64 {
        combine(self.p, self.term_inner, self.term_level, self.term_denom)
    }

    pub fn rate_per_dim(&self) -> f64 {
        self.log_lower_bound / self.dim() as f64
    }

    /// Weak-type lower bounds transfer to the strong-type constant
    /// (`c_{p,d,μ} <= C_{p,d,μ}`); never the reverse.
    pub fn strong_type_lower_bound(&self) -> f64 {
        self.log_lower_bound
    }
}

fn combine(p: f64, inner: LogValue, level: LogValue, denom: LogValue) -> f64 {
    let iq = inv_conjugate(p);
    let mut num = level.ln() / p;
    if iq > 0.0 {
        num += iq * inner.ln();
    }
    num - std::f64::consts::LN_2 - denom.ln()
}

/// The lower-bound lemma at `(v, R)`.
pub fn lemma_certificate(density: &RadialDensity, p: f64, v: f64, radius: f64) -> Result<Certificate> {
    lemma_with_tag(density, p, v, radius, Construction::LemmaDirect)
}

pub(crate) fn lemma_with_tag(
    density: &RadialDensity,
    p: f64,
    v: f64,
    radius: f64,
    construction: Construction,
) -> Result<Certificate> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("p must be a finite real >= 1, got {p}"));
    }
    if !(v > 0.0 && v <= 1.0) {
        return domain(format!("v must lie in (0, 1], got {v}"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return domain(format!("R must be positive, got {radius}"));
    }
    let term_inner = log_ball_at_origin(density, v * radius)?;
    if term_inner.is_zero() {
        return Err(Error::EmptyTestFunction);
    }
    let term_level = log_ball_at_origin(density, radius)?;
    let h = radius * (1.0 + v * v).sqrt();
    let term_denom = log_ball_offcenter(density, radius, h)?;
    Ok(Certificate {
        density: density.clone(),
        p,
        q: conjugate(p),
        v,
        radius,
        h,
        term_inner,
        term_level,
        term_denom,
        log_lower_bound: combine(p, term_inner, term_level, term_denom),
        construction,
    })
}

/// `ln` of the covering upper bound `(2.641)^{d/p}`; the `o(1)` correction
/// is dropped, so this is an asymptotic value.
pub fn besicovitch_upper(d: u64, p: f64) -> Result<f64> {
    if d == 0 || !(p >= 1.0) {
        return domain(format!("besicovitch_upper needs d >= 1 and p >= 1, got d={d}, p={p}"));
    }
    Ok(d as f64 / p * BESICOVITCH_BASE.ln())
}

/// Exponential bases whose unit crossing defines a critical exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalBase {
    /// `2^{1/p} 55^{-1/6}`
    Decp,
    /// `2^{2+1/p} / √55`
    LebesgueBall,
}

impl CriticalBase {
    /// `ln base(p)`
    pub fn ln_base(self, p: f64) -> f64 {
        let ln2 = std::f64::consts::LN_2;
        let ln55 = 55f64.ln();
        match self {
            CriticalBase::Decp => ln2 / p - ln55 / 6.0,
            CriticalBase::LebesgueBall => (2.0 + 1.0 / p) * ln2 - 0.5 * ln55,
        }
    }
}

impl std::str::FromStr for CriticalBase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "decp" => Ok(CriticalBase::Decp),
            "lebesgue_ball" => Ok(CriticalBase::LebesgueBall),
            other => Err(Error::Parse(format!("unknown base `{other}`; expected decp or lebesgue-ball"))),
        }
    }
}

/// Closed-form root of `base(p) = 1`.
pub fn critical_p(base: CriticalBase) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let ln55 = 55f64.ln();
    match base {
        CriticalBase::Decp => 6.0 * ln2 / ln55,
        CriticalBase::LebesgueBall => 1.0 / (ln55 / (2.0 * ln2) - 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_intervals() {
        let leb = RadialDensity::lebesgue(1).unwrap();
        let c = lemma_certificate(&leb, 1.0, 1.0, 1.0).unwrap();
        assert!((c.term_level.value() - 2.0).abs() < 1e-14);
        assert!((c.term_denom.value() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let expect = (1.0 / (2.0 * 2f64.sqrt())).ln();
        assert!((c.log_lower_bound - expect).abs() < 1e-12);
        assert!(c.q.is_infinite());
    }

    #[test]
    fn stored_terms_recompute() {
        let dens = RadialDensity::truncated_power(6, 0.3).unwrap();
        for p in [1.0, 1.2, 3.0] {
            let c = lemma_certificate(&dens, p, 0.4, 0.8).unwrap();
            assert_eq!(c.recompute(), c.log_lower_bound);
            assert!((c.h * c.h - c.radius * c.radius * (1.0 + c.v * c.v)).abs() < 1e-12);
            assert!(c.term_inner <= c.term_level);
            let alpha = c.log_alpha();
            let via_alpha = alpha + (c.term_level.ln() - c.term_inner.ln()) / p;
            assert!((via_alpha - c.log_lower_bound).abs() < 1e-12);
        }
    }

    #[test]
    fn small_v_limit_at_p1() {
        let dens = RadialDensity::restricted_lebesgue(4).unwrap();
        let c = lemma_certificate(&dens, 1.0, 1e-6, 1.0).unwrap();
        let limit = c.term_level.ln() - std::f64::consts::LN_2 - log_ball_offcenter(&dens, 1.0, 1.0).unwrap().ln();
        assert!((c.log_lower_bound - limit).abs() < 1e-6);
    }

    #[test]
    fn domain_errors() {
        let leb = RadialDensity::lebesgue(3).unwrap();
        assert!(lemma_certificate(&leb, 0.9, 0.5, 1.0).is_err());
        assert!(lemma_certificate(&leb, 1.0, 1.5, 1.0).is_err());
        assert!(lemma_certificate(&leb, 1.0, 0.0, 1.0).is_err());
        assert!(lemma_certificate(&leb, 1.0, 0.5, -1.0).is_err());
    }

    #[test]
    fn besicovitch() {
        assert!((besicovitch_upper(1, 1.0).unwrap() - 2.641f64.ln()).abs() < 1e-15);
        assert!(besicovitch_upper(100, 1e12).unwrap() < 1e-9);
        assert!(besicovitch_upper(0, 1.0).is_err());
    }

    #[test]
    fn critical_exponents() {
        let p = critical_p(CriticalBase::Decp);
        assert!((p - 1.03782).abs() < 5e-6);
        assert!(CriticalBase::Decp.ln_base(p).abs() < 1e-12);
        let p = critical_p(CriticalBase::LebesgueBall);
        assert!((p - 1.1227).abs() < 5e-5);
        assert!(CriticalBase::LebesgueBall.ln_base(p).abs() < 1e-12);
    }
}
