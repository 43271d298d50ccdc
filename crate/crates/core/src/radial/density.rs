use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One piece of a user-defined density on `(previous end, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// `f(ρ) = value`
    Constant(f64),
    /// `f(ρ) = coef · ρ^{-exponent}`, `exponent >= 0`
    Power { coef: f64, exponent: f64 },
}

impl Profile {
    fn ln_at(&self, rho: f64) -> f64 {
        match *self {
            Profile::Constant(c) => c.ln(),
            Profile::Power { coef, exponent } => coef.ln() - exponent * rho.ln(),
        }
    }

    fn coef_exponent(&self) -> (f64, f64) {
        match *self {
            Profile::Constant(c) => (c, 0.0),
            Profile::Power { coef, exponent } => (coef, exponent),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Right end of the segment; `f64::INFINITY` for an unbounded tail.
    pub end: f64,
    pub profile: Profile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `f ≡ level` (Lebesgue measure when `level = 1`).
    Constant { level: f64 },
    /// `χ_{[0,1]}`
    RestrictedLebesgue,
    /// `r^{-td}`, `t ∈ (0,1)`
    Power { t: f64 },
    /// `r^{-td} χ_{(0,1]}`, `t ∈ (0,1)`
    TruncatedPower { t: f64 },
    /// `|ln r| χ_{(0,1]}`
    LogSingularity,
    /// Piecewise constant-or-power profile starting at 0; zero past the last end.
    Piecewise { segments: Vec<Segment> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Constant { .. } => "lebesgue",
            Family::RestrictedLebesgue => "restricted_lebesgue",
            Family::Power { .. } => "power",
            Family::TruncatedPower { .. } => "truncated_power",
            Family::LogSingularity => "log_singularity",
            Family::Piecewise { .. } => "piecewise",
        }
    }
}

pub const FAMILY_NAMES: [&str; 6] = [
    "lebesgue",
    "restricted_lebesgue",
    "power",
    "truncated_power",
    "log_singularity",
    "piecewise",
];

/// `f(ρ) = coef · ρ^{-exponent}` on `(start, end]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PowerPiece {
    pub start: f64,
    pub end: f64,
    pub coef: f64,
    pub exponent: f64,
}

/// A nonincreasing radial density `f` on `(0, ∞)` in dimension `dim`,
/// defining `dμ = f(|y|) dλ^d(y)`. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialDensity {
    #[serde(flatten)]
    family: Family,
    dim: u64,
}

impl RadialDensity {
    pub fn new(family: Family, dim: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        validate(&family, dim)?;
        Ok(RadialDensity { family, dim })
    }

    pub fn lebesgue(dim: u64) -> Result<Self> {
        Self::new(Family::Constant { level: 1.0 }, dim)
    }
    pub fn restricted_lebesgue(dim: u64) -> Result<Self> {
        Self::new(Family::RestrictedLebesgue, dim)
    }
    pub fn power(dim: u64, t: f64) -> Result<Self> {
        Self::new(Family::Power { t }, dim)
    }
    pub fn truncated_power(dim: u64, t: f64) -> Result<Self> {
        Self::new(Family::TruncatedPower { t }, dim)
    }
    pub fn log_singularity(dim: u64) -> Result<Self> {
        Self::new(Family::LogSingularity, dim)
    }
    pub fn piecewise(dim: u64, segments: Vec<Segment>) -> Result<Self> {
        Self::new(Family::Piecewise { segments }, dim)
    }

    /// Same family in another dimension (power exponents scale with `d`).
    pub fn with_dim(&self, dim: u64) -> Result<Self> {
        Self::new(self.family.clone(), dim)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }
    pub fn dim(&self) -> u64 {
        self.dim
    }

    /// `ln f(ρ)`, negative infinity where `f` vanishes.
    pub fn ln_density(&self, rho: f64) -> f64 {
        let d = self.dim as f64;
        match &self.family {
            Family::Constant { level } => level.ln(),
            Family::RestrictedLebesgue => {
                if rho <= 1.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::Power { t } => -t * d * rho.ln(),
            Family::TruncatedPower { t } => {
                if rho <= 1.0 {
                    -t * d * rho.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::LogSingularity => {
                if rho < 1.0 {
                    (-rho.ln()).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Family::Piecewise { segments } => segments
                .iter()
                .find(|s| rho <= s.end)
                .map_or(f64::NEG_INFINITY, |s| s.profile.ln_at(rho)),
        }
    }

    pub fn density(&self, rho: f64) -> f64 {
        self.ln_density(rho).exp()
    }

    /// Radii where `f` is discontinuous or changes formula.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::Constant { .. } | Family::Power { .. } => Vec::new(),
            Family::RestrictedLebesgue | Family::TruncatedPower { .. } | Family::LogSingularity => {
                vec![1.0]
            }
            Family::Piecewise { segments } => segments
                .iter()
                .map(|s| s.end)
                .filter(|e| e.is_finite())
                .collect(),
        }
    }

    /// Supremum of the support, `None` when unbounded.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.family {
            Family::Constant { .. } | Family::Power { .. } => None,
            Family::RestrictedLebesgue | Family::TruncatedPower { .. } | Family::LogSingularity => {
                Some(1.0)
            }
            Family::Piecewise { segments } => {
                let last = segments.last().expect("validated nonempty").end;
                last.is_finite().then_some(last)
            }
        }
    }

    /// Characteristic length used to anchor radius grids.
    pub fn scale(&self) -> f64 {
        self.support_radius()
            .or_else(|| self.breakpoints().last().copied())
            .unwrap_or(1.0)
    }

    /// Closed-form power pieces when every piece of `f` is `c ρ^{-e}`.
    pub(crate) fn power_pieces(&self) -> Option<Vec<PowerPiece>> {
        let d = self.dim as f64;
        let piece = |start, end, coef, exponent| PowerPiece {
            start,
            end,
            coef,
            exponent,
        };
        match &self.family {
            Family::Constant { level } => Some(vec![piece(0.0, f64::INFINITY, *level, 0.0)]),
            Family::RestrictedLebesgue => Some(vec![piece(0.0, 1.0, 1.0, 0.0)]),
            Family::Power { t } => Some(vec![piece(0.0, f64::INFINITY, 1.0, t * d)]),
            Family::TruncatedPower { t } => Some(vec![piece(0.0, 1.0, 1.0, t * d)]),
            Family::LogSingularity => None,
            Family::Piecewise { segments } => {
                let mut start = 0.0;
                let mut out = Vec::with_capacity(segments.len());
                for s in segments {
                    let (c, e) = s.profile.coef_exponent();
                    out.push(piece(start, s.end, c, e));
                    start = s.end;
                }
                Some(out)
            }
        }
    }

    /// Short identifier: family name plus parameters.
    pub fn id(&self) -> String {
        match &self.family {
            Family::Constant { level } if *level == 1.0 => "lebesgue".into(),
            Family::Constant { level } => format!("lebesgue(level={level})"),
            Family::Power { t } => format!("power(t={t})"),
            Family::TruncatedPower { t } => format!("truncated_power(t={t})"),
            Family::Piecewise { segments } => format!("piecewise({} segments)", segments.len()),
            other => other.name().into(),
        }
    }

    /// Family parameters as a compact `k=v;k=v` string for tables.
    pub fn params_string(&self) -> String {
        match &self.family {
            Family::Constant { level } => format!("level={level}"),
            Family::Power { t } | Family::TruncatedPower { t } => format!("t={t}"),
            Family::Piecewise { segments } => segments
                .iter()
                .map(segment_to_string)
                .collect::<Vec<_>>()
                .join(";"),
            _ => String::new(),
        }
    }

    /// Plain-text `key = value` form.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "family = {}", self.family.name());
        let _ = writeln!(out, "dim = {}", self.dim);
        match &self.family {
            Family::Constant { level } => {
                let _ = writeln!(out, "level = {level}");
            }
            Family::Power { t } | Family::TruncatedPower { t } => {
                let _ = writeln!(out, "t = {t}");
            }
            Family::Piecewise { segments } => {
                for s in segments {
                    let _ = writeln!(out, "segment = {}", segment_to_string(s));
                }
            }
            _ => {}
        }
        out
    }

    /// Parses a density from `key = value` pairs. `dim` may be supplied by
    /// the caller when the text does not carry one.
    pub fn from_kv(pairs: &[(String, String)], dim: Option<u64>) -> Result<Self> {
        let get = |k: &str| pairs.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let family = get("family").ok_or_else(|| Error::Parse("missing `family`".into()))?;
        let dim = match dim {
            Some(d) => d,
            None => parse_num::<u64>("dim", get("dim").ok_or_else(|| Error::Parse("missing `dim`".into()))?)?,
        };
        let t = || -> Result<f64> {
            parse_num("t", get("t").ok_or_else(|| Error::Parse(format!("family `{family}` needs `t`")))?)
        };
        let family = match normalize_family(family).as_str() {
            "lebesgue" | "constant" => Family::Constant {
                level: get("level").map(|v| parse_num("level", v)).transpose()?.unwrap_or(1.0),
            },
            "restricted_lebesgue" => Family::RestrictedLebesgue,
            "power" => Family::Power { t: t()? },
            "truncated_power" => Family::TruncatedPower { t: t()? },
            "log_singularity" => Family::LogSingularity,
            "piecewise" | "piecewise_user" => {
                let segments = pairs
                    .iter()
                    .filter(|(k, _)| k == "segment")
                    .map(|(_, v)| parse_segment(v))
                    .collect::<Result<Vec<_>>>()?;
                Family::Piecewise { segments }
            }
            other => {
                return Err(Error::Parse(format!(
                    "unknown family `{other}`; known families: {}",
                    FAMILY_NAMES.join(", ")
                )))
            }
        };
        RadialDensity::new(family, dim)
    }

    pub fn from_kv_str(text: &str, dim: Option<u64>) -> Result<Self> {
        Self::from_kv(&parse_kv(text)?, dim)
    }
}

pub(crate) fn normalize_family(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace('-', "_")
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{v}`")))
}

fn segment_to_string(s: &Segment) -> String {
    let end = if s.end.is_finite() { s.end.to_string() } else { "inf".into() };
    match s.profile {
        Profile::Constant(c) => format!("{end} const {c}"),
        Profile::Power { coef, exponent } => format!("{end} power {coef} {exponent}"),
    }
}

/// `<end> const <value>` or `<end> power <coef> <exponent>`.
fn parse_segment(v: &str) -> Result<Segment> {
    let parts: Vec<&str> = v.split_whitespace().collect();
    let bad = || Error::Parse(format!("bad segment `{v}`: expected `<end> const <c>` or `<end> power <coef> <exp>`"));
    let end = match parts.first() {
        Some(&"inf") => f64::INFINITY,
        Some(x) => parse_num("segment end", x)?,
        None => return Err(bad()),
    };
    let profile = match parts.as_slice() {
        [_, "const", c] => Profile::Constant(parse_num("segment value", c)?),
        [_, "power", c, e] => Profile::Power {
            coef: parse_num("segment coef", c)?,
            exponent: parse_num("segment exponent", e)?,
        },
        _ => return Err(bad()),
    };
    Ok(Segment { end, profile })
}

/// Splits `key = value` lines; `#` starts a comment.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn validate(family: &Family, dim: u64) -> Result<()> {
    let d = dim as f64;
    let invalid = |m: String| Err(Error::InvalidDensity(m));
    match family {
        Family::Constant { level } => {
            if !(*level > 0.0 && level.is_finite()) {
                return invalid(format!("constant level must be positive, got {level}"));
            }
        }
        Family::Power { t } | Family::TruncatedPower { t } => {
            if !(*t > 0.0 && *t < 1.0) {
                return invalid(format!("power exponent t must lie in (0,1), got {t}"));
            }
        }
        Family::RestrictedLebesgue | Family::LogSingularity => {}
        Family::Piecewise { segments } => {
            if segments.is_empty() {
                return invalid("piecewise density needs at least one segment".into());
            }
            let mut prev_end = 0.0;
            let mut prev_right: Option<f64> = None;
            let mut any_positive = false;
            for (i, s) in segments.iter().enumerate() {
                if !(s.end > prev_end) || s.end.is_nan() {
                    return invalid(format!("segment {i}: breakpoints must be strictly increasing"));
                }
                if s.end.is_infinite() && i + 1 != segments.len() {
                    return invalid(format!("segment {i}: only the last segment may be unbounded"));
                }
                let (coef, exponent) = s.profile.coef_exponent();
                if !(coef >= 0.0 && coef.is_finite()) {
                    return invalid(format!("segment {i}: value must be finite and >= 0"));
                }
                if !(exponent >= 0.0 && exponent.is_finite()) {
                    return invalid(format!("segment {i}: power exponent must be >= 0 (nonincreasing)"));
                }
                if i == 0 && coef > 0.0 && exponent >= d {
                    return invalid(format!(
                        "segment 0: f(r) r^(d-1) not locally integrable at 0 (exponent {exponent} >= d = {dim})"
                    ));
                }
                // value just right of the previous breakpoint
                let left = if i == 0 {
                    None
                } else {
                    Some(coef * prev_end.powf(-exponent))
                };
                if let (Some(l), Some(r)) = (left, prev_right) {
                    if l > r * (1.0 + 1e-12) {
                        return invalid(format!("segment {i}: density increases across breakpoint {prev_end}"));
                    }
                }
                any_positive |= coef > 0.0;
                prev_right = Some(if s.end.is_finite() { coef * s.end.powf(-exponent) } else { 0.0 });
                prev_end = s.end;
            }
            if !any_positive {
                return invalid("density is zero almost everywhere".into());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_integrability_and_range() {
        assert!(RadialDensity::power(3, 0.0).is_err());
        assert!(RadialDensity::power(3, 1.0).is_err());
        assert!(RadialDensity::truncated_power(3, 0.99).is_ok());
        assert!(RadialDensity::lebesgue(0).is_err());
    }

    #[test]
    fn piecewise_validation() {
        let seg = |end, p| Segment { end, profile: p };
        // increasing across a breakpoint
        let bad = vec![seg(1.0, Profile::Constant(1.0)), seg(2.0, Profile::Constant(2.0))];
        assert!(RadialDensity::piecewise(2, bad).is_err());
        // unordered
        let bad = vec![seg(2.0, Profile::Constant(2.0)), seg(1.0, Profile::Constant(1.0))];
        assert!(RadialDensity::piecewise(2, bad).is_err());
        // all zero
        assert!(RadialDensity::piecewise(2, vec![seg(1.0, Profile::Constant(0.0))]).is_err());
        // non-integrable singularity
        let bad = vec![seg(1.0, Profile::Power { coef: 1.0, exponent: 2.0 })];
        assert!(RadialDensity::piecewise(2, bad).is_err());
        // increasing power
        let bad = vec![seg(1.0, Profile::Power { coef: 1.0, exponent: -1.0 })];
        assert!(RadialDensity::piecewise(2, bad).is_err());
        let ok = vec![
            seg(0.5, Profile::Power { coef: 1.0, exponent: 1.0 }),
            seg(1.0, Profile::Constant(2.0)),
            seg(f64::INFINITY, Profile::Power { coef: 0.5, exponent: 3.0 }),
        ];
        let dens = RadialDensity::piecewise(2, ok).unwrap();
        assert_eq!(dens.breakpoints(), vec![0.5, 1.0]);
        assert_eq!(dens.support_radius(), None);
        assert!((dens.density(0.25) - 4.0).abs() < 1e-15);
        assert!((dens.density(0.75) - 2.0).abs() < 1e-15);
        assert!((dens.density(2.0) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn kv_roundtrip_all_families() {
        let seg = |end, p| Segment { end, profile: p };
        let all = vec![
            RadialDensity::lebesgue(4).unwrap(),
            RadialDensity::restricted_lebesgue(4).unwrap(),
            RadialDensity::power(4, 0.3).unwrap(),
            RadialDensity::truncated_power(4, 0.125).unwrap(),
            RadialDensity::log_singularity(4).unwrap(),
            RadialDensity::piecewise(
                4,
                vec![
                    seg(0.5, Profile::Constant(3.0)),
                    seg(f64::INFINITY, Profile::Power { coef: 0.25, exponent: 2.5 }),
                ],
            )
            .unwrap(),
        ];
        for dens in all {
            let text = dens.to_kv();
            let back = RadialDensity::from_kv_str(&text, None).unwrap();
            assert_eq!(back, dens, "{text}");
        }
    }

    #[test]
    fn kv_errors() {
        let e = RadialDensity::from_kv_str("family = banana\ndim = 3", None).unwrap_err();
        assert!(e.to_string().contains("restricted_lebesgue"));
        assert!(RadialDensity::from_kv_str("family = power\ndim = 3", None).is_err());
        assert!(RadialDensity::from_kv_str("dim = 3", None).is_err());
        assert!(parse_kv("nonsense").is_err());
        let d = RadialDensity::from_kv_str("# comment\nfamily = restricted-lebesgue\n", Some(7)).unwrap();
        assert_eq!(d.dim(), 7);
    }
}
