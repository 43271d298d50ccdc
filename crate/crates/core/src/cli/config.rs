use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::certificate::{Construction, CriticalBase, DEFAULT_EPSILON};
use crate::error::{Error, Result};
use crate::oracle::DEFAULT_GRID;
use crate::radial::{parse_kv, RadialDensity};

/// Output encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "jsonl",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" | "jsonl" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format `{other}`; expected csv or json"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Certify,
    Scan,
    Oracle,
    Caps,
    CriticalP,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Certify => "certify",
            CommandKind::Scan => "scan",
            CommandKind::Oracle => "oracle",
            CommandKind::Caps => "caps",
            CommandKind::CriticalP => "critical-p",
        }
    }
}

/// Key/value settings; later layers replace earlier ones key by key.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    map: BTreeMap<String, Vec<String>>,
}

fn normalize_key(k: &str) -> String {
    let k = k.trim().to_ascii_lowercase().replace('-', "_");
    match k.as_str() {
        "dim" => "d".into(),
        "radius" => "r".into(),
        _ => k,
    }
}

impl Settings {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (k, v) in parse_kv(text)? {
            s.map.entry(normalize_key(&k)).or_default().push(v);
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, values: Vec<String>) {
        if !values.is_empty() {
            self.map.insert(normalize_key(key), values);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    fn all(&self, key: &str) -> &[String] {
        self.map.get(key).map_or(&[], Vec::as_slice)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }
}

/// `a:b:step` (inclusive) or a comma list.
pub fn parse_f64_list(key: &str, text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("`{key}`: expected `a,b,...` or `start:end:step`, got `{text}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, step] = parts.as_slice() else { return Err(bad()) };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) || b < a {
            return Err(bad());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|i| a + step * i as f64).collect())
    } else {
        text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
    }
}

pub fn parse_u64_list(key: &str, text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Parse(format!("`{key}`: expected `a,b,...` or `start:end:step` of integers, got `{text}`"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, step] = parts.as_slice() else { return Err(bad()) };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if step == 0 || b < a {
            return Err(bad());
        }
        Ok((a..=b).step_by(step as usize).collect())
    } else {
        text.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
    }
}

/// How `v` is chosen for direct lemma certificates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VChoice {
    Fixed(f64),
    Optimize,
}

/// Fully resolved settings for one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    density: Vec<(String, String)>,
    pub dims: Vec<u64>,
    pub ps: Vec<f64>,
    pub ts: Vec<f64>,
    pub construction: Construction,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub seed: u64,
    pub samples: usize,
    pub grid: usize,
    pub tol: f64,
    pub v: VChoice,
    pub radius: f64,
    pub epsilon: f64,
    pub c: Option<f64>,
    pub p0_budget: Option<f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub s_values: Vec<f64>,
    pub bases: Vec<CriticalBase>,
}

pub const OUTPUT_DIR_ENV: &str = "RADMAX_OUTPUT_DIR";

impl RunConfig {
    pub fn resolve(command: CommandKind, s: &Settings) -> Result<Self> {
        let dims = match s.get("d") {
            Some(text) => parse_u64_list("d", text)?,
            None => Vec::new(),
        };
        if dims.contains(&0) {
            return Err(Error::Domain("dimension d must be >= 1".into()));
        }
        let needs_d = !matches!(command, CommandKind::CriticalP);
        if needs_d && dims.is_empty() {
            return Err(Error::Domain("empty d-range: pass --d <d | list | start:end:step>".into()));
        }
        if matches!(command, CommandKind::Certify | CommandKind::Oracle) && dims.len() != 1 {
            return Err(Error::Domain(format!("{} takes a single --d", command.name())));
        }
        let ps = match s.get("p") {
            Some(text) => parse_f64_list("p", text)?,
            None => vec![1.0],
        };
        if ps.is_empty() || ps.iter().any(|&p| !(p >= 1.0) || !p.is_finite()) {
            return Err(Error::Domain(format!("p values must be finite and >= 1, got {ps:?}")));
        }
        if matches!(command, CommandKind::Certify | CommandKind::Oracle) && ps.len() != 1 {
            return Err(Error::Domain(format!("{} takes a single --p", command.name())));
        }
        let ts = match s.get("t") {
            Some(text) => parse_f64_list("t", text)?,
            None => Vec::new(),
        };
        let mut density: Vec<(String, String)> = Vec::new();
        for key in ["family", "level"] {
            if let Some(v) = s.get(key) {
                density.push((key.into(), v.into()));
            }
        }
        for seg in s.all("segment") {
            density.push(("segment".into(), seg.clone()));
        }
        let construction = match s.get("construction") {
            Some(c) => c.parse()?,
            None => Construction::LemmaDirect,
        };
        let v = match s.get("v") {
            Some(x) if x.trim().eq_ignore_ascii_case("opt") => VChoice::Optimize,
            Some(_) => VChoice::Fixed(s.parse("v")?.expect("present")),
            None => VChoice::Fixed(0.5),
        };
        let s_values = match (s.get("s_grid"), s.get("s")) {
            (Some(g), _) => parse_f64_list("s-grid", g)?,
            (None, Some(x)) => parse_f64_list("s", x)?,
            (None, None) if command == CommandKind::Caps => {
                return Err(Error::Domain("caps needs --s or --s-grid".into()))
            }
            _ => Vec::new(),
        };
        if let Some(bad) = s_values.iter().find(|&&x| !(0.0..1.0).contains(&x)) {
            return Err(Error::Domain(format!("cap height s must lie in [0, 1), got {bad}")));
        }
        let bases = match s.get("base") {
            Some(b) => vec![b.parse()?],
            None => vec![CriticalBase::Decp, CriticalBase::LebesgueBall],
        };
        Ok(RunConfig {
            command,
            density,
            dims,
            ps,
            ts,
            construction,
            format: s.parse("format")?.unwrap_or(Format::Csv),
            output: s.get("output").map(PathBuf::from),
            jobs: s.parse("jobs")?,
            seed: s.parse("seed")?.unwrap_or(42),
            samples: s.parse("samples")?.unwrap_or(200),
            grid: s.parse("grid")?.unwrap_or(DEFAULT_GRID),
            tol: s.parse("tol")?.unwrap_or(1e-6),
            v,
            radius: s.parse("r")?.unwrap_or(1.0),
            epsilon: s.parse("epsilon")?.unwrap_or(DEFAULT_EPSILON),
            c: s.parse("c")?,
            p0_budget: s.parse("p0_budget")?,
            t0: s.parse("t0")?,
            t1: s.parse("t1")?,
            s_values,
            bases,
        })
    }

    pub fn family_name(&self) -> Option<String> {
        self.density
            .iter()
            .rev()
            .find(|(k, _)| k == "family")
            .map(|(_, v)| v.trim().to_ascii_lowercase().replace('-', "_"))
    }

    /// Density for dimension `d` and power exponent `t` (if any).
    pub fn density(&self, d: u64, t: Option<f64>) -> Result<RadialDensity> {
        let mut pairs = self.density.clone();
        if pairs.iter().all(|(k, _)| k != "family") {
            let default = match self.construction {
                Construction::LebesgueBall | Construction::Decp | Construction::DecpGeneralized => {
                    "restricted_lebesgue"
                }
                Construction::Doubling => "power",
                Construction::LemmaDirect => {
                    return Err(Error::Parse("missing --family".into()));
                }
            };
            pairs.push(("family".into(), default.into()));
        }
        if let Some(t) = t {
            pairs.push(("t".into(), t.to_string()));
        }
        RadialDensity::from_kv(&pairs, Some(d))
    }

    /// Values of `t` to sweep: `[None]` when the family has no exponent.
    pub fn t_values(&self) -> Vec<Option<f64>> {
        if self.ts.is_empty() {
            vec![None]
        } else {
            self.ts.iter().copied().map(Some).collect()
        }
    }

    /// Where output goes: `--output`, else `$RADMAX_OUTPUT_DIR/<command>.<ext>`,
    /// else standard output.
    pub fn output_path(&self) -> Option<PathBuf> {
        self.output.clone().or_else(|| {
            std::env::var_os(OUTPUT_DIR_ENV)
                .filter(|d| !d.is_empty())
                .map(|d| PathBuf::from(d).join(format!("{}.{}", self.command.name(), self.format.extension())))
        })
    }
}
