use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{CommandKind, Format, RunConfig, VChoice};
use crate::certificate::{
    besicovitch_upper, critical_p, decp_certificate, decp_generalized_certificate, doubling_certificate,
    lebesgue_ball_certificate, lemma_certificate, optimize_v, Certificate, Construction, CriticalBase, ScanRow,
};
use crate::error::{Error, Result};
use crate::oracle::{halfspace_check, oracle_report, MAX_ORACLE_DIM, MAX_SAMPLING_DIM};
use crate::specfun::{cap_area_exact, cap_bound_logs, sine_from_cos, CapSpec, LogValue};

/// Exact route, optional floor, and construction-specific extras.
struct Outcome {
    exact: Certificate,
    log_floor: Option<f64>,
    details: Value,
    warnings: Vec<String>,
}

fn details_of<T: Serialize>(report: &T) -> Value {
    let mut v = serde_json::to_value(report).unwrap_or(Value::Null);
    if let Value::Object(map) = &mut v {
        map.remove("certificate");
    }
    v
}

fn require(name: &str, x: Option<f64>) -> Result<f64> {
    x.ok_or_else(|| Error::Domain(format!("construction needs --{name}")))
}

fn construct(cfg: &RunConfig, d: u64, p: f64, t: Option<f64>) -> Result<Outcome> {
    let plain = |exact: Certificate| Outcome {
        exact,
        log_floor: None,
        details: Value::Null,
        warnings: Vec::new(),
    };
    match cfg.construction {
        Construction::LemmaDirect => {
            let density = cfg.density(d, t)?;
            match cfg.v {
                VChoice::Fixed(v) => lemma_certificate(&density, p, v, cfg.radius).map(plain),
                VChoice::Optimize => {
                    let rep = optimize_v(&density, p, cfg.radius)?;
                    Ok(Outcome {
                        details: details_of(&rep),
                        ..plain(rep.certificate)
                    })
                }
            }
        }
        Construction::Decp => {
            let rep = decp_certificate(&cfg.density(d, t)?, p, cfg.epsilon)?;
            Ok(Outcome {
                exact: rep.certificate.clone(),
                log_floor: Some(rep.log_floor),
                details: details_of(&rep),
                warnings: rep.warnings,
            })
        }
        Construction::DecpGeneralized => {
            let density = cfg.density(d, t)?;
            let rep = decp_generalized_certificate(&density, p, require("t0", cfg.t0)?, require("t1", cfg.t1)?)?;
            Ok(Outcome {
                exact: rep.certificate.clone(),
                log_floor: Some(rep.log_floor),
                details: details_of(&rep),
                warnings: rep.warnings,
            })
        }
        Construction::Doubling => {
            if let Some(f) = cfg.family_name().filter(|f| f != "power") {
                return Err(Error::Domain(format!("doubling construction needs --family power, got {f}")));
            }
            let t = require("t", t)?;
            let rep = doubling_certificate(t, d, p, cfg.p0_budget.unwrap_or(p), require("c", cfg.c)?)?;
            let mut warnings = Vec::new();
            if !rep.inner_dominates {
                warnings.push("inner piece does not dominate the cap pieces; the floor is not proven here".into());
            }
            Ok(Outcome {
                exact: rep.certificate.clone(),
                log_floor: Some(rep.log_floor),
                details: details_of(&rep),
                warnings,
            })
        }
        Construction::LebesgueBall => {
            if let Some(f) = cfg.family_name().filter(|f| f != "restricted_lebesgue") {
                return Err(Error::Domain(format!(
                    "lebesgue-ball construction needs --family restricted-lebesgue, got {f}"
                )));
            }
            let rep = lebesgue_ball_certificate(d, p)?;
            Ok(Outcome {
                exact: rep.certificate.clone(),
                log_floor: Some(rep.log_floor),
                details: Value::Null,
                warnings: Vec::new(),
            })
        }
    }
}

/// Flat certificate line for CSV.
#[derive(Serialize)]
struct CertifyRow {
    d: u64,
    p: f64,
    q: f64,
    family: String,
    params: String,
    construction: &'static str,
    v: f64,
    #[serde(rename = "R")]
    radius: f64,
    #[serde(rename = "H")]
    h: f64,
    term_inner: f64,
    term_level: f64,
    term_denom: f64,
    log_lower: f64,
    rate_per_dim: f64,
    log_floor: Option<f64>,
    floor_rate_per_dim: Option<f64>,
    upper_log: f64,
    warnings: String,
}

fn certify_row(o: &Outcome) -> Result<CertifyRow> {
    let c = &o.exact;
    let d = c.dim();
    Ok(CertifyRow {
        d,
        p: c.p,
        q: c.q,
        family: c.density.family().name().into(),
        params: c.density.params_string(),
        construction: c.construction.name(),
        v: c.v,
        radius: c.radius,
        h: c.h,
        term_inner: c.term_inner.ln(),
        term_level: c.term_level.ln(),
        term_denom: c.term_denom.ln(),
        log_lower: c.log_lower_bound,
        rate_per_dim: c.rate_per_dim(),
        log_floor: o.log_floor,
        floor_rate_per_dim: o.log_floor.map(|f| f / d as f64),
        upper_log: besicovitch_upper(d, c.p)?,
        warnings: o.warnings.join("; "),
    })
}

fn certify_json(o: &Outcome) -> Result<Value> {
    let c = &o.exact;
    let d = c.dim() as f64;
    let mut exact = serde_json::to_value(c).map_err(|e| Error::Io(e.to_string()))?;
    if let Value::Object(m) = &mut exact {
        m.insert("provenance".into(), json!("exact"));
        m.insert("rate_per_dim".into(), json!(c.rate_per_dim()));
        m.insert("log_alpha".into(), json!(c.log_alpha()));
        m.insert("strong_type_log_lower".into(), json!(c.strong_type_lower_bound()));
    }
    let floor = o
        .log_floor
        .map(|f| json!({"provenance": "floor", "log_bound": f, "rate_per_dim": f / d}));
    Ok(json!({
        "exact": exact,
        "floor": floor,
        "upper_log": besicovitch_upper(c.dim(), c.p)?,
        "upper_provenance": "asymptotic (o(1) dropped)",
        "details": o.details,
        "warnings": o.warnings,
    }))
}

/// Writes CSV rows or JSON lines to `out`.
pub(crate) struct Sink<'a> {
    pub format: Format,
    pub out: &'a mut (dyn Write + Send),
}

impl Sink<'_> {
    fn csv<T: Serialize>(&mut self, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(&mut *self.out);
        for r in rows {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    fn json(&mut self, rows: &[Value]) -> Result<()> {
        for r in rows {
            serde_json::to_writer(&mut *self.out, r).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(self.out)?;
        }
        Ok(())
    }

    fn emit<T: Serialize>(&mut self, rows: &[T]) -> Result<()> {
        match self.format {
            Format::Csv => self.csv(rows),
            Format::Json => {
                let vals = rows
                    .iter()
                    .map(|r| serde_json::to_value(r).map_err(|e| Error::Io(e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                self.json(&vals)
            }
        }
    }
}

pub(crate) fn cmd_certify(cfg: &RunConfig, sink: &mut Sink, err: &mut (dyn Write + Send)) -> Result<i32> {
    let t = cfg.ts.first().copied();
    let o = construct(cfg, cfg.dims[0], cfg.ps[0], t)?;
    for w in &o.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    match sink.format {
        Format::Csv => sink.csv(&[certify_row(&o)?])?,
        Format::Json => sink.json(&[certify_json(&o)?])?,
    }
    Ok(0)
}

/// Scan line; `error` is set instead of the bounds when a row fails.
#[derive(Clone, Debug, Serialize)]
struct ScanLine {
    d: u64,
    p: f64,
    family: String,
    params: String,
    log_lower: Option<f64>,
    rate_per_dim: Option<f64>,
    upper_log: Option<f64>,
    construction: &'static str,
    log_floor: Option<f64>,
    error: Option<String>,
}

pub(crate) fn cmd_scan(cfg: &RunConfig, sink: &mut Sink, err: &mut (dyn Write + Send)) -> Result<i32> {
    let mut jobs = Vec::new();
    for t in cfg.t_values() {
        for &d in &cfg.dims {
            for &p in &cfg.ps {
                jobs.push((t, d, p));
            }
        }
    }
    let results: Vec<(ScanLine, Option<Error>)> = jobs
        .par_iter()
        .map(|&(t, d, p)| match construct(cfg, d, p, t).and_then(|o| {
            let row = ScanRow::from_certificate(&o.exact, o.log_floor)?;
            Ok((row, o.exact.construction))
        }) {
            Ok((r, c)) => (
                ScanLine {
                    d: r.d,
                    p: r.p,
                    family: r.family,
                    params: r.params,
                    log_lower: Some(r.log_lower),
                    rate_per_dim: Some(r.rate_per_dim),
                    upper_log: Some(r.upper_log),
                    construction: c.name(),
                    log_floor: r.log_floor,
                    error: None,
                },
                None,
            ),
            Err(e) => (
                ScanLine {
                    d,
                    p,
                    family: cfg
                        .density(d, t)
                        .map(|x| x.family().name().to_string())
                        .or_else(|_| cfg.family_name().ok_or(()))
                        .unwrap_or_default(),
                    params: t.map(|t| format!("t={t}")).unwrap_or_default(),
                    log_lower: None,
                    rate_per_dim: None,
                    upper_log: None,
                    construction: cfg.construction.name(),
                    log_floor: None,
                    error: Some(e.to_string()),
                },
                Some(e),
            ),
        })
        .collect();
    let mut results = results;
    results.sort_by(|a, b| {
        (&a.0.family, a.0.d)
            .cmp(&(&b.0.family, b.0.d))
            .then(a.0.p.total_cmp(&b.0.p))
            .then_with(|| a.0.params.cmp(&b.0.params))
    });
    let first_err = results.iter().find_map(|(_, e)| e.clone());
    let any_ok = results.iter().any(|(_, e)| e.is_none());
    let lines: Vec<ScanLine> = results.into_iter().map(|(l, _)| l).collect();
    sink.emit(&lines)?;
    match (any_ok, first_err) {
        (true, Some(_)) => {
            let _ = writeln!(err, "warning: some rows failed; see the error column");
            Ok(0)
        }
        (true, None) => Ok(0),
        (false, Some(e)) => {
            let _ = writeln!(err, "error: every row failed; first failure: {e}");
            Ok(e.exit_code())
        }
        (false, None) => Ok(0),
    }
}

#[derive(Serialize)]
struct OracleLine {
    d: u64,
    density: String,
    p: f64,
    v: f64,
    #[serde(rename = "R")]
    radius: f64,
    point_radius: f64,
    alpha: f64,
    max_value: f64,
    level_set_ok: bool,
    level_set_worst_margin: f64,
    certificate_log_bound: f64,
    empirical_weak_ratio: f64,
    dual_path_diff: f64,
    dual_path_ok: bool,
    halfspace_ok: Option<bool>,
    radius_grid_size: usize,
    samples: usize,
    rng_seed: u64,
    passed: bool,
}

pub(crate) fn cmd_oracle(cfg: &RunConfig, sink: &mut Sink, err: &mut (dyn Write + Send)) -> Result<i32> {
    let d = cfg.dims[0];
    if d > MAX_ORACLE_DIM {
        return Err(Error::Domain(format!(
            "oracle refuses d = {d}: every maximal-function value is a sup over a radius grid of off-center ball quadratures, \
             and the cost grows with d; limit is d <= {MAX_ORACLE_DIM} (level-set sampling d <= {MAX_SAMPLING_DIM})"
        )));
    }
    let v = match cfg.v {
        VChoice::Fixed(v) => v,
        VChoice::Optimize => return Err(Error::Domain("oracle needs a fixed --v".into())),
    };
    let p = cfg.ps[0];
    let density = cfg.density(d, cfg.ts.first().copied())?;
    let rep = oracle_report(&density, p, v, cfg.radius, cfg.samples, cfg.seed, cfg.grid)?;
    let h = cfg.radius * (1.0 + v * v).sqrt();
    let half = (d <= 4)
        .then(|| halfspace_check(&density, cfg.radius, h, 20_000, cfg.seed))
        .transpose()?;
    let diff = (rep.certificate_log_bound - rep.empirical_weak_ratio.ln()).abs();
    let dual_ok = rep.agrees(cfg.tol);
    let alpha_ok = rep.max_value >= LogValue::from_log(rep.alpha.ln() - 1e-9);
    let passed = rep.level_set_ok && dual_ok && alpha_ok && half.as_ref().is_none_or(|h| h.passed);
    let line = OracleLine {
        d,
        density: rep.density.clone(),
        p,
        v,
        radius: cfg.radius,
        point_radius: rep.point_radius,
        alpha: rep.alpha.ln(),
        max_value: rep.max_value.ln(),
        level_set_ok: rep.level_set_ok,
        level_set_worst_margin: rep.level_set_worst_margin,
        certificate_log_bound: rep.certificate_log_bound,
        empirical_weak_ratio: rep.empirical_weak_ratio.ln(),
        dual_path_diff: diff,
        dual_path_ok: dual_ok,
        halfspace_ok: half.as_ref().map(|h| h.passed),
        radius_grid_size: rep.radius_grid_size,
        samples: rep.samples,
        rng_seed: rep.rng_seed,
        passed,
    };
    match sink.format {
        Format::Csv => sink.csv(&[line])?,
        Format::Json => sink.json(&[json!({
            "report": rep,
            "halfspace": half,
            "dual_path_diff": diff,
            "dual_path_ok": dual_ok,
            "passed": passed,
        })])?,
    }
    if passed {
        Ok(0)
    } else {
        let _ = writeln!(err, "oracle soundness check failed");
        Ok(Error::Oracle(String::new()).exit_code())
    }
}

#[derive(Serialize)]
struct CapLine {
    d: u64,
    s: f64,
    t: f64,
    exact: f64,
    lower: f64,
    upper: f64,
    ln_exact: f64,
    ln_lower: f64,
    ln_upper: f64,
    sandwich_ok: bool,
}

pub(crate) fn cmd_caps(cfg: &RunConfig, sink: &mut Sink) -> Result<i32> {
    let mut lines = Vec::new();
    for &d in &cfg.dims {
        if d < 2 {
            return Err(Error::Domain(format!("caps needs d >= 2, got {d}")));
        }
        for &s in &cfg.s_values {
            let t = sine_from_cos(s);
            let exact = cap_area_exact(&CapSpec::new(d, s, t)?).ln();
            let (lo, up) = cap_bound_logs(d, s, t);
            let up = if s > 0.0 { up } else { f64::INFINITY };
            lines.push(CapLine {
                d,
                s,
                t,
                exact: exact.exp(),
                lower: lo.exp(),
                upper: up.exp(),
                ln_exact: exact,
                ln_lower: lo,
                ln_upper: up,
                sandwich_ok: lo - 1e-10 <= exact && exact <= up + 1e-10,
            });
        }
    }
    sink.emit(&lines)?;
    Ok(0)
}

#[derive(Serialize)]
struct CriticalLine {
    base: &'static str,
    p0: f64,
    q0: f64,
    ln_base_at_p0: f64,
}

pub(crate) fn cmd_critical(cfg: &RunConfig, sink: &mut Sink) -> Result<i32> {
    let lines: Vec<CriticalLine> = cfg
        .bases
        .iter()
        .map(|&b| {
            let p0 = critical_p(b);
            CriticalLine {
                base: match b {
                    CriticalBase::Decp => "decp",
                    CriticalBase::LebesgueBall => "lebesgue-ball",
                },
                p0,
                q0: p0 / (p0 - 1.0),
                ln_base_at_p0: b.ln_base(p0),
            }
        })
        .collect();
    sink.emit(&lines)?;
    Ok(0)
}

pub(crate) fn dispatch(cfg: &RunConfig, sink: &mut Sink, err: &mut (dyn Write + Send)) -> Result<i32> {
    match cfg.command {
        CommandKind::Certify => cmd_certify(cfg, sink, err),
        CommandKind::Scan => cmd_scan(cfg, sink, err),
        CommandKind::Oracle => cmd_oracle(cfg, sink, err),
        CommandKind::Caps => cmd_caps(cfg, sink),
        CommandKind::CriticalP => cmd_critical(cfg, sink),
    }
}
