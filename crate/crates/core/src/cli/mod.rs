//! The `radmax` command-line front end.
//!
//! Settings come from three layers, later ones winning key by key: built-in
//! defaults, a `--config` file in the same `key = value` format the density
//! serializer writes, and command-line flags.
//!
//! Exit codes: 0 ok, 1 usage or domain error, 2 growth hypothesis violated
//! or inconclusive, 3 oracle soundness failure.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{
    parse_f64_list, parse_u64_list, CommandKind, Format, RunConfig, Settings, VChoice, OUTPUT_DIR_ENV,
};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "radmax",
    version,
    about = "Lower-bound certificates for weak-type constants of the centered maximal operator under radial measures"
)]
pub struct Cli {
    /// Plain-text `key = value` settings file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file (default: $RADMAX_OUTPUT_DIR/<command>.<ext>, else stdout).
    #[arg(long, short = 'o', global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Worker threads for scans (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one certificate.
    Certify(RunArgs),
    /// Sweep certificates over lists of d, p and t.
    Scan(RunArgs),
    /// Brute-force maximal function, level-set and dual-path checks (d <= 10).
    Oracle(RunArgs),
    /// Exact normalized cap areas against their two-sided bounds.
    Caps(CapsArgs),
    /// Closed-form critical exponents.
    CriticalP(CriticalArgs),
}

#[derive(Debug, Args, Default)]
struct DensityArgs {
    /// lebesgue, restricted-lebesgue, power, truncated-power, log-singularity, piecewise
    #[arg(long)]
    family: Option<String>,
    /// Power exponent t in (0,1); a list or start:end:step in scans.
    #[arg(long)]
    t: Option<String>,
    /// Level of the constant family.
    #[arg(long)]
    level: Option<String>,
    /// Piecewise segment `<end|inf> const <c>` or `<end> power <coef> <exp>`; repeatable.
    #[arg(long = "segment")]
    segments: Vec<String>,
}

#[derive(Debug, Args, Default)]
struct RunArgs {
    #[command(flatten)]
    density: DensityArgs,
    /// Dimension; scans accept `a,b,c` or `start:end:step`.
    #[arg(long)]
    d: Option<String>,
    /// Exponent p >= 1; scans accept lists and ranges.
    #[arg(long)]
    p: Option<String>,
    /// lemma, decp, decp-generalized, doubling, lebesgue-ball
    #[arg(long)]
    construction: Option<String>,
    /// Test-function radius ratio in (0,1], or `opt` to maximize.
    #[arg(long)]
    v: Option<String>,
    /// Level radius R.
    #[arg(long = "R", value_name = "R")]
    radius: Option<String>,
    /// Slack epsilon in (0,1) for the decp constructions.
    #[arg(long)]
    epsilon: Option<String>,
    /// Doubling construction: c in (1, 2^{1/p0}).
    #[arg(long)]
    c: Option<String>,
    /// Doubling construction: exponent budget p0 >= p.
    #[arg(long)]
    p0_budget: Option<String>,
    /// Generalized decp: inner exponent t0 in (0,1).
    #[arg(long)]
    t0: Option<String>,
    /// Generalized decp: outer exponent t1 in (0, ln(64/55)/ln(9/4)).
    #[arg(long)]
    t1: Option<String>,
    /// RNG seed for oracle sampling.
    #[arg(long)]
    seed: Option<String>,
    /// Oracle level-set samples.
    #[arg(long)]
    samples: Option<String>,
    /// Oracle radius grid size (>= 64).
    #[arg(long)]
    grid: Option<String>,
    /// Oracle dual-path tolerance (log space).
    #[arg(long)]
    tol: Option<String>,
}

#[derive(Debug, Args, Default)]
struct CapsArgs {
    /// Dimension(s), d >= 2.
    #[arg(long)]
    d: Option<String>,
    /// Cap height(s) s in [0,1).
    #[arg(long)]
    s: Option<String>,
    /// Grid `start:end:step` of cap heights.
    #[arg(long)]
    s_grid: Option<String>,
}

#[derive(Debug, Args, Default)]
struct CriticalArgs {
    /// decp or lebesgue-ball (default: both).
    #[arg(long)]
    base: Option<String>,
}

fn push(s: &mut Settings, key: &str, v: &Option<String>) {
    if let Some(v) = v {
        s.set(key, vec![v.clone()]);
    }
}

impl Cli {
    fn settings(&self) -> Result<(CommandKind, Settings)> {
        let mut s = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                Settings::from_text(&text)?
            }
            None => Settings::default(),
        };
        if let Some(f) = self.format {
            s.set("format", vec![format!("{f:?}").to_lowercase()]);
        }
        if let Some(o) = &self.output {
            s.set("output", vec![o.display().to_string()]);
        }
        if let Some(j) = self.jobs {
            s.set("jobs", vec![j.to_string()]);
        }
        let kind = match &self.command {
            Command::Certify(a) | Command::Scan(a) | Command::Oracle(a) => {
                push(&mut s, "family", &a.density.family);
                push(&mut s, "t", &a.density.t);
                push(&mut s, "level", &a.density.level);
                s.set("segment", a.density.segments.clone());
                for (k, v) in [
                    ("d", &a.d),
                    ("p", &a.p),
                    ("construction", &a.construction),
                    ("v", &a.v),
                    ("r", &a.radius),
                    ("epsilon", &a.epsilon),
                    ("c", &a.c),
                    ("p0_budget", &a.p0_budget),
                    ("t0", &a.t0),
                    ("t1", &a.t1),
                    ("seed", &a.seed),
                    ("samples", &a.samples),
                    ("grid", &a.grid),
                    ("tol", &a.tol),
                ] {
                    push(&mut s, k, v);
                }
                match self.command {
                    Command::Certify(_) => CommandKind::Certify,
                    Command::Scan(_) => CommandKind::Scan,
                    _ => CommandKind::Oracle,
                }
            }
            Command::Caps(a) => {
                push(&mut s, "d", &a.d);
                push(&mut s, "s", &a.s);
                push(&mut s, "s_grid", &a.s_grid);
                CommandKind::Caps
            }
            Command::CriticalP(a) => {
                push(&mut s, "base", &a.base);
                CommandKind::CriticalP
            }
        };
        Ok((kind, s))
    }
}

fn execute(cfg: &RunConfig, err: &mut (dyn Write + Send)) -> Result<i32> {
    let mut buf: Vec<u8> = Vec::new();
    let code = {
        let mut sink = commands::Sink {
            format: cfg.format,
            out: &mut buf,
        };
        match cfg.jobs {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Io(e.to_string()))?
                .install(|| commands::dispatch(cfg, &mut sink, err))?,
            None => commands::dispatch(cfg, &mut sink, err)?,
        }
    };
    match cfg.output_path() {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, &buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        }
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(code)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut err = std::io::stderr();
    let result = cli
        .settings()
        .and_then(|(kind, s)| RunConfig::resolve(kind, &s))
        .and_then(|cfg| execute(&cfg, &mut err));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
