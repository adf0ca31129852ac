//! Command-line front end: `pskit <command> [options]`.
//!
//! Options come from flags and, optionally, a `key=value` config file; flags
//! win. Outputs are plain-text files written into `--out` once the whole
//! computation has succeeded.

pub mod commands;
pub mod io;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;

use crate::error::Error;
use crate::packets::PhysConfig;
pub use io::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandName {
    Fig1,
    Fig2,
    Fig3,
    Compare,
    Reconstruct,
}

#[derive(Debug, Parser)]
#[command(name = "pskit", version, about = "Wigner and Fermi phase-space data for 1D wave packets")]
pub struct Args {
    #[arg(value_enum)]
    pub command: CommandName,
    /// Branch-curve file (reconstruct only).
    pub input: Option<PathBuf>,
    /// Phase row 1..4 (fig1).
    #[arg(long)]
    pub row: Option<String>,
    /// Amplitude modulation strength, 1 + a x̃² (fig2).
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// Snapshot times in periods, comma separated (fig3).
    #[arg(long)]
    pub times: Option<String>,
    /// NX,NP
    #[arg(long)]
    pub grid: Option<String>,
    /// XMIN,XMAX,PMIN,PMAX in scaled units.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Phase polynomial θ(x̃) coefficients, ascending (compare, reconstruct).
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<String>,
    /// Amplitude polynomial P(x̃) coefficients, ascending (compare, reconstruct).
    #[arg(long, allow_hyphen_values = true)]
    pub amp: Option<String>,
    /// Wigner contour level as a fraction of W_max (compare).
    #[arg(long)]
    pub level: Option<String>,
    /// Report fidelity against the packet described by the state options (reconstruct).
    #[arg(long)]
    pub reference: bool,
}

/// Failure split by exit code: 2 for usage, 1 for computation.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandName,
    pub row: Option<usize>,
    pub a: Option<f64>,
    pub times: Vec<f64>,
    pub grid: (usize, usize),
    /// Scaled window; `None` selects the per-command default.
    pub window: Option<[f64; 4]>,
    pub format: Format,
    pub out: PathBuf,
    pub phys: PhysConfig,
    pub x0: f64,
    pub p0: f64,
    pub delta: f64,
    pub amp: Vec<f64>,
    pub phase: Vec<f64>,
    /// Contour level as a fraction of `W_max`.
    pub level: f64,
    /// `ħλ / ω`.
    pub lambda_ratio: f64,
    /// Scaled phase-space center of the initial coherent state.
    pub center: (f64, f64),
    /// Position samples for the Fermi branch curve.
    pub samples: usize,
    /// Native wave-function grid size; `None` picks one from the state.
    pub psi_points: Option<usize>,
    pub input: Option<PathBuf>,
    pub reference: bool,
}

impl RunConfig {
    pub fn defaults(command: CommandName) -> Self {
        Self {
            command,
            row: None,
            a: None,
            times: vec![0.0, 0.4, 0.8, 1.2],
            grid: (256, 256),
            window: None,
            format: Format::Matrix,
            out: PathBuf::from("out"),
            phys: PhysConfig::default(),
            x0: 0.0,
            p0: 0.0,
            delta: 1.0,
            amp: Vec::new(),
            phase: Vec::new(),
            level: (-1.0f64).exp(),
            lambda_ratio: 0.01,
            center: (3.0, 0.0),
            samples: 1024,
            psi_points: None,
            input: None,
            reference: false,
        }
    }

    /// Coherent amplitude `α = (x̃ + i p̃) / √2`.
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.center.0, self.center.1) / 2f64.sqrt()
    }

    /// Resolves flags over an optional config file.
    pub fn from_args(args: &Args) -> Result<Self, CliError> {
        let mut map = match &args.config {
            Some(path) => parse_config_file(path)?,
            None => BTreeMap::new(),
        };
        let flags = [
            ("row", &args.row),
            ("a", &args.a),
            ("times", &args.times),
            ("grid", &args.grid),
            ("window", &args.window),
            ("format", &args.format),
            ("out", &args.out),
            ("phase", &args.phase),
            ("amp", &args.amp),
            ("level", &args.level),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        if args.reference {
            map.insert("reference".into(), "true".into());
        }
        if let Some(p) = &args.input {
            map.insert("input".into(), p.display().to_string());
        }
        Self::from_map(args.command, &map)
    }

    pub fn from_map(command: CommandName, map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut rc = Self::defaults(command);
        let (mut hbar, mut mass, mut omega) = (1.0, 1.0, 1.0);
        for (key, val) in map {
            let v = val.as_str();
            match key.as_str() {
                "row" => rc.row = Some(parse_num::<usize>(key, v)?),
                "a" => rc.a = Some(parse_num(key, v)?),
                "times" => rc.times = parse_list(key, v)?,
                "grid" => {
                    let g: Vec<usize> = parse_list(key, v)?;
                    if g.len() != 2 || g.iter().any(|&n| n < 2) {
                        return Err(usage("--grid expects NX,NP with both >= 2"));
                    }
                    rc.grid = (g[0], g[1]);
                }
                "window" => {
                    let w: Vec<f64> = parse_list(key, v)?;
                    if w.len() != 4 || w[1] <= w[0] || w[3] <= w[2] {
                        return Err(usage("--window expects XMIN,XMAX,PMIN,PMAX with XMIN<XMAX, PMIN<PMAX"));
                    }
                    rc.window = Some([w[0], w[1], w[2], w[3]]);
                }
                "format" => rc.format = v.parse().map_err(usage)?,
                "out" => rc.out = PathBuf::from(v),
                "hbar" => hbar = parse_num(key, v)?,
                "mass" => mass = parse_num(key, v)?,
                "omega" => omega = parse_num(key, v)?,
                "x0" => rc.x0 = parse_num(key, v)?,
                "p0" => rc.p0 = parse_num(key, v)?,
                "delta" => rc.delta = parse_num(key, v)?,
                "amp" => rc.amp = parse_list(key, v)?,
                "phase" => rc.phase = parse_list(key, v)?,
                "level" => rc.level = parse_num(key, v)?,
                "lambda" => rc.lambda_ratio = parse_num(key, v)?,
                "center" => {
                    let c: Vec<f64> = parse_list(key, v)?;
                    if c.len() != 2 {
                        return Err(usage("center expects X,P"));
                    }
                    rc.center = (c[0], c[1]);
                }
                "samples" => rc.samples = parse_num(key, v)?,
                "psi_points" => rc.psi_points = Some(parse_num(key, v)?),
                "input" => rc.input = Some(PathBuf::from(v)),
                "reference" => rc.reference = parse_num(key, v)?,
                other => return Err(usage(format!("unknown option '{other}'"))),
            }
        }
        rc.phys = PhysConfig::new(hbar, mass, omega).map_err(|e| usage(e.to_string()))?;
        rc.validate()?;
        Ok(rc)
    }

    fn validate(&self) -> Result<(), CliError> {
        match self.command {
            CommandName::Fig1 => match self.row {
                Some(1..=4) => {}
                Some(r) => return Err(usage(format!("--row must be in 1..=4, got {r}"))),
                None => return Err(usage("fig1 needs --row N")),
            },
            CommandName::Fig2 => match self.a {
                Some(a) if a > 0.0 && a.is_finite() => {}
                Some(a) => return Err(usage(format!("--a must be positive so that R > 0, got {a}"))),
                None => return Err(usage("fig2 needs --a X")),
            },
            CommandName::Fig3 => {
                if self.times.is_empty() || self.times.iter().any(|t| !t.is_finite()) {
                    return Err(usage("--times needs at least one finite value"));
                }
                if !(self.lambda_ratio >= 0.0 && self.lambda_ratio.is_finite()) {
                    return Err(usage("lambda must be >= 0"));
                }
            }
            CommandName::Compare => {
                if !(self.level > 0.0 && self.level < 1.0) {
                    return Err(usage(format!("--level is a fraction of W_max in (0, 1), got {}", self.level)));
                }
            }
            CommandName::Reconstruct => {
                if self.input.is_none() {
                    return Err(usage("reconstruct needs a branch-curve file argument"));
                }
            }
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(usage(format!("delta must be positive, got {}", self.delta)));
        }
        if self.samples < 3 {
            return Err(usage("samples must be >= 3"));
        }
        if matches!(self.psi_points, Some(n) if n < 2) {
            return Err(usage("psi_points must be >= 2"));
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| usage(format!("cannot parse {key} = '{v}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|t| parse_num(key, t)).collect()
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", n + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Makes sure `dir` exists and accepts new files.
fn ensure_writable(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let probe = dir.join(".pskit-write-probe");
    std::fs::write(&probe, b"")?;
    std::fs::remove_file(&probe)?;
    Ok(())
}

/// Runs one command end to end and returns the written file paths.
pub fn run(rc: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    ensure_writable(&rc.out)?;
    let output = commands::execute(rc)?;
    let mut written = Vec::with_capacity(output.files.len());
    for (name, contents) in &output.files {
        let path = rc.out.join(name);
        std::fs::write(&path, contents).map_err(Error::from)?;
        written.push(path);
    }
    Ok(written)
}
