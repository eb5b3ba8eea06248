//! Flat `key = value` run configuration.
//!
//! Values come from built-in defaults, then an optional config file, then
//! `--set key=value` overrides, in that order. Every key is re-validated
//! and unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rabi_kzm::analytics::critical_coupling;
use rabi_kzm::dynamics::default_dt;
use rabi_kzm::kzm::{log_spaced, LengthInstant};
use rabi_kzm::solver::Seed;
use rabi_kzm::{Grid, ModelParams};

use crate::{CliError, Command};

/// Every accepted key, in the order the resolved config is written.
pub const KEYS: &[&str] = &[
    "omega",
    "Omega",
    "lambda",
    "lambdas",
    "half_width",
    "n_points",
    "dt",
    "observer_stride",
    "eps_start",
    "eps_end",
    "n_fix",
    "stop_n_c",
    "tau_q",
    "length_instant",
    "ratios",
    "seed",
    "sweep_points",
    "ed_Omega",
    "gap_points",
    "inset_points",
    "snapshots",
    "out",
    "plots",
    "workers",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega: f64,
    pub big_omega: f64,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
    pub half_width: f64,
    pub n_points: usize,
    pub dt: f64,
    pub observer_stride: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    pub n_fix: f64,
    /// Scan runs stop shortly after n_c passes max(n_fix, stop_n_c).
    pub stop_n_c: f64,
    pub tau_q: Vec<f64>,
    pub length_instant: LengthInstant,
    /// g̃/g̃_c values for `ground`.
    pub ratios: Vec<f64>,
    pub seed: Seed,
    /// Couplings in the `ground` heatmap sweep (0 disables it).
    pub sweep_points: usize,
    /// Ω used for the ED comparison in `gap`.
    pub ed_big_omega: f64,
    pub gap_points: usize,
    pub inset_points: usize,
    /// Density snapshots per quench run.
    pub snapshots: usize,
    pub out: PathBuf,
    pub plots: bool,
    pub workers: Option<usize>,
}

fn defaults(command: Command) -> BTreeMap<String, String> {
    let tau_q = match command {
        Command::Kzscan => log_spaced(1.0, 2.5, 7),
        _ => log_spaced(1.0, 2.0, 3),
    };
    let list = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    let omega_big = 1000.0;
    // A full ramp to eps_end = 1 carries the packet past ±48; same dx, twice the extent.
    let (half_width, n_points) = match command {
        Command::Quench => (2.0 * Grid::DEFAULT_HALF_WIDTH, 2 * Grid::DEFAULT_POINTS),
        _ => (Grid::DEFAULT_HALF_WIDTH, Grid::DEFAULT_POINTS),
    };
    [
        ("omega", "1".to_string()),
        ("Omega", format!("{omega_big}")),
        ("lambda", "1".into()),
        ("lambdas", "-2,-1.5,-1,-0.5,0.5,1,1.5,2".into()),
        ("half_width", format!("{half_width}")),
        ("n_points", format!("{n_points}")),
        ("dt", "auto".into()),
        ("observer_stride", "50".into()),
        ("eps_start", "-1".into()),
        ("eps_end", "1".into()),
        ("n_fix", "5".into()),
        ("stop_n_c", "5".into()),
        ("tau_q", list(&tau_q)),
        ("length_instant", LengthInstant::default().as_str()),
        ("ratios", "0.5,1.02,1.5".into()),
        ("seed", "symmetric".into()),
        ("sweep_points", "21".into()),
        ("ed_Omega", "50".into()),
        ("gap_points", "41".into()),
        ("inset_points", "13".into()),
        ("snapshots", "200".into()),
        ("out", "rabi-kzm-out".into()),
        ("plots", "false".into()),
        ("workers", "auto".into()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn bad(key: &str, value: &str, why: &str) -> CliError {
    CliError::Config(format!("{key} = {value}: {why}"))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_text(text: &str, origin: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{origin}:{}: expected key = value", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_override(text: &str) -> Result<(String, String), CliError> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set {text}: expected key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn number(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.parse().map_err(|_| bad(key, v, "not a number"))?;
    if !x.is_finite() {
        return Err(bad(key, v, "must be finite"));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize, CliError> {
    v.parse()
        .map_err(|_| bad(key, v, "not a non-negative integer"))
}

fn numbers(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    v.split(',').map(|s| number(key, s.trim())).collect()
}

fn flag(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(bad(key, v, "expected true or false")),
    }
}

pub struct Resolved {
    pub config: RunConfig,
    pub values: BTreeMap<String, String>,
}

impl Resolved {
    /// The effective configuration as a config file.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.values[*key]);
        }
        s
    }
}

/// Layers defaults, file entries and overrides, then validates.
pub fn resolve(command: Command, entries: &[(String, String)]) -> Result<Resolved, CliError> {
    let mut values = defaults(command);
    for (k, v) in entries {
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Config(format!("unknown key '{k}'")));
        }
        values.insert(k.clone(), v.clone());
    }
    let get = |k: &str| values[k].as_str();

    let big_omega = number("Omega", get("Omega"))?;
    let dt = match get("dt") {
        "auto" => default_dt(big_omega),
        v => number("dt", v)?,
    };
    let workers = match get("workers") {
        "auto" => None,
        v => Some(count("workers", v)?),
    };
    let seed = match get("seed") {
        "symmetric" => Seed::Symmetric,
        "broken" => Seed::Broken,
        v => return Err(bad("seed", v, "expected symmetric or broken")),
    };
    let length_instant = LengthInstant::parse(get("length_instant")).ok_or_else(|| {
        bad(
            "length_instant",
            get("length_instant"),
            "expected critical, freeze or s=<value>",
        )
    })?;

    let config = RunConfig {
        omega: number("omega", get("omega"))?,
        big_omega,
        lambda: number("lambda", get("lambda"))?,
        lambdas: numbers("lambdas", get("lambdas"))?,
        half_width: number("half_width", get("half_width"))?,
        n_points: count("n_points", get("n_points"))?,
        dt,
        observer_stride: count("observer_stride", get("observer_stride"))?,
        eps_start: number("eps_start", get("eps_start"))?,
        eps_end: number("eps_end", get("eps_end"))?,
        n_fix: number("n_fix", get("n_fix"))?,
        stop_n_c: number("stop_n_c", get("stop_n_c"))?,
        tau_q: numbers("tau_q", get("tau_q"))?,
        length_instant,
        ratios: numbers("ratios", get("ratios"))?,
        seed,
        sweep_points: count("sweep_points", get("sweep_points"))?,
        ed_big_omega: number("ed_Omega", get("ed_Omega"))?,
        gap_points: count("gap_points", get("gap_points"))?,
        inset_points: count("inset_points", get("inset_points"))?,
        snapshots: count("snapshots", get("snapshots"))?,
        out: PathBuf::from(get("out")),
        plots: flag("plots", get("plots"))?,
        workers,
    };
    config.validate()?;
    Ok(Resolved { config, values })
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        let model = |lambda: f64| {
            if lambda == 0.0 {
                return Err(CliError::Config("lambda = 0 has no critical point".into()));
            }
            ModelParams::new(self.omega, self.big_omega, lambda, 0.0)
                .map_err(|e| CliError::Config(e.to_string()))
        };
        model(self.lambda)?;
        for &l in &self.lambdas {
            model(l)?;
        }
        ModelParams::new(self.omega, self.ed_big_omega, self.lambda, 0.0)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Grid::new(self.half_width, self.n_points).map_err(|e| CliError::Config(e.to_string()))?;
        if self.dt <= 0.0 {
            return Err(CliError::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.observer_stride == 0 {
            return Err(CliError::Config(
                "observer_stride must be at least 1".into(),
            ));
        }
        if !(self.eps_start >= -1.0 && self.eps_start < 0.0 && self.eps_end > 0.0) {
            return Err(CliError::Config(format!(
                "need -1 <= eps_start < 0 < eps_end, got {} and {}",
                self.eps_start, self.eps_end
            )));
        }
        if self.n_fix <= 0.0 {
            return Err(CliError::Config("n_fix must be positive".into()));
        }
        if self.tau_q.iter().any(|&t| t <= 0.0) {
            return Err(CliError::Config("tau_q values must be positive".into()));
        }
        if self.ratios.iter().any(|&r| r < 0.0) {
            return Err(CliError::Config("ratios must be non-negative".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.half_width, self.n_points).expect("validated grid")
    }

    pub fn params(&self, lambda: f64, big_omega: f64, ratio: f64) -> ModelParams {
        ModelParams::new(
            self.omega,
            big_omega,
            lambda,
            ratio * critical_coupling(lambda),
        )
        .expect("validated model")
    }
}

/// `base` entries sit between the defaults and the file; `overrides` win.
pub fn load(
    command: Command,
    file: Option<&Path>,
    base: &[String],
    overrides: &[String],
) -> Result<Resolved, CliError> {
    let mut entries = Vec::new();
    for b in base {
        entries.push(parse_override(b)?);
    }
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        entries.extend(parse_text(&text, &path.display().to_string())?);
    }
    for o in overrides {
        entries.push(parse_override(o)?);
    }
    resolve(command, &entries)
}
