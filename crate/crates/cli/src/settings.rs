//! Flag and config-file resolution.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use qs_cvqkd::optimize::{linear_range, Protocol};
use qs_cvqkd::Error;

pub const CONFIG_KEYS: [&str; 11] = [
    "length-km",
    "eps-tm",
    "beta",
    "gain",
    "alpha",
    "alpha-cap",
    "protocol",
    "output",
    "format",
    "grid-nodes",
    "fock-cutoff",
];

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Fiber length in km: a value, a comma list, or start:stop:step
    #[arg(long, allow_hyphen_values = true)]
    pub length_km: Option<String>,
    /// Excess noise referred to the transmitter: a value, list, or range
    #[arg(long, allow_hyphen_values = true)]
    pub eps_tm: Option<String>,
    /// Reconciliation efficiency [default: 1.0]
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Scissor gain g >= 1
    #[arg(long, allow_hyphen_values = true)]
    pub gain: Option<String>,
    /// QPSK amplitude
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Upper limit on the optimized amplitude
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_cap: Option<String>,
    /// qs-dm, noqs-dm, gg02, plob or correlations [default: qs-dm]
    #[arg(long)]
    pub protocol: Option<String>,
    /// key=value file with the flag names as keys; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write results here instead of stdout
    #[arg(long)]
    pub output: Option<String>,
    /// csv or json [default: csv]
    #[arg(long)]
    pub format: Option<String>,
    /// Simpson nodes for the entropy integrals [default: 4001]
    #[arg(long)]
    pub grid_nodes: Option<String>,
    /// Fock cutoff of the oracle simulation [default: 30]
    #[arg(long)]
    pub fock_cutoff: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub lengths_km: Option<Vec<f64>>,
    pub eps_tm: Vec<f64>,
    pub beta: f64,
    pub gain: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_cap: Option<f64>,
    pub protocol: Protocol,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub grid_nodes: usize,
    pub fock_cutoff: usize,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| config_err(format!("config line {}: expected key=value", i + 1)))?;
        let key = key.trim();
        if key == "config" {
            return Err(config_err(format!("config line {}: nested config files are not supported", i + 1)));
        }
        if !CONFIG_KEYS.contains(&key) {
            return Err(config_err(format!("config line {}: unknown key '{key}'", i + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(config_err(format!("config line {}: duplicate key '{key}'", i + 1)));
        }
    }
    Ok(map)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn number(key: &str, s: &str) -> Result<f64, Error> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| config_err(format!("--{key}: '{s}' is not a finite number")))
}

fn count(key: &str, s: &str) -> Result<usize, Error> {
    s.trim().parse().map_err(|_| config_err(format!("--{key}: '{s}' is not a non-negative integer")))
}

/// A single value, a comma-separated list, or `start:stop:step`.
pub fn number_list(key: &str, s: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => linear_range(number(key, start)?, number(key, stop)?, number(key, step)?)
            .map_err(|e| config_err(format!("--{key}: {e}"))),
        [_] => s.split(',').filter(|p| !p.trim().is_empty()).map(|p| number(key, p)).collect(),
        _ => Err(config_err(format!("--{key}: expected a value, a list or start:stop:step, got '{s}'"))),
    }
}

impl Settings {
    pub fn resolve(flags: &Flags) -> Result<Self, Error> {
        let file = match &flags.config {
            Some(p) => read_config(p)?,
            None => BTreeMap::new(),
        };
        let pick = |key: &str, flag: &Option<String>| -> Option<String> {
            flag.clone().or_else(|| file.get(key).cloned())
        };

        let lengths_km = pick("length-km", &flags.length_km).map(|s| number_list("length-km", &s)).transpose()?;
        let eps_tm = match pick("eps-tm", &flags.eps_tm) {
            Some(s) => number_list("eps-tm", &s)?,
            None => vec![0.0],
        };
        let beta = pick("beta", &flags.beta).map(|s| number("beta", &s)).transpose()?.unwrap_or(1.0);
        let gain = pick("gain", &flags.gain).map(|s| number("gain", &s)).transpose()?;
        let alpha = pick("alpha", &flags.alpha).map(|s| number("alpha", &s)).transpose()?;
        let alpha_cap = pick("alpha-cap", &flags.alpha_cap).map(|s| number("alpha-cap", &s)).transpose()?;
        let protocol = match pick("protocol", &flags.protocol) {
            Some(s) => s.parse::<Protocol>()?,
            None => Protocol::QsDm,
        };
        let output = pick("output", &flags.output).map(PathBuf::from);
        let format = match pick("format", &flags.format).as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(config_err(format!("--format: expected csv or json, got '{other}'"))),
        };
        let grid_nodes =
            pick("grid-nodes", &flags.grid_nodes).map(|s| count("grid-nodes", &s)).transpose()?.unwrap_or(4001);
        let fock_cutoff =
            pick("fock-cutoff", &flags.fock_cutoff).map(|s| count("fock-cutoff", &s)).transpose()?.unwrap_or(30);

        if !(0.0..=1.0).contains(&beta) {
            return Err(config_err(format!("--beta must lie in [0, 1], got {beta}")));
        }
        if let Some(l) = &lengths_km {
            if l.iter().any(|&x| x < 0.0) {
                return Err(config_err("--length-km values must be >= 0"));
            }
        }
        if eps_tm.iter().any(|&e| e < 0.0) {
            return Err(config_err("--eps-tm values must be >= 0"));
        }
        if fock_cutoff < 4 {
            return Err(config_err(format!("--fock-cutoff must be at least 4, got {fock_cutoff}")));
        }

        Ok(Self { lengths_km, eps_tm, beta, gain, alpha, alpha_cap, protocol, output, format, grid_nodes, fock_cutoff })
    }

    pub fn single_length(&self) -> Result<f64, Error> {
        match self.lengths_km.as_deref() {
            Some([l]) => Ok(*l),
            Some(_) => Err(config_err("this command takes a single --length-km value")),
            None => Err(config_err("--length-km is required")),
        }
    }

    pub fn single_eps(&self) -> Result<f64, Error> {
        match self.eps_tm.as_slice() {
            [e] => Ok(*e),
            _ => Err(config_err("this command takes a single --eps-tm value")),
        }
    }
}
