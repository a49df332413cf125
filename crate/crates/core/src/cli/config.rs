//! Run configuration from flat `key=value` text and command-line flags.
//!
//! Keys are the long flag names without the leading dashes. Values from
//! flags override values from the file; anything not given keeps its
//! default.

use std::fmt;
use std::path::PathBuf;

use super::parse_number;
use crate::dynamics::{SystemParams, DEFAULT_DT};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Evolve,
    Steady,
    Sweep,
    Preset,
    Selftest,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Evolve => "evolve",
            CommandKind::Steady => "steady",
            CommandKind::Sweep => "sweep",
            CommandKind::Preset => "preset",
            CommandKind::Selftest => "selftest",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            CommandKind::Evolve,
            CommandKind::Steady,
            CommandKind::Sweep,
            CommandKind::Preset,
            CommandKind::Selftest,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Numerics {
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    /// Convergence tolerance of the relaxation solver.
    pub tolerance: f64,
    pub workers: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            dt: DEFAULT_DT,
            t_end: 50.0,
            stride: 100,
            tolerance: 1e-8,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Option<CommandKind>,
    pub params: SystemParams,
    pub numerics: Numerics,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub solver: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            params: SystemParams::default(),
            numerics: Numerics::default(),
            out: None,
            format: OutputFormat::Csv,
            solver: "liouvillian".to_string(),
        }
    }
}

/// Every accepted key, in provenance order.
pub const CONFIG_KEYS: [&str; 17] = [
    "command",
    "gamma21",
    "gamma31",
    "omega-r",
    "omega-l",
    "delta-r",
    "delta-l",
    "delta-small",
    "phi",
    "kc",
    "dt",
    "t-end",
    "stride",
    "tolerance",
    "workers",
    "format",
    "solver",
];

const OUT_KEY: &str = "out";

fn param_name(key: &str) -> Option<&'static str> {
    SystemParams::NAMES
        .iter()
        .copied()
        .find(|n| n.replace('_', "-") == key)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => f.write_str("flag"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}: cannot parse `{key}` value `{value}`: {reason}")]
    Parse {
        origin: Origin,
        key: String,
        value: String,
        reason: String,
    },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: Origin, key: String },
    #[error("{origin}: `{key}` must be finite, got `{value}`")]
    NonFiniteValue {
        origin: Origin,
        key: String,
        value: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Splits config text into entries. Blank lines and lines starting with `#`
/// are skipped; everything else must be `key=value` with a known key.
pub fn collect_entries(text: &str) -> Result<Vec<ConfigEntry>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let origin = Origin::Line(i + 1);
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                origin,
                key: line.to_string(),
                value: String::new(),
                reason: "expected key=value".into(),
            });
        };
        out.push(ConfigEntry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            origin,
        });
    }
    Ok(out)
}

fn apply(cfg: &mut RunConfig, e: &ConfigEntry) -> Result<(), ConfigError> {
    let parse_err = |reason: &str| ConfigError::Parse {
        origin: e.origin.clone(),
        key: e.key.clone(),
        value: e.value.clone(),
        reason: reason.to_string(),
    };
    let float = || -> Result<f64, ConfigError> {
        let x = parse_number(&e.value).ok_or_else(|| parse_err("not a number"))?;
        if !x.is_finite() {
            return Err(ConfigError::NonFiniteValue {
                origin: e.origin.clone(),
                key: e.key.clone(),
                value: e.value.clone(),
            });
        }
        Ok(x)
    };
    let count = || {
        e.value
            .parse::<usize>()
            .map_err(|_| parse_err("not a non-negative integer"))
    };

    if let Some(name) = param_name(&e.key) {
        cfg.params.set(name, float()?);
        return Ok(());
    }
    match e.key.as_str() {
        "command" => {
            cfg.command =
                Some(CommandKind::parse(&e.value).ok_or_else(|| parse_err("unknown command"))?)
        }
        "dt" => cfg.numerics.dt = float()?,
        "t-end" => cfg.numerics.t_end = float()?,
        "tolerance" => cfg.numerics.tolerance = float()?,
        "stride" => cfg.numerics.stride = count()?,
        "workers" => cfg.numerics.workers = count()?,
        "format" => match e.value.as_str() {
            "csv" => cfg.format = OutputFormat::Csv,
            _ => return Err(parse_err("only `csv` is supported")),
        },
        "solver" => cfg.solver = e.value.clone(),
        OUT_KEY => cfg.out = Some(PathBuf::from(&e.value)),
        _ => {
            return Err(ConfigError::UnknownKey {
                origin: e.origin.clone(),
                key: e.key.clone(),
            })
        }
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    cfg.params
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let n = &cfg.numerics;
    if !(n.dt > 0.0) || !(n.t_end > 0.0) || n.dt > n.t_end {
        return Err(ConfigError::Invalid(format!(
            "need 0 < dt <= t-end, got dt = {}, t-end = {}",
            n.dt, n.t_end
        )));
    }
    if n.stride == 0 || n.workers == 0 {
        return Err(ConfigError::Invalid(
            "stride and workers must be at least 1".into(),
        ));
    }
    if !(n.tolerance > 0.0) {
        return Err(ConfigError::Invalid("tolerance must be positive".into()));
    }
    Ok(())
}

/// Builds a configuration from optional file text and flag entries (flags
/// win). The result is validated.
pub fn parse_config(file: Option<&str>, flags: &[ConfigEntry]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(text) = file {
        for e in collect_entries(text)? {
            apply(&mut cfg, &e)?;
        }
    }
    for e in flags {
        apply(&mut cfg, e)?;
    }
    validate(&cfg)?;
    Ok(cfg)
}

impl RunConfig {
    /// `(key, value)` pairs that reproduce this configuration when parsed,
    /// except for the worker count.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for key in CONFIG_KEYS {
            let value = match key {
                "command" => match self.command {
                    Some(c) => c.name().to_string(),
                    None => continue,
                },
                "dt" => format!("{:.16e}", self.numerics.dt),
                "t-end" => format!("{:.16e}", self.numerics.t_end),
                "tolerance" => format!("{:.16e}", self.numerics.tolerance),
                "stride" => self.numerics.stride.to_string(),
                // output does not depend on the pool width
                "workers" => continue,
                "format" => "csv".to_string(),
                "solver" => self.solver.clone(),
                _ => {
                    let name = param_name(key).expect("parameter key");
                    format!("{:.16e}", self.params.get(name).expect("parameter"))
                }
            };
            out.push((key.to_string(), value));
        }
        if let Some(p) = &self.out {
            out.push((OUT_KEY.to_string(), p.display().to_string()));
        }
        out
    }
}

/// Reads the `# key=value` provenance block back from emitted CSV text.
pub fn parse_provenance(csv: &str) -> Result<RunConfig, ConfigError> {
    let block: String = csv
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| l.contains('='))
        .map(|l| format!("{l}\n"))
        .collect();
    parse_config(Some(&block), &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flag(key: &str, value: &str) -> ConfigEntry {
        ConfigEntry {
            key: key.into(),
            value: value.into(),
            origin: Origin::Flag,
        }
    }

    #[test]
    fn empty_input_gives_defaults() {
        let cfg = parse_config(None, &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.params.kc, 0.0);
        assert_eq!(cfg.params.phi, 0.0);
        assert_eq!(cfg.params.omega_r, 0.1);
        assert_eq!(cfg.params.omega_l, 0.1);
        assert_eq!(parse_config(Some(""), &[]).unwrap(), RunConfig::default());
    }

    #[test]
    fn flags_override_file() {
        let cfg = parse_config(Some("kc=0.3\nphi=pi/6\n"), &[flag("kc", "0.99")]).unwrap();
        assert_eq!(cfg.params.kc, 0.99);
        assert_eq!(cfg.params.phi, std::f64::consts::PI / 6.0);
    }

    #[test]
    fn out_of_range_interference() {
        let err = parse_config(None, &[flag("kc", "1.5")]).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)), "{err}");
    }

    #[test]
    fn errors_identify_their_origin() {
        let err = parse_config(Some("kc=0.1\nfoo=1\n"), &[]).unwrap_err();
        assert!(
            matches!(&err, ConfigError::UnknownKey { origin: Origin::Line(2), key } if key == "foo")
        );
        let err = parse_config(Some("\n\nphi=abc\n"), &[]).unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Parse {
                origin: Origin::Line(3),
                ..
            }
        ));
        assert!(err.to_string().starts_with("line 3"));
        let err = parse_config(None, &[flag("gamma21", "inf")]).unwrap_err();
        assert!(matches!(
            err,
            ConfigError::NonFiniteValue {
                origin: Origin::Flag,
                ..
            }
        ));
        let err = parse_config(Some("just text"), &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
    }

    #[test]
    fn provenance_round_trip() {
        let cfg = parse_config(
            Some("command=steady\nkc=0.7\nphi=4pi/3\ndelta-r=-2.5\nworkers=4\nout=/tmp/x.csv\n"),
            &[flag("omega-l", "0.123456789012345678")],
        )
        .unwrap();
        let text: String = cfg
            .provenance()
            .iter()
            .map(|(k, v)| format!("# {k}={v}\n"))
            .collect();
        let csv = format!("# vee-sgc v0 2026-01-01T00:00:00Z\n{text}#: note=1\nt_gamma\n# kc=0\n");
        let back = parse_provenance(&csv).unwrap();
        assert_eq!(back.numerics.workers, 1);
        assert_eq!(
            RunConfig {
                numerics: Numerics {
                    workers: 4,
                    ..back.numerics
                },
                ..back
            },
            cfg
        );
    }
}
