//! Run configuration: flag/file merging, defaults, sequence-spec grammar.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use simplexgeo::{Normalization, SequenceKind, SequenceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Flow,
    Geodesic,
    Lp,
    Isometry,
    Bracket,
    Integrability,
    CheckAll,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Flow => "flow",
            Self::Geodesic => "geodesic",
            Self::Lp => "lp",
            Self::Isometry => "isometry",
            Self::Bracket => "bracket",
            Self::Integrability => "integrability",
            Self::CheckAll => "check-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Closed,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse sequence spec {input:?} at position {position}: {message}")]
    Parse { input: String, position: usize, message: String },
    #[error("geometric ratio {0} outside (0, 1)")]
    RatioOutOfRange(f64),
    #[error("{command} requires {field}")]
    Missing { command: &'static str, field: &'static str },
    #[error("no command given (pass a subcommand or set \"command\" in the config file)")]
    NoCommand,
    #[error("invalid value for {field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config file {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// Every setting of a run. Flags and the `--config` file share these field
/// names; flags win over the file, and unset fields take their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0_spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0_spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_timestamp: Option<bool>,
}

pub const DEFAULT_T_MAX: f64 = 10.0;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_TRIALS: usize = 10;

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Json { path: path.into(), source })
    }

    /// Fields set in `self` win; the rest come from `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(base.command),
            dim: self.dim.or(base.dim),
            c_spec: self.c_spec.or(base.c_spec),
            p0_spec: self.p0_spec.or(base.p0_spec),
            v0_spec: self.v0_spec.or(base.v0_spec),
            q: self.q.or(base.q),
            t_max: self.t_max.or(base.t_max),
            dt: self.dt.or(base.dt),
            tol: self.tol.or(base.tol),
            method: self.method.or(base.method),
            seed: self.seed.or(base.seed),
            trials: self.trials.or(base.trials),
            out_path: self.out_path.or(base.out_path),
            format: self.format.or(base.format),
            no_timestamp: self.no_timestamp.or(base.no_timestamp),
        }
    }

    pub fn command(&self) -> Result<CommandKind, ConfigError> {
        self.command.ok_or(ConfigError::NoCommand)
    }

    pub fn require_dim(&self) -> Result<usize, ConfigError> {
        let command = self.command()?.name();
        let dim = self.dim.ok_or(ConfigError::Missing { command, field: "--dim" })?;
        let min = if self.command == Some(CommandKind::Bracket) || self.command == Some(CommandKind::Integrability) {
            1
        } else {
            2
        };
        if dim < min {
            return Err(ConfigError::Invalid { field: "dim", message: format!("{dim} is below {min}") });
        }
        Ok(dim)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn q(&self) -> Result<f64, ConfigError> {
        positive_above("q", self.q.unwrap_or(2.0), 1.0)
    }

    pub fn t_max(&self) -> Result<f64, ConfigError> {
        let t = self.t_max.unwrap_or(DEFAULT_T_MAX);
        if t.is_finite() && t >= 0.0 {
            Ok(t)
        } else {
            Err(ConfigError::Invalid { field: "t_max", message: format!("{t} must be finite and >= 0") })
        }
    }

    pub fn dt(&self) -> Result<f64, ConfigError> {
        positive_above("dt", self.dt.unwrap_or(DEFAULT_DT), 0.0)
    }

    pub fn tol(&self) -> Result<f64, ConfigError> {
        positive_above("tol", self.tol.unwrap_or(DEFAULT_TOL), 0.0)
    }

    pub fn trials(&self) -> Result<usize, ConfigError> {
        match self.trials.unwrap_or(DEFAULT_TRIALS) {
            0 => Err(ConfigError::Invalid { field: "trials", message: "must be at least 1".into() }),
            n => Ok(n),
        }
    }

    /// Explicit `--format`, else `.json` outputs are JSON, else CSV.
    pub fn format(&self) -> Format {
        self.format.unwrap_or_else(|| match &self.out_path {
            Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) => Format::Json,
            _ => Format::Csv,
        })
    }

    pub fn timestamp(&self) -> bool {
        !self.no_timestamp.unwrap_or(false)
    }

    /// Objective coefficients: `geometric:r` is `c_n = r^n`, never normalized.
    pub fn objective(&self, dim: usize) -> Result<Option<Vec<f64>>, ConfigError> {
        self.c_spec.as_deref().map(|s| spec_values(s, SpecRole::Objective, dim, "c")).transpose()
    }

    /// Initial distribution, normalized to the simplex (default uniform).
    pub fn initial(&self, dim: usize) -> Result<SequenceSpec, ConfigError> {
        let text = self.p0_spec.as_deref().unwrap_or("uniform");
        let spec = parse_sequence_spec(text, SpecRole::Distribution)?;
        resolve_dim(spec, dim, "p0")
    }

    /// Raw initial velocity (projected onto the tangent space by the caller).
    pub fn velocity(&self, dim: usize) -> Result<Option<Vec<f64>>, ConfigError> {
        self.v0_spec.as_deref().map(|s| spec_values(s, SpecRole::Velocity, dim, "v0")).transpose()
    }
}

fn positive_above(field: &'static str, x: f64, floor: f64) -> Result<f64, ConfigError> {
    if x.is_finite() && x > floor {
        Ok(x)
    } else {
        Err(ConfigError::Invalid { field, message: format!("{x} must be finite and > {floor}") })
    }
}

/// Which flag consumes a spec; decides the normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecRole {
    Objective,
    Distribution,
    Velocity,
}

impl SpecRole {
    fn normalization(self) -> Normalization {
        match self {
            Self::Distribution => Normalization::Simplex,
            Self::Objective | Self::Velocity => Normalization::None,
        }
    }
}

fn parse_error(input: &str, position: usize, message: impl fmt::Display) -> ConfigError {
    ConfigError::Parse { input: input.into(), position, message: message.to_string() }
}

/// Parses `uniform | geometric:<ratio> | explicit:<v1,v2,...> | file:<path>`.
///
/// The returned spec has `dim = 0` unless the values are listed explicitly;
/// callers fix the dimension afterwards.
pub fn parse_sequence_spec(text: &str, role: SpecRole) -> Result<SequenceSpec, ConfigError> {
    let normalize = role.normalization();
    let (head, rest) = match text.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (text, None),
    };
    let body_at = head.len() + 1;
    match (head, rest) {
        ("uniform", None) => Ok(SequenceSpec::new(SequenceKind::Uniform, 0, normalize)),
        ("geometric", Some(r)) => {
            let ratio: f64 = r.trim().parse().map_err(|e| parse_error(text, body_at, e))?;
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(ConfigError::RatioOutOfRange(ratio));
            }
            Ok(SequenceSpec::geometric(ratio, 0, normalize))
        }
        ("explicit", Some(list)) => Ok(SequenceSpec::explicit(parse_list(text, list, body_at, ',')?, normalize)),
        ("file", Some(path)) => {
            let contents = std::fs::read_to_string(path)
                .map_err(|source| ConfigError::Io { path: PathBuf::from(path), source })?;
            let values = contents
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|e| parse_error(path, 0, format!("{s:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if values.is_empty() {
                return Err(parse_error(text, body_at, "file contains no values"));
            }
            Ok(SequenceSpec::explicit(values, normalize))
        }
        ("uniform", Some(_)) => Err(parse_error(text, head.len(), "uniform takes no argument")),
        ("geometric" | "explicit" | "file", None) => Err(parse_error(text, text.len(), "expected ':' and a value")),
        _ => Err(parse_error(text, 0, "expected one of uniform, geometric:<r>, explicit:<v,...>, file:<path>")),
    }
}

fn parse_list(input: &str, list: &str, offset: usize, sep: char) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    let mut pos = offset;
    for item in list.split(sep) {
        let trimmed = item.trim();
        let v = trimmed.parse::<f64>().map_err(|e| parse_error(input, pos, format!("{trimmed:?}: {e}")))?;
        if !v.is_finite() {
            return Err(parse_error(input, pos, "value is not finite"));
        }
        out.push(v);
        pos += item.len() + 1;
    }
    Ok(out)
}

fn resolve_dim(spec: SequenceSpec, dim: usize, field: &'static str) -> Result<SequenceSpec, ConfigError> {
    if let SequenceKind::Explicit { coords } = &spec.kind {
        if coords.len() != dim {
            return Err(ConfigError::Invalid {
                field,
                message: format!("{} values given but --dim is {dim}", coords.len()),
            });
        }
        return Ok(spec);
    }
    Ok(spec.with_dim(dim))
}

fn spec_values(text: &str, role: SpecRole, dim: usize, field: &'static str) -> Result<Vec<f64>, ConfigError> {
    let spec = resolve_dim(parse_sequence_spec(text, role)?, dim, field)?;
    spec.raw_values().map_err(|e| ConfigError::Invalid { field, message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let s = parse_sequence_spec("uniform", SpecRole::Distribution).unwrap().with_dim(4);
        assert_eq!(s.kind, SequenceKind::Uniform);
        assert_eq!(s.normalize, Normalization::Simplex);
        assert_eq!(s.dim, 4);

        let s = parse_sequence_spec("geometric:0.5", SpecRole::Objective).unwrap();
        assert_eq!(s.kind, SequenceKind::Geometric { ratio: 0.5 });
        assert_eq!(s.normalize, Normalization::None);

        let s = parse_sequence_spec("explicit:1, 2,3", SpecRole::Objective).unwrap();
        assert_eq!(s.kind, SequenceKind::Explicit { coords: vec![1.0, 2.0, 3.0] });
        assert_eq!(s.dim, 3);
    }

    #[test]
    fn grammar_errors() {
        assert!(matches!(
            parse_sequence_spec("geometric:1.5", SpecRole::Objective),
            Err(ConfigError::RatioOutOfRange(r)) if r == 1.5
        ));
        match parse_sequence_spec("explicit:1,x,3", SpecRole::Objective) {
            Err(ConfigError::Parse { position, .. }) => assert_eq!(position, 11),
            other => panic!("{other:?}"),
        }
        match parse_sequence_spec("geometric:abc", SpecRole::Objective) {
            Err(ConfigError::Parse { position, .. }) => assert_eq!(position, 10),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_sequence_spec("zipf", SpecRole::Objective),
            Err(ConfigError::Parse { position: 0, .. })
        ));
        assert!(matches!(parse_sequence_spec("geometric", SpecRole::Objective), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn objective_values_are_powers() {
        let cfg = RunConfig { c_spec: Some("geometric:0.5".into()), ..Default::default() };
        assert_eq!(cfg.objective(3).unwrap().unwrap(), vec![1.0, 0.5, 0.25]);
    }

    #[test]
    fn explicit_length_must_match_dim() {
        let cfg = RunConfig { p0_spec: Some("explicit:0.5,0.5".into()), ..Default::default() };
        assert!(cfg.initial(2).is_ok());
        assert!(matches!(cfg.initial(3), Err(ConfigError::Invalid { field: "p0", .. })));
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig { dim: Some(4), seed: Some(3), ..Default::default() };
        let flags = RunConfig { seed: Some(9), ..Default::default() };
        let merged = flags.over(file);
        assert_eq!((merged.dim, merged.seed), (Some(4), Some(9)));
    }

    #[test]
    fn config_file_round_trip() {
        let json =
            r#"{"command": "check-all", "dim": 8, "c_spec": "geometric:0.5", "method": "rk4", "format": "json"}"#;
        let cfg: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.command, Some(CommandKind::CheckAll));
        assert_eq!(cfg.method, Some(Method::Rk4));
        assert!(serde_json::from_str::<RunConfig>(r#"{"dimension": 3}"#).is_err());
    }
}
