//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored; list values are
//! comma-separated. Every key may appear at most once.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use orlicz_gamma::energy::default_s_list;
use orlicz_gamma::peridynamic::default_delta_list;
use orlicz_gamma::{Dim, TestFunction, YoungFunction};
use serde::Serialize;
use thiserror::Error;

pub const KEYS: [&str; 9] = ["experiment", "young", "test_function", "dim", "s_list", "delta_list", "tol", "out_dir", "seed"];

#[derive(Clone, Debug, Error, PartialEq)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: &str, message: impl Into<String>) -> Self {
        ConfigError { key: key.to_string(), message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    YoungDiagnostics,
    Energy,
    A0,
    SSweep,
    Liminf,
    Gamma,
    PeridynSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::YoungDiagnostics,
        Experiment::Energy,
        Experiment::A0,
        Experiment::SSweep,
        Experiment::Liminf,
        Experiment::Gamma,
        Experiment::PeridynSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::YoungDiagnostics => "young-diagnostics",
            Experiment::Energy => "energy",
            Experiment::A0 => "a0",
            Experiment::SSweep => "s-sweep",
            Experiment::Liminf => "liminf",
            Experiment::Gamma => "gamma",
            Experiment::PeridynSweep => "peridyn-sweep",
        }
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::new("experiment", format!("unknown experiment `{s}`")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub young: String,
    pub test_function: String,
    pub dim: usize,
    pub s_list: Vec<f64>,
    pub delta_list: Vec<f64>,
    pub tol: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults for every key except `experiment`.
    pub fn with_experiment(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            young: "power:2.0".into(),
            test_function: "bump:1.0".into(),
            dim: 1,
            s_list: default_s_list(),
            delta_list: default_delta_list(),
            tol: 1e-8,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(line, format!("line {} is not of the form key = value", i + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::new(key, "unknown key"));
            }
            if pairs.iter().any(|(k, _)| k == key) {
                return Err(ConfigError::new(key, "duplicate key"));
            }
            pairs.push((key.to_string(), value.trim().to_string()));
        }
        let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let experiment: Experiment = get("experiment")
            .ok_or_else(|| ConfigError::new("experiment", "missing required key"))?
            .parse()?;
        let mut cfg = ExperimentConfig::with_experiment(experiment);
        if let Some(v) = get("young") {
            cfg.young = v.to_string();
        }
        if let Some(v) = get("test_function") {
            cfg.test_function = v.to_string();
        }
        if let Some(v) = get("dim") {
            cfg.dim = v.parse().map_err(|_| ConfigError::new("dim", format!("`{v}` is not an integer")))?;
        }
        if let Some(v) = get("s_list") {
            cfg.s_list = parse_list("s_list", v)?;
        }
        if let Some(v) = get("delta_list") {
            cfg.delta_list = parse_list("delta_list", v)?;
        }
        if let Some(v) = get("tol") {
            cfg.tol = v.parse().map_err(|_| ConfigError::new("tol", format!("`{v}` is not a number")))?;
        }
        if let Some(v) = get("out_dir") {
            cfg.out_dir = PathBuf::from(v);
        }
        if let Some(v) = get("seed") {
            cfg.seed = v.parse().map_err(|_| ConfigError::new("seed", format!("`{v}` is not a nonnegative integer")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks ranges, list monotonicity and that both labels resolve.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let dim = Dim::from_usize(self.dim).ok_or_else(|| ConfigError::new("dim", "must be 1 or 2"))?;
        YoungFunction::<f64>::parse(&self.young).map_err(|e| ConfigError::new("young", e.to_string()))?;
        TestFunction::<f64>::parse(&self.test_function, dim)
            .map_err(|e| ConfigError::new("test_function", e.to_string()))?;
        check_list("s_list", &self.s_list, |s| s > 0.0 && s < 1.0, "entries must lie in (0, 1)")?;
        if self.s_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::new("s_list", "must be strictly increasing"));
        }
        check_list("delta_list", &self.delta_list, |d| d > 0.0 && d.is_finite(), "entries must be positive")?;
        if self.delta_list.windows(2).any(|w| w[0] <= w[1]) {
            return Err(ConfigError::new("delta_list", "must be strictly decreasing"));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(ConfigError::new("tol", "must lie in (0, 1)"));
        }
        if self.out_dir.as_os_str().is_empty() {
            return Err(ConfigError::new("out_dir", "must not be empty"));
        }
        Ok(())
    }

    /// Canonical text form; [`ExperimentConfig::parse`] inverts it exactly.
    pub fn to_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        format!(
            "experiment = {}\nyoung = {}\ntest_function = {}\ndim = {}\ns_list = {}\ndelta_list = {}\ntol = {:?}\nout_dir = {}\nseed = {}\n",
            self.experiment,
            self.young,
            self.test_function,
            self.dim,
            list(&self.s_list),
            list(&self.delta_list),
            self.tol,
            self.out_dir.display(),
            self.seed
        )
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    if value.trim().is_empty() {
        return Err(ConfigError::new(key, "list must not be empty"));
    }
    value
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<f64>().map_err(|_| ConfigError::new(key, format!("`{item}` is not a number")))
        })
        .collect()
}

fn check_list(key: &str, list: &[f64], ok: impl Fn(f64) -> bool, message: &str) -> Result<(), ConfigError> {
    if list.is_empty() {
        return Err(ConfigError::new(key, "list must not be empty"));
    }
    if !list.iter().all(|&x| ok(x)) {
        return Err(ConfigError::new(key, message));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = ExperimentConfig::parse("# comment\nexperiment = s-sweep\n\ns_list = 0.5, 0.9\nseed=7\n").unwrap();
        assert_eq!(cfg.experiment, Experiment::SSweep);
        assert_eq!(cfg.s_list, vec![0.5, 0.9]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.young, "power:2.0");
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("experiment = energy\ncolour = red\n", "colour"),
            ("experiment = energy\ns_list =\n", "s_list"),
            ("experiment = energy\ns_list = 0.9, 0.5\n", "s_list"),
            ("experiment = energy\ndelta_list = 1e-3, 1e-2\n", "delta_list"),
            ("experiment = energy\nyoung = cubic\n", "young"),
            ("experiment = energy\ntest_function = bump:-1\n", "test_function"),
            ("experiment = energy\ndim = 3\n", "dim"),
            ("experiment = energy\ntol = 0\n", "tol"),
            ("experiment = nope\n", "experiment"),
            ("young = llogl\n", "experiment"),
            ("experiment = energy\nseed = 1\nseed = 2\n", "seed"),
        ];
        for (text, key) in cases {
            let err = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(err.key, key, "{text}");
            assert!(err.to_string().contains(key));
        }
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::with_experiment(Experiment::PeridynSweep);
        cfg.s_list = vec![0.1 + 0.2, 0.7];
        cfg.tol = 3e-9;
        cfg.young = "flatzero".into();
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
