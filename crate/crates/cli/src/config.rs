//! Run configuration: defaults, then a `key = value` file, then flags.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use ctxmeasure_core::metastudy::CandidateMode;
use ctxmeasure_core::{Metric, MetricSuite};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Config(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub metrics: Vec<Metric>,
    pub suite: MetricSuite,
    pub seed: Option<u64>,
    pub format: Format,
    /// Worker threads; `None` lets the pool pick.
    pub threads: Option<usize>,
    pub candidates: CandidateMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.to_vec(),
            suite: MetricSuite::default(),
            seed: None,
            format: Format::Csv,
            threads: None,
            candidates: CandidateMode::Background,
        }
    }
}

/// Keys accepted by [`RunConfig::set`].
pub const KEYS: &[&str] = &[
    "metrics",
    "alpha",
    "beta",
    "beta_camo",
    "band_width",
    "patch_size",
    "overlap",
    "lambda",
    "gamma",
    "eps",
    "dense",
    "beta_sq_f",
    "beta_w",
    "alpha_s",
    "lambda_obj",
    "dep_sigma",
    "seed",
    "format",
    "threads",
    "candidates",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| CliError::Config(format!("bad value {value:?} for {key}")))
}

fn parse_metrics(value: &str) -> Result<Vec<Metric>> {
    if value.trim().eq_ignore_ascii_case("all") {
        return Ok(Metric::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m: Metric = name.parse().map_err(|_| CliError::Config(format!("unknown metric {name:?}")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("metric list is empty".into()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let s = &mut self.suite;
        match key.trim() {
            "metrics" => self.metrics = parse_metrics(value)?,
            "alpha" => {
                let a = parse(key, value)?;
                s.cm.alpha = a;
                s.cm_camo.alpha = a;
            }
            "beta" => s.cm.beta = parse(key, value)?,
            "beta_camo" => s.cm_camo.beta = parse(key, value)?,
            "band_width" => s.camo.band_width = parse(key, value)?,
            "patch_size" => s.camo.patch_size = parse(key, value)?,
            "overlap" => s.camo.overlap = parse(key, value)?,
            "lambda" => s.camo.lambda = parse(key, value)?,
            "gamma" => s.camo.gamma = parse(key, value)?,
            "eps" => s.camo.eps = parse(key, value)?,
            "dense" => s.camo.dense = parse(key, value)?,
            "beta_sq_f" => s.baseline.beta_sq_f = parse(key, value)?,
            "beta_w" => s.baseline.beta_w = parse(key, value)?,
            "alpha_s" => s.baseline.alpha_s = parse(key, value)?,
            "lambda_obj" => s.baseline.lambda_obj = parse(key, value)?,
            "dep_sigma" => s.baseline.dep_sigma = parse(key, value)?,
            "seed" => self.seed = Some(parse(key, value)?),
            "format" => self.format = value.parse()?,
            "threads" => {
                let n: usize = parse(key, value)?;
                self.threads = (n > 0).then_some(n);
            }
            "candidates" => {
                self.candidates = value.parse().map_err(|_| CliError::Config(format!("unknown candidate mode {value:?}")))?
            }
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v).map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.suite.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_experimental_setup() {
        let c = RunConfig::default();
        assert_eq!((c.suite.cm.alpha, c.suite.cm.beta, c.suite.cm_camo.beta), (6.0, 1.0, 1.2));
        let camo = c.suite.camo;
        assert_eq!((camo.band_width, camo.patch_size, camo.overlap), (20, 7, 3));
        assert_eq!((camo.lambda, camo.gamma), (20.0, 8.0));
    }

    #[test]
    fn file_then_override() {
        let mut c = RunConfig::default();
        c.apply_text("# tuned\nalpha = 4\nmetrics = iou, cmeasure\nseed=7 # fixed\n").unwrap();
        c.set("alpha", "5").unwrap();
        assert_eq!(c.suite.cm.alpha, 5.0);
        assert_eq!(c.suite.cm_camo.alpha, 5.0);
        assert_eq!(c.metrics, vec![Metric::Iou, Metric::CMeasure]);
        assert_eq!(c.seed, Some(7));
    }

    #[test]
    fn rejects_unknown_keys_and_values() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("colour = red").is_err());
        assert!(c.apply_text("alpha").is_err());
        assert!(c.set("gamma", "hot").is_err());
        assert!(c.set("metrics", "psnr").is_err());
    }

    #[test]
    fn every_key_is_settable() {
        let samples = [
            ("metrics", "all"),
            ("dense", "true"),
            ("format", "json"),
            ("candidates", "quiet-background"),
            ("seed", "1"),
            ("threads", "2"),
        ];
        for key in KEYS {
            let mut c = RunConfig::default();
            let value = samples.iter().find(|(k, _)| k == key).map_or("3", |(_, v)| v);
            c.set(key, value).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
    }
}
