//! Flat `key = value` run configuration.
//!
//! Blank lines and everything after `#` are ignored. Angles are in degrees,
//! capacitances in pF, frequencies in GHz and lengths in mm. Relative paths
//! resolve against the directory holding the config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Bad or missing configuration; maps to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Inclusive `start:stop:step` range, sampled as `start + i·step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn single(x: f64) -> Self {
        Self {
            start: x,
            stop: x,
            step: 1.0,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }

    fn parse(key: &str, s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let nums = parts
            .iter()
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad(format!("{key}: expected start:stop:step, got {s:?}")))?;
        let r = match nums.as_slice() {
            [x] => Self::single(*x),
            [start, stop, step] => Self {
                start: *start,
                stop: *stop,
                step: *step,
            },
            _ => return Err(bad(format!("{key}: expected start:stop:step, got {s:?}"))),
        };
        if !(r.step > 0.0 && r.step.is_finite()) {
            return Err(bad(format!("{key}: step must be positive")));
        }
        if !(r.start.is_finite() && r.stop.is_finite()) || r.stop < r.start {
            return Err(bad(format!("{key}: empty range {s:?}")));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Clamp,
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` selects the bundled three-angle table.
    pub calibration: Option<PathBuf>,
    pub varactor: Option<PathBuf>,
    pub z0_ohm: f64,
    pub n_columns: usize,
    pub m_rows: usize,
    pub period_mm: f64,
    pub freq_ghz: f64,
    pub freq_range_ghz: Range,
    pub angles_deg: Vec<f64>,
    pub angle_range_deg: Range,
    pub capacitances_pf: Vec<f64>,
    pub interpolation: Interpolation,
    pub theta1_range_deg: Range,
    pub theta2_range_deg: Range,
    pub reciprocity_threshold_deg: f64,
    pub max_infeasible_fraction: f64,
    pub theta_in_deg: f64,
    pub theta_out_deg: f64,
    pub pattern_step_deg: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            calibration: None,
            varactor: None,
            z0_ohm: 376.73,
            n_columns: 64,
            m_rows: 64,
            period_mm: 8.0,
            freq_ghz: 5.195,
            freq_range_ghz: Range {
                start: 4.0,
                stop: 7.0,
                step: 0.001,
            },
            angles_deg: vec![0.0, 30.0, 40.0],
            angle_range_deg: Range {
                start: 0.0,
                stop: 89.0,
                step: 1.0,
            },
            capacitances_pf: vec![0.63, 1.14, 2.67],
            interpolation: Interpolation::Clamp,
            theta1_range_deg: Range {
                start: -40.0,
                stop: 40.0,
                step: 5.0,
            },
            theta2_range_deg: Range {
                start: -40.0,
                stop: 40.0,
                step: 5.0,
            },
            reciprocity_threshold_deg: 1.0,
            max_infeasible_fraction: 0.0,
            theta_in_deg: 0.0,
            theta_out_deg: 30.0,
            pattern_step_deg: 0.1,
        }
    }
}

fn number(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| bad(format!("{key}: expected a number, got {v:?}")))
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| bad(format!("{key}: expected a non-negative integer, got {v:?}")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(bad(format!("{key}: list must not be empty")));
    }
    items.into_iter().map(|s| number(key, s)).collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected `key = value`", lineno + 1)))?;
            let k = k.trim().to_string();
            if seen.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(bad(format!("line {}: duplicate key {k}", lineno + 1)));
            }
        }

        let mut cfg = Self::default();
        for (k, v) in &seen {
            let k = k.as_str();
            let v = v.as_str();
            match k {
                "calibration" => cfg.calibration = Some(base.join(v)),
                "varactor" => cfg.varactor = Some(base.join(v)),
                "z0_ohm" => cfg.z0_ohm = number(k, v)?,
                "n_columns" => cfg.n_columns = count(k, v)?,
                "m_rows" => cfg.m_rows = count(k, v)?,
                "period_mm" => cfg.period_mm = number(k, v)?,
                "freq_ghz" => cfg.freq_ghz = number(k, v)?,
                "freq_range_ghz" => cfg.freq_range_ghz = Range::parse(k, v)?,
                "angles_deg" => cfg.angles_deg = list(k, v)?,
                "angle_range_deg" => cfg.angle_range_deg = Range::parse(k, v)?,
                "capacitances_pf" => cfg.capacitances_pf = list(k, v)?,
                "interpolation" => {
                    cfg.interpolation = match v {
                        "clamp" => Interpolation::Clamp,
                        "strict" => Interpolation::Strict,
                        _ => {
                            return Err(bad(format!(
                                "interpolation: expected clamp or strict, got {v:?}"
                            )))
                        }
                    }
                }
                "theta1_range_deg" => cfg.theta1_range_deg = Range::parse(k, v)?,
                "theta2_range_deg" => cfg.theta2_range_deg = Range::parse(k, v)?,
                "reciprocity_threshold_deg" => cfg.reciprocity_threshold_deg = number(k, v)?,
                "max_infeasible_fraction" => cfg.max_infeasible_fraction = number(k, v)?,
                "theta_in_deg" => cfg.theta_in_deg = number(k, v)?,
                "theta_out_deg" => cfg.theta_out_deg = number(k, v)?,
                "pattern_step_deg" => cfg.pattern_step_deg = number(k, v)?,
                _ => return Err(bad(format!("unknown key {k:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_columns < 2 {
            return Err(bad("n_columns must be at least 2"));
        }
        for (k, v) in [
            ("z0_ohm", self.z0_ohm),
            ("period_mm", self.period_mm),
            ("freq_ghz", self.freq_ghz),
            ("pattern_step_deg", self.pattern_step_deg),
        ] {
            if v <= 0.0 {
                return Err(bad(format!("{k} must be positive")));
            }
        }
        if self.freq_range_ghz.start <= 0.0 {
            return Err(bad("freq_range_ghz must be positive"));
        }
        if self.capacitances_pf.iter().any(|c| *c <= 0.0) {
            return Err(bad("capacitances_pf must be positive"));
        }
        if self.reciprocity_threshold_deg < 0.0 {
            return Err(bad("reciprocity_threshold_deg must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.max_infeasible_fraction) {
            return Err(bad("max_infeasible_fraction must lie in [0, 1]"));
        }
        for path in self.calibration.iter().chain(&self.varactor) {
            if !path.is_file() {
                return Err(bad(format!("file not found: {}", path.display())));
            }
        }
        Ok(())
    }
}
