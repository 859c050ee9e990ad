//! Run configuration: a `key = value` text file plus overrides.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gap::critical_coupling;
use crate::model::{Dispersion, Lattice, ModelSpec};
use crate::potential::ExternalField;

pub const KEYS: &[&str] = &[
    "d",
    "L",
    "beta",
    "nu",
    "mu",
    "dispersion",
    "hopping",
    "lambda",
    "lambda_factor",
    "energy_window",
    "seed",
    "count",
    "tol",
    "output",
    "external",
    "include_zero_mode",
    "field",
    "field_scale",
    "theta",
    "slack",
    "sweep",
    "fd_small",
    "fd_random",
    "directions",
];

/// Keys a sweep may vary.
pub const SWEEP_KEYS: &[&str] = &["lambda", "lambda_factor", "beta", "L", "mu", "nu"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Bcs,
    Random,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub key: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    /// `steps` evenly spaced points from `start` to `stop` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        match self.steps {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Coupling as given: absolute, or a multiple of `lambda_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Absolute(f64),
    Ratio(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Model with `lambda` left at 0 until [`RunConfig::lattice`] resolves it.
    pub spec: ModelSpec,
    pub coupling: Coupling,
    pub seed: u64,
    pub count: usize,
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub external: ExternalField,
    pub include_zero_mode: bool,
    pub field: FieldKind,
    pub field_scale: f64,
    pub theta: f64,
    /// Bound-chain slack in units of `kappa`.
    pub slack: f64,
    pub sweep: Option<Sweep>,
    pub fd_small: usize,
    pub fd_random: usize,
    pub directions: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spec: ModelSpec::default(),
            coupling: Coupling::Ratio(2.0),
            seed: 0,
            count: 200,
            tol: 1e-12,
            output: None,
            external: ExternalField::none(),
            include_zero_mode: true,
            field: FieldKind::Bcs,
            field_scale: 1.0,
            theta: 0.0,
            slack: 1e-9,
            sweep: None,
            fd_small: 2,
            fd_random: 0,
            directions: 10,
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| cfg_err(format!("{key}: cannot parse '{v}'")))
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(cfg_err(format!("{key}: expected a boolean, got '{v}'"))),
    }
}

/// `MAG[,PHASE]`
pub fn parse_external(v: &str) -> Result<ExternalField> {
    let mut it = v.split(',');
    let mag = num("external", it.next().unwrap_or(""))?;
    let phase = match it.next() {
        Some(p) => num("external", p)?,
        None => 0.0,
    };
    if it.next().is_some() {
        return Err(cfg_err("external: expected MAG[,PHASE]"));
    }
    ExternalField::new(mag, phase).map_err(|e| cfg_err(format!("external: {e}")))
}

/// `KEY=START:STOP:STEPS`
pub fn parse_sweep(v: &str) -> Result<Sweep> {
    let (key, range) = v.split_once('=').ok_or_else(|| cfg_err("sweep: expected KEY=START:STOP:STEPS"))?;
    let key = key.trim();
    if !SWEEP_KEYS.contains(&key) {
        return Err(cfg_err(format!("sweep: key '{key}' cannot be swept (one of {})", SWEEP_KEYS.join(", "))));
    }
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(cfg_err("sweep: expected KEY=START:STOP:STEPS"));
    }
    let s = Sweep { key: key.to_string(), start: num("sweep", parts[0])?, stop: num("sweep", parts[1])?, steps: num("sweep", parts[2])? };
    if s.steps == 0 {
        return Err(cfg_err("sweep: empty grid"));
    }
    if !(s.start <= s.stop) {
        return Err(cfg_err("sweep: START must not exceed STOP"));
    }
    Ok(s)
}

/// Reads `key = value` lines.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| cfg_err(format!("line {}: expected key = value", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
    parse_pairs(&text)
}

impl RunConfig {
    /// Defaults overridden by `pairs` in order; later pairs win.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            if !KEYS.contains(&k.as_str()) {
                return Err(cfg_err(format!("unknown key '{k}'")));
            }
            map.insert(k.as_str(), v.as_str());
        }
        if map.contains_key("lambda") && map.contains_key("lambda_factor") {
            return Err(cfg_err("give either lambda or lambda_factor, not both"));
        }
        let mut c = RunConfig::default();
        let mut hopping = 1.0;
        let mut kind = "tight_binding".to_string();
        for (&k, &v) in &map {
            match k {
                "d" => c.spec.d = num(k, v)?,
                "L" => c.spec.l = num(k, v)?,
                "beta" => c.spec.beta = num(k, v)?,
                "nu" => c.spec.nu = num(k, v)?,
                "mu" => c.spec.mu = num(k, v)?,
                "dispersion" => kind = v.to_string(),
                "hopping" => hopping = num(k, v)?,
                "lambda" => c.coupling = Coupling::Absolute(num(k, v)?),
                "lambda_factor" => c.coupling = Coupling::Ratio(num(k, v)?),
                "energy_window" => c.spec.energy_window = num(k, v)?,
                "seed" => c.seed = num(k, v)?,
                "count" => c.count = num(k, v)?,
                "tol" => c.tol = num(k, v)?,
                "output" => c.output = Some(PathBuf::from(v)),
                "external" => c.external = parse_external(v)?,
                "include_zero_mode" => c.include_zero_mode = boolean(k, v)?,
                "field" => {
                    c.field = match v {
                        "bcs" => FieldKind::Bcs,
                        "random" => FieldKind::Random,
                        "zero" => FieldKind::Zero,
                        _ => return Err(cfg_err(format!("field: expected bcs, random or zero, got '{v}'"))),
                    }
                }
                "field_scale" => c.field_scale = num(k, v)?,
                "theta" => c.theta = num(k, v)?,
                "slack" => c.slack = num(k, v)?,
                "sweep" => c.sweep = Some(parse_sweep(v)?),
                "fd_small" => c.fd_small = num(k, v)?,
                "fd_random" => c.fd_random = num(k, v)?,
                "directions" => c.directions = num(k, v)?,
                _ => unreachable!(),
            }
        }
        c.spec.dispersion = match kind.as_str() {
            "tight_binding" => Dispersion::TightBinding { t: hopping },
            "quadratic" => Dispersion::Quadratic,
            _ => return Err(cfg_err(format!("dispersion: expected tight_binding or quadratic, got '{kind}'"))),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(cfg_err("tol must be > 0"));
        }
        if !(self.slack > 0.0) {
            return Err(cfg_err("slack must be > 0"));
        }
        if !(self.field_scale >= 0.0) {
            return Err(cfg_err("field_scale must be >= 0"));
        }
        match self.coupling {
            Coupling::Absolute(x) | Coupling::Ratio(x) if !(x >= 0.0 && x.is_finite()) => {
                Err(cfg_err("coupling must be finite and >= 0"))
            }
            _ => self.spec.with_lambda(0.0).validate().map_err(|e| cfg_err(e.to_string())),
        }
    }

    /// Config with one key replaced, as used by sweeps.
    pub fn with_value(&self, key: &str, value: f64) -> Result<Self> {
        let mut c = self.clone();
        match key {
            "lambda" => c.coupling = Coupling::Absolute(value),
            "lambda_factor" => c.coupling = Coupling::Ratio(value),
            "beta" => c.spec.beta = value,
            "L" => c.spec.l = value.round(),
            "mu" => c.spec.mu = value,
            "nu" => c.spec.nu = value,
            _ => return Err(cfg_err(format!("cannot set '{key}'"))),
        }
        c.validate()?;
        Ok(c)
    }

    /// Builds the cutoff lattice and resolves the coupling.
    pub fn lattice(&self) -> Result<Lattice> {
        let lat = Lattice::new(&self.spec.with_lambda(0.0)).map_err(|e| cfg_err(e.to_string()))?;
        let lambda = match self.coupling {
            Coupling::Absolute(x) => x,
            Coupling::Ratio(f) => f * critical_coupling(&lat),
        };
        Ok(lat.with_lambda(lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn parses_file_text() {
        let text = "# desk\nL = 32\nbeta=2 # inline\n\nmu = 0.2\nnu = 5\ninclude_zero_mode = false\nexternal = 1e-3, 0.5\n";
        let c = RunConfig::from_pairs(&parse_pairs(text).unwrap()).unwrap();
        assert_eq!((c.spec.l, c.spec.beta, c.spec.mu, c.spec.nu), (32.0, 2.0, 0.2, 5.0));
        assert!(!c.include_zero_mode);
        assert_eq!(c.external, ExternalField::new(1e-3, 0.5).unwrap());
        assert_eq!(c.lattice().unwrap().n(), 48);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            vec![("lattice", "3")],
            vec![("L", "abc")],
            vec![("tol", "0")],
            vec![("lambda", "1"), ("lambda_factor", "2")],
            vec![("sweep", "L=8:32:0")],
            vec![("sweep", "L=32:8:3")],
            vec![("sweep", "t=1:2:3")],
            vec![("dispersion", "cubic")],
            vec![("external", "-1")],
            vec![("include_zero_mode", "maybe")],
        ] {
            assert!(matches!(RunConfig::from_pairs(&pairs(&bad)), Err(Error::Config(_))), "{bad:?}");
        }
        assert!(parse_pairs("L 16").is_err());
        let c = RunConfig::from_pairs(&pairs(&[("energy_window", "0")])).unwrap();
        assert!(matches!(c.lattice(), Err(Error::Config(_))));
    }

    #[test]
    fn later_pairs_override() {
        let c = RunConfig::from_pairs(&pairs(&[("L", "8"), ("L", "12")])).unwrap();
        assert_eq!(c.spec.l, 12.0);
    }

    #[test]
    fn sweep_grid() {
        let s = parse_sweep("L=8:32:4").unwrap();
        assert_eq!(s.grid(), vec![8.0, 16.0, 24.0, 32.0]);
        assert_eq!(parse_sweep("beta=2:2:1").unwrap().grid(), vec![2.0]);
    }

    #[test]
    fn coupling_resolution() {
        let c = RunConfig::default();
        let lat = c.lattice().unwrap();
        assert_eq!(lat.n(), 300);
        assert!((lat.spec.lambda - 2.0 * critical_coupling(&lat)).abs() < 1e-12);
        let abs = c.with_value("lambda", 0.7).unwrap().lattice().unwrap();
        assert_eq!(abs.spec.lambda, 0.7);
    }
}
