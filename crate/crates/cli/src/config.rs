//! Run configuration: curve selection, energy and flow parameters, output
//! options. Values come from defaults, then an optional key=value file,
//! then command-line flags, each layer overriding the previous one.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mengerflow_core::energy::P_RANGE;
use mengerflow_core::{EnergyParams, FlowConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveSpec {
    Torus { a: i64, b: i64 },
    SquareKnot,
    File(PathBuf),
}

impl CurveSpec {
    /// Accepts `torus:a,b`, `square-knot`, or `file:path`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text == "square-knot" {
            return Ok(CurveSpec::SquareKnot);
        }
        if let Some(rest) = text.strip_prefix("torus:") {
            let mut it = rest.split(',');
            let a = it.next().and_then(|t| t.trim().parse().ok());
            let b = it.next().and_then(|t| t.trim().parse().ok());
            return match (a, b, it.next()) {
                (Some(a), Some(b), None) => Ok(CurveSpec::Torus { a, b }),
                _ => Err(CliError::Invalid(format!(
                    "bad torus spec {text:?}, expected torus:a,b"
                ))),
            };
        }
        if let Some(path) = text.strip_prefix("file:") {
            return Ok(CurveSpec::File(PathBuf::from(path)));
        }
        Err(CliError::Invalid(format!(
            "unknown curve spec {text:?} (use torus:a,b | square-knot | file:path)"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub obj: bool,
    pub csv: bool,
}

impl Formats {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut f = Formats {
            obj: false,
            csv: false,
        };
        for part in text.split(',') {
            match part.trim() {
                "obj" => f.obj = true,
                "csv" => f.csv = true,
                other => {
                    return Err(CliError::Invalid(format!(
                        "unknown format {other:?} (use obj, csv)"
                    )))
                }
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub p: f64,
    pub allow_any_p: bool,
    pub degenerate_threshold: f64,
    pub n_edges: usize,
    pub curve: CurveSpec,
    pub noise: f64,
    pub seed: u64,
    pub radius_major: f64,
    pub radius_minor: f64,
    pub flow: FlowConfig,
    pub out: PathBuf,
    pub frame_every: usize,
    pub formats: Formats,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 2.5,
            allow_any_p: false,
            degenerate_threshold: 1e-12,
            n_edges: 48,
            curve: CurveSpec::Torus { a: 2, b: 3 },
            noise: 0.0,
            seed: 0,
            radius_major: 2.0,
            radius_minor: 1.0,
            flow: FlowConfig::default(),
            out: PathBuf::from("out"),
            frame_every: 0,
            formats: Formats {
                obj: true,
                csv: true,
            },
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn energy_params(&self) -> Result<EnergyParams, CliError> {
        let params = if self.allow_any_p {
            EnergyParams::unrestricted(self.p)
        } else {
            EnergyParams::new(self.p)
        }?;
        Ok(params.with_degenerate_threshold(self.degenerate_threshold)?)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !self.allow_any_p && !(self.p > P_RANGE.0 && self.p < P_RANGE.1) {
            return Err(CliError::Invalid(format!(
                "p = {} outside (7/3, 8/3); pass --allow-any-p to override",
                self.p
            )));
        }
        if self.n_edges < 3 {
            return Err(CliError::Invalid(format!(
                "curve needs at least 3 edges, got {}",
                self.n_edges
            )));
        }
        if self.noise.is_nan() || self.noise < 0.0 {
            return Err(CliError::Invalid(format!(
                "noise amplitude must be nonnegative, got {}",
                self.noise
            )));
        }
        self.flow.validate()?;
        Ok(())
    }
}

/// Parse a plain `key = value` file (one pair per line, `#` comments).
pub fn parse_key_value(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("line {}: expected key=value", lineno + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Apply settings from a key=value config file; unknown keys are errors so
/// typos do not silently vanish.
pub fn apply_file(cfg: &mut RunConfig, path: &Path) -> Result<(), CliError> {
    let map = parse_key_value(&std::fs::read_to_string(path)?)?;
    for (key, value) in &map {
        apply_setting(cfg, key, value)
            .map_err(|e| CliError::Invalid(format!("config key {key:?}: {e}")))?;
    }
    Ok(())
}

pub fn apply_setting(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), CliError> {
    let bad = |k: &str, v: &str| CliError::Invalid(format!("cannot parse {k}={v}"));
    macro_rules! num {
        ($slot:expr) => {
            $slot = value.parse().map_err(|_| bad(key, value))?
        };
    }
    match key {
        "p" => num!(cfg.p),
        "allow-any-p" => num!(cfg.allow_any_p),
        "degenerate-threshold" => num!(cfg.degenerate_threshold),
        "n" => num!(cfg.n_edges),
        "curve" => cfg.curve = CurveSpec::parse(value)?,
        "noise" => num!(cfg.noise),
        "seed" => num!(cfg.seed),
        "radius-major" => num!(cfg.radius_major),
        "radius-minor" => num!(cfg.radius_minor),
        "sigma" => num!(cfg.flow.sigma_armijo),
        "backtrack" => num!(cfg.flow.backtrack_factor),
        "grow" => num!(cfg.flow.step_grow_factor),
        "tau-init" => num!(cfg.flow.tau_init),
        "tau-min" => num!(cfg.flow.tau_min),
        "tol-feas" => num!(cfg.flow.tol_feas),
        "max-newton" => num!(cfg.flow.max_newton),
        "tol-grad" => num!(cfg.flow.tol_grad),
        "max-iters" => num!(cfg.flow.max_iters),
        "isotopy-check" => num!(cfg.flow.isotopy_check),
        "angle-margin" => num!(cfg.flow.isotopy_policy.angle_margin),
        "out" => cfg.out = PathBuf::from(value),
        "frame-every" => num!(cfg.frame_every),
        "formats" => cfg.formats = Formats::parse(value)?,
        "threads" => cfg.threads = Some(value.parse().map_err(|_| bad(key, value))?),
        other => {
            return Err(CliError::Invalid(format!("unknown config key {other:?}")));
        }
    }
    Ok(())
}
