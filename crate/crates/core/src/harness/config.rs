//! Plain-text experiment configuration: `key = value` lines, `#` comments.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flux::{FluxConfig, FluxKind};
use crate::mgrit::MgritConfig;
use crate::models::{ConservationModel, DEFAULT_GAMMA, DEFAULT_GRAVITY};
use crate::serial::InitialCondition;
use crate::stepper::{StepperKind, StepperSpec};
use crate::weno::{WenoConfig, DEFAULT_EPSILON, MAX_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Burgers,
    ShallowWater,
    Euler,
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "burgers" => Ok(Problem::Burgers),
            "shallow-water" => Ok(Problem::ShallowWater),
            "euler" => Ok(Problem::Euler),
            other => Err(format!("unknown problem `{other}`")),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Burgers => "burgers",
            Problem::ShallowWater => "shallow-water",
            Problem::Euler => "euler",
        })
    }
}

/// Integrator settings of one level after broadcasting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSpec {
    pub stepper: StepperSpec,
    pub flux: FluxConfig,
}

/// One swept key with its per-column values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub ic: InitialCondition,
    pub length: f64,
    pub horizon: f64,
    pub n_x: usize,
    pub n_t: usize,
    pub mgrit: MgritConfig,
    /// One entry, or one per level.
    pub steppers: Vec<StepperKind>,
    pub fluxes: Vec<FluxKind>,
    pub weno_orders: Vec<usize>,
    pub epsilon: f64,
    pub gamma: f64,
    pub gravity: f64,
    pub characteristic: bool,
    pub label: Option<String>,
    /// Axes are zipped: column `j` takes value `j` of every axis.
    pub sweep: Vec<SweepAxis>,
    pub sweep_labels: Option<Vec<String>>,
}

const REQUIRED: [&str; 6] = ["problem", "ic", "T", "N_x", "N_t", "stepper"];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: Problem::Burgers,
            ic: InitialCondition::SinStationary,
            length: 1.0,
            horizon: 1.0,
            n_x: 64,
            n_t: 64,
            mgrit: MgritConfig::default(),
            steppers: vec![StepperKind::Ssprk3],
            fluxes: vec![FluxKind::Roe],
            weno_orders: vec![1],
            epsilon: DEFAULT_EPSILON,
            gamma: DEFAULT_GAMMA,
            gravity: DEFAULT_GRAVITY,
            characteristic: true,
            label: None,
            sweep: Vec::new(),
            sweep_labels: None,
        }
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("cannot parse `{value}`: {e}"))
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = value.split(',').map(|v| parse(v.trim())).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("expected a boolean, got `{other}`")),
    }
}

fn parse_positive(value: &str) -> Result<f64, String> {
    let v: f64 = parse(value)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("expected a positive number, got `{value}`"));
    }
    Ok(v)
}

fn broadcast<T: Copy>(items: &[T], n: usize) -> Vec<T> {
    if items.len() == 1 {
        vec![items[0]; n]
    } else {
        items.to_vec()
    }
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "problem" => self.problem = parse(value)?,
            "ic" => self.ic = parse(value)?,
            "L" => self.length = parse_positive(value)?,
            "T" => self.horizon = parse_positive(value)?,
            "N_x" => self.n_x = parse(value)?,
            "N_t" => self.n_t = parse(value)?,
            "n_levels" => self.mgrit.n_levels = parse(value)?,
            "m" => self.mgrit.m = parse(value)?,
            "cycle" => self.mgrit.cycle = parse(value)?,
            "relaxation" => self.mgrit.relaxation = parse(value)?,
            "restriction_guess" => self.mgrit.restriction_guess = parse(value)?,
            "max_iters" => self.mgrit.max_iters = parse(value)?,
            "divergence_threshold" => self.mgrit.divergence_threshold = parse_positive(value)?,
            "parallelism" => self.mgrit.parallelism = parse(value)?,
            "epsilon" => self.epsilon = parse_positive(value)?,
            "gamma" => self.gamma = parse(value)?,
            "g" => self.gravity = parse_positive(value)?,
            "characteristic" => self.characteristic = parse_bool(value)?,
            "stepper" => self.steppers = parse_list(value)?,
            "flux" => self.fluxes = parse_list(value)?,
            "weno_order" => self.weno_orders = parse_list(value)?,
            "label" => {
                if value.contains([',', '\n', '\r', '"']) {
                    return Err("labels may not contain commas, quotes or line breaks".into());
                }
                self.label = Some(value.to_string());
            }
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    pub fn model(&self) -> ConservationModel {
        match self.problem {
            Problem::Burgers => ConservationModel::Burgers,
            Problem::ShallowWater => ConservationModel::ShallowWater { g: self.gravity },
            Problem::Euler => ConservationModel::Euler { gamma: self.gamma },
        }
    }

    /// Per-level integrator settings with single values broadcast.
    pub fn levels(&self) -> Vec<LevelSpec> {
        let n = self.mgrit.n_levels;
        let steppers = broadcast(&self.steppers, n);
        let fluxes = broadcast(&self.fluxes, n);
        let orders = broadcast(&self.weno_orders, n);
        (0..n)
            .map(|l| LevelSpec {
                stepper: StepperSpec::new(steppers[l]),
                flux: FluxConfig {
                    kind: fluxes[l],
                    weno: WenoConfig {
                        k: orders[l].saturating_sub(1) / 2,
                        epsilon: self.epsilon,
                        characteristic: self.characteristic,
                        linear_weights: false,
                    },
                },
            })
            .collect()
    }

    /// Column name used when no explicit label is given.
    pub fn column_name(&self) -> String {
        self.label.clone().unwrap_or_else(|| "error".to_string())
    }

    /// Checks every cross-key invariant. On failure returns the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let model = self.model();
        model.validate().map_err(|e| (if self.problem == Problem::Euler { "gamma" } else { "g" }, e.to_string()))?;
        if !self.ic.fits(&model) {
            return Err(("ic", format!("`{}` is not an initial condition for {}", self.ic, self.problem)));
        }
        if self.n_x == 0 {
            return Err(("N_x", "must be positive".into()));
        }
        if self.mgrit.n_levels == 0 {
            return Err(("n_levels", "must be at least 1".into()));
        }
        self.mgrit.validate(self.n_t).map_err(|e| {
            let key = match &e {
                Error::Config(msg) if msg.contains("divisible") => "N_t",
                Error::Config(msg) if msg.contains("coarsening") => "m",
                Error::Config(msg) if msg.contains("parallelism") => "parallelism",
                _ => "n_levels",
            };
            (key, e.to_string())
        })?;
        let n = self.mgrit.n_levels;
        for (key, len) in [
            ("stepper", self.steppers.len()),
            ("flux", self.fluxes.len()),
            ("weno_order", self.weno_orders.len()),
        ] {
            if len != 1 && len != n {
                return Err((key, format!("{len} values for {n} levels")));
            }
        }
        for &s in &self.weno_orders {
            if s % 2 == 0 || s > 2 * MAX_DEGREE + 1 {
                return Err(("weno_order", format!("order {s} is not one of 1, 3, 5, 7")));
            }
            if self.n_x < s {
                return Err(("N_x", format!("{} cells cannot hold a stencil of order {s}", self.n_x)));
            }
        }
        let steppers = broadcast(&self.steppers, n);
        if steppers[0].is_derived() || steppers[0].is_matched() {
            return Err(("stepper", format!("`{}` cannot be used on the finest level", steppers[0])));
        }
        for &s in &steppers {
            if matches!(s, StepperKind::LfFine) || s.is_matched() {
                if self.problem != Problem::Burgers {
                    return Err(("stepper", format!("`{s}` is only available for burgers")));
                }
            }
            if s.is_matched() && steppers[0] != StepperKind::LfFine {
                return Err(("stepper", format!("`{s}` needs lf-fine on the finest level")));
            }
        }
        Ok(())
    }

    /// The configuration of every sweep column, or just this one without a sweep.
    pub fn columns(&self) -> Result<Vec<(String, ExperimentConfig)>, (String, String)> {
        if self.sweep.is_empty() {
            let mut base = self.clone();
            base.sweep_labels = None;
            return Ok(vec![(self.column_name(), base)]);
        }
        let n = self.sweep[0].values.len();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let mut cfg = self.clone();
            cfg.sweep.clear();
            cfg.sweep_labels = None;
            let mut parts = Vec::new();
            for axis in &self.sweep {
                let v = &axis.values[j];
                cfg.set(&axis.key, v).map_err(|m| (format!("sweep.{}", axis.key), m))?;
                parts.push(format!("{}={}", axis.key, v.replace(',', "/").replace(' ', "")));
            }
            let name = match &self.sweep_labels {
                Some(labels) => labels[j].clone(),
                None => match &self.label {
                    Some(l) => format!("{l} {}", parts.join(";")),
                    None => parts.join(";"),
                },
            };
            cfg.label = Some(name.clone());
            cfg.validate().map_err(|(k, m)| (k.to_string(), format!("sweep column {}: {m}", j + 1)))?;
            out.push((name, cfg));
        }
        Ok(out)
    }
}

fn parse_error(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Parse { line, key: key.to_string(), message: message.into() }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut lines: HashMap<String, usize> = HashMap::new();
    let mut sweep_lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(parse_error(line_no, content, "expected `key = value`"));
        };
        let (key, value) = (key.trim(), value.trim());
        if lines.insert(key.to_string(), line_no).is_some() {
            return Err(parse_error(line_no, key, "duplicate key"));
        }
        if let Some(swept) = key.strip_prefix("sweep.") {
            let values: Vec<String> = value.split('|').map(|v| v.trim().to_string()).collect();
            if values.iter().any(String::is_empty) {
                return Err(parse_error(line_no, key, "empty sweep value"));
            }
            if swept == "labels" {
                if values.iter().any(|v| v.contains([',', '"'])) {
                    return Err(parse_error(line_no, key, "labels may not contain commas or quotes"));
                }
                cfg.sweep_labels = Some(values);
                continue;
            }
            let mut scratch = ExperimentConfig::default();
            for v in &values {
                scratch.set(swept, v).map_err(|m| parse_error(line_no, key, m))?;
            }
            sweep_lines.push(line_no);
            cfg.sweep.push(SweepAxis { key: swept.to_string(), values });
            continue;
        }
        cfg.set(key, value).map_err(|m| parse_error(line_no, key, m))?;
    }

    for key in REQUIRED {
        if !lines.contains_key(key) {
            return Err(parse_error(0, key, "missing required key"));
        }
    }
    let line_of = |key: &str| lines.get(key).copied().unwrap_or(0);
    if let Some(first) = cfg.sweep.first() {
        let n = first.values.len();
        for (axis, line) in cfg.sweep.iter().zip(&sweep_lines) {
            if axis.values.len() != n {
                return Err(parse_error(
                    *line,
                    &format!("sweep.{}", axis.key),
                    format!("{} values where the first sweep has {n}", axis.values.len()),
                ));
            }
        }
        if let Some(labels) = &cfg.sweep_labels {
            if labels.len() != n {
                return Err(parse_error(line_of("sweep.labels"), "sweep.labels", format!("{} labels for {n} columns", labels.len())));
            }
        }
    } else if cfg.sweep_labels.is_some() {
        return Err(parse_error(line_of("sweep.labels"), "sweep.labels", "labels without a sweep"));
    }

    cfg.validate().map_err(|(key, m)| parse_error(line_of(key), key, m))?;
    cfg.columns().map_err(|(key, m)| parse_error(line_of(&key), &key, m))?;
    Ok(cfg)
}
