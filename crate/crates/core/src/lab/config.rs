use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// `key = value` lines; `#` starts a comment, blank lines are skipped, later keys win.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    map: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", n + 1)));
            }
            map.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Self { map })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    /// Parsed value of `key`, or `default` when absent.
    pub fn parsed<V: std::str::FromStr>(&self, key: &str, default: V) -> Result<V> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| Error::Parse(format!("bad value `{s}` for key `{key}`"))),
        }
    }
}

/// Parses `1/4, 1/8` or `4, 8` into reciprocals.
pub fn parse_eps_ladder(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            let den = match item.split_once('/') {
                Some((num, den)) if num.trim() == "1" => den.trim(),
                Some(_) => return Err(Error::Parse(format!("epsilon `{item}` is not the reciprocal of an integer"))),
                None => item,
            };
            den.parse::<u32>().ok().filter(|&k| k > 0).ok_or_else(|| Error::Parse(format!("bad epsilon `{item}`")))
        })
        .collect()
}

fn parse_list(s: &str, key: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{c}` in `{key}`"))))
        .collect()
}

/// How the oscillatory problem is solved in a rate experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Finite differences; optimal control for rows failing the budget.
    Auto,
    Pde,
    OptimalControl,
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Route::Auto),
            "pde" => Ok(Route::Pde),
            "oc" => Ok(Route::OptimalControl),
            other => Err(Error::Parse(format!("unknown route `{other}` (auto, pde, oc)"))),
        }
    }
}

/// Rate experiment settings. Keys of the key-value form are the field names.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: String,
    pub potential: String,
    pub dim: usize,
    pub initial: String,
    /// Reciprocals `1 / eps`, strictly increasing.
    pub eps: Vec<u32>,
    pub horizon: f64,
    pub snapshots: Vec<f64>,
    /// Grid cells per eps-period at the finer level.
    pub cells: usize,
    pub budget: f64,
    pub route: Route,
    /// Lattice cells per period of the optimal-control route.
    pub oc_cells: usize,
    /// Points of `[0,1)` sampled by the optimal-control route.
    pub oc_points: usize,
    pub table_steps: usize,
    pub table_horizon: f64,
    pub table_tol: f64,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: "quadratic".into(),
            potential: "cos1d".into(),
            dim: 1,
            initial: "sin".into(),
            eps: vec![4, 8, 16, 32, 64],
            horizon: 1.0,
            snapshots: vec![0.25, 0.5, 1.0],
            cells: 64,
            budget: 0.1,
            route: Route::Auto,
            oc_cells: 8,
            oc_points: 16,
            table_steps: 400,
            table_horizon: 100.0,
            table_tol: 1e-4,
            csv: None,
            svg: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub const KEYS: [&'static str; 18] = [
        "model",
        "potential",
        "dim",
        "initial",
        "eps",
        "horizon",
        "snapshots",
        "cells",
        "budget",
        "route",
        "oc_cells",
        "oc_points",
        "table_steps",
        "table_horizon",
        "table_tol",
        "csv",
        "svg",
        "seed",
    ];

    /// Defaults overridden by `kv`; unknown keys are rejected.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        if let Some(k) = kv.keys().find(|k| !Self::KEYS.contains(k)) {
            return Err(Error::Parse(format!("unknown key `{k}`")));
        }
        let d = Self::default();
        let cfg = Self {
            model: kv.get("model").map_or(d.model, str::to_string),
            potential: kv.get("potential").map_or(d.potential, str::to_string),
            dim: kv.parsed("dim", d.dim)?,
            initial: kv.get("initial").map_or(d.initial, str::to_string),
            eps: kv.get("eps").map_or(Ok(d.eps), parse_eps_ladder)?,
            horizon: kv.parsed("horizon", d.horizon)?,
            snapshots: kv.get("snapshots").map_or(Ok(d.snapshots), |s| parse_list(s, "snapshots"))?,
            cells: kv.parsed("cells", d.cells)?,
            budget: kv.parsed("budget", d.budget)?,
            route: kv.parsed("route", d.route)?,
            oc_cells: kv.parsed("oc_cells", d.oc_cells)?,
            oc_points: kv.parsed("oc_points", d.oc_points)?,
            table_steps: kv.parsed("table_steps", d.table_steps)?,
            table_horizon: kv.parsed("table_horizon", d.table_horizon)?,
            table_tol: kv.parsed("table_tol", d.table_tol)?,
            csv: kv.get("csv").map(PathBuf::from),
            svg: kv.get("svg").map(PathBuf::from),
            seed: kv.parsed("seed", d.seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() || self.eps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("eps ladder must be nonempty and strictly decreasing"));
        }
        if !(self.budget > 0.0 && self.budget < 1.0) {
            return Err(Error::invalid(format!("budget ratio {} is outside (0, 1)", self.budget)));
        }
        if !(self.horizon > 0.0) || self.snapshots.iter().any(|&t| !(t > 0.0 && t <= self.horizon)) {
            return Err(Error::invalid("snapshots must lie in (0, horizon]"));
        }
        if self.cells < 8 || self.cells % 2 != 0 {
            return Err(Error::invalid("cells per period must be even and at least 8"));
        }
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::invalid("dimension must be 1 or 2"));
        }
        if self.oc_cells < 2 || self.oc_cells % 2 != 0 || self.oc_points == 0 {
            return Err(Error::invalid("oc_cells must be even and at least 2, oc_points positive"));
        }
        Ok(())
    }
}
