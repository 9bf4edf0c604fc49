//! Run configuration: a flat `key = value` file whose entries can be
//! overridden one by one.

use std::path::Path;

use crate::error::{Error, Result};
use crate::fitting::FitConfig;
use crate::io::{parse_key_values, read_text};
use crate::optimizer::OptimizerConfig;
use crate::relaxation::RelaxationParams;

/// Environment variable naming a default configuration file.
pub const CONFIG_ENV: &str = "DEVCORR_CONFIG";

/// Seed of the random X state used by `reproduce`. It yields a state whose
/// classical correlation exceeds its quantum correlation.
pub const K_ABOVE_Q_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub c: f64,
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
    pub optimizer_tolerance: f64,
    pub optimizer_grid: usize,
    pub optimizer_starts: usize,
    pub consistency_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = RelaxationParams::sodium_lyotropic();
        let opt = OptimizerConfig::default();
        RunConfig {
            c: p.c,
            j0: p.j0,
            j1: p.j1,
            j2: p.j2,
            epsilon: 1e-5,
            alpha: 1.0,
            dt: 1.5e-3,
            n_steps: 40,
            seed: K_ABOVE_Q_SEED,
            optimizer_tolerance: opt.tolerance,
            optimizer_grid: opt.grid_points,
            optimizer_starts: opt.starts,
            consistency_threshold: FitConfig::default().consistency_threshold,
        }
    }
}

pub const KEYS: [&str; 13] = [
    "C",
    "J0",
    "J1",
    "J2",
    "epsilon",
    "alpha",
    "dt",
    "n_steps",
    "seed",
    "optimizer_tolerance",
    "optimizer_grid",
    "optimizer_starts",
    "consistency_threshold",
];

fn real(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Parse(format!("{key}: '{v}' is not a number")))
}

fn count(key: &str, v: &str) -> Result<u64> {
    v.parse::<u64>()
        .map_err(|_| Error::Parse(format!("{key}: '{v}' is not a non-negative integer")))
}

impl RunConfig {
    /// Sets one entry; `key` is one of [`KEYS`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "C" => self.c = real(key, value)?,
            "J0" => self.j0 = real(key, value)?,
            "J1" => self.j1 = real(key, value)?,
            "J2" => self.j2 = real(key, value)?,
            "epsilon" => self.epsilon = real(key, value)?,
            "alpha" => self.alpha = real(key, value)?,
            "dt" => self.dt = real(key, value)?,
            "n_steps" => self.n_steps = count(key, value)? as usize,
            "seed" => self.seed = count(key, value)?,
            "optimizer_tolerance" => self.optimizer_tolerance = real(key, value)?,
            "optimizer_grid" => self.optimizer_grid = count(key, value)? as usize,
            "optimizer_starts" => self.optimizer_starts = count(key, value)? as usize,
            "consistency_threshold" => self.consistency_threshold = real(key, value)?,
            _ => return Err(Error::Parse(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies every entry of a `key = value` text on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_key_values(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.merge_text(&read_text(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults, then the file named by `DEVCORR_CONFIG` if set, then `path`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(env) = std::env::var_os(CONFIG_ENV) {
            cfg.merge_text(&read_text(Path::new(&env))?)?;
        }
        if let Some(p) = path {
            cfg.merge_text(&read_text(p)?)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("C", self.c), ("J0", self.j0), ("J1", self.j1), ("J2", self.j2), ("epsilon", self.epsilon), ("alpha", self.alpha), ("dt", self.dt), ("optimizer_tolerance", self.optimizer_tolerance), ("consistency_threshold", self.consistency_threshold)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        if self.optimizer_grid < 2 || self.optimizer_starts == 0 {
            return Err(Error::InvalidParameter("optimizer_grid must be >= 2 and optimizer_starts >= 1".into()));
        }
        Ok(())
    }

    pub fn relaxation(&self) -> Result<RelaxationParams> {
        RelaxationParams::new(self.c, self.j0, self.j1, self.j2)
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            grid_points: self.optimizer_grid,
            starts: self.optimizer_starts,
            tolerance: self.optimizer_tolerance,
            ..OptimizerConfig::default()
        }
    }

    pub fn fit(&self) -> FitConfig {
        FitConfig { consistency_threshold: self.consistency_threshold, strict: false }
    }

    /// Renders the configuration in the format read by [`RunConfig::merge_text`].
    pub fn to_text(&self) -> String {
        format!(
            "C = {:e}\nJ0 = {:e}\nJ1 = {:e}\nJ2 = {:e}\nepsilon = {:e}\nalpha = {:e}\ndt = {:e}\nn_steps = {}\nseed = {}\n\
optimizer_tolerance = {:e}\noptimizer_grid = {}\noptimizer_starts = {}\nconsistency_threshold = {:e}\n",
            self.c,
            self.j0,
            self.j1,
            self.j2,
            self.epsilon,
            self.alpha,
            self.dt,
            self.n_steps,
            self.seed,
            self.optimizer_tolerance,
            self.optimizer_grid,
            self.optimizer_starts,
            self.consistency_threshold
        )
    }
}
