//! Run configuration read from `--config`.

use std::path::Path;

use floquet4::{Backend, PeriodicPotential, PotentialSpec};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Trace,
    Spectrum,
    Asymptotics,
    SmallGamma,
    DeltaComb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    #[default]
    Eigenvalues,
    Resonances,
    Both,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialSpec>,
    /// Must agree with the subcommand when present.
    pub command: Option<Command>,
    pub lambda_range: Option<[f64; 2]>,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_n_range")]
    pub n_range: [usize; 2],
    #[serde(default)]
    pub quantity: Quantity,
    pub gammas: Option<Vec<f64>>,
    pub grid: Option<f64>,
    pub tol: Option<f64>,
    pub backend: Option<Backend>,
    #[serde(default = "default_indices")]
    pub indices: Vec<u32>,
    #[serde(default = "default_nu_range")]
    pub nu_range: [f64; 2],
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_points() -> usize {
    501
}

fn default_n_max() -> usize {
    8
}

fn default_n_range() -> [usize; 2] {
    [1, 8]
}

fn default_indices() -> Vec<u32> {
    vec![2, 3, 4]
}

fn default_nu_range() -> [f64; 2] {
    [-1e-3, 1e-3]
}

fn default_steps() -> usize {
    21
}

/// Default `γ` sweep for `small-gamma`: 21 points from 0.4 down two decades.
pub fn default_gammas() -> Vec<f64> {
    (0..=20).map(|i| 0.4 * 10f64.powf(-(i as f64) / 10.0)).collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::validation("config_unreadable", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            Failure::validation("config_parse", format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
        })
    }

    /// Checks that do not depend on the numerics; `tol_override` is the `--tol` flag.
    pub fn validate(&mut self, command: Command, tol_override: Option<f64>) -> Result<(), Failure> {
        if let Some(c) = self.command {
            if c != command {
                return Err(Failure::validation("command_mismatch", format!("config names {c:?} but the subcommand is {command:?}")));
            }
        }
        if tol_override.is_some() {
            self.tol = tol_override;
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Failure::validation("tol", format!("tolerance must be positive and finite (got {t})")));
            }
        }
        if let Some(g) = self.grid {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Failure::validation("grid", format!("grid density must be positive and finite (got {g})")));
            }
        }
        if let Some([lo, hi]) = self.lambda_range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Failure::validation("lambda_range", format!("lambda_range must satisfy lo < hi (got [{lo}, {hi}])")));
            }
        }
        match command {
            Command::Trace => {
                if self.lambda_range.is_none() {
                    return Err(Failure::validation("lambda_range", "trace needs lambda_range".into()));
                }
                if self.points < 2 {
                    return Err(Failure::validation("points", format!("points must be at least 2 (got {})", self.points)));
                }
            }
            Command::Asymptotics => {
                let [lo, hi] = self.n_range;
                if lo < 1 || hi < lo {
                    return Err(Failure::validation("n_range", format!("n_range must satisfy 1 ≤ lo ≤ hi (got [{lo}, {hi}])")));
                }
            }
            Command::SmallGamma => {
                if let Some(g) = &self.gammas {
                    if g.is_empty() || g.iter().any(|x| !x.is_finite()) {
                        return Err(Failure::validation("gammas", "gammas must be a nonempty list of finite numbers".into()));
                    }
                }
            }
            Command::DeltaComb => {
                let [lo, hi] = self.nu_range;
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Failure::validation("nu_range", format!("nu_range must satisfy lo < hi (got [{lo}, {hi}])")));
                }
                if self.steps < 2 {
                    return Err(Failure::validation("steps", format!("steps must be at least 2 (got {})", self.steps)));
                }
                if self.indices.is_empty() || self.indices.contains(&0) {
                    return Err(Failure::validation("indices", "indices must be a nonempty list of n ≥ 1".into()));
                }
            }
            Command::Spectrum => {}
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<PeriodicPotential, Failure> {
        let spec = self.potential.as_ref().ok_or_else(|| Failure::validation("potential", "config has no potential".into()))?;
        let v = PeriodicPotential::from_spec(spec)?;
        if let Some(b) = self.backend {
            b.check(&v)?;
        }
        Ok(v)
    }
}
