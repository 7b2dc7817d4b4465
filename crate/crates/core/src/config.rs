//! Run configuration read from JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vorticity::{make_vorticity, NumTol, VorticityFn, VorticitySpec};
use crate::wave::{BranchOptions, NewtonOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_np")]
    pub np: usize,
    #[serde(default = "default_nq")]
    pub nq: usize,
}

fn default_np() -> usize {
    64
}

fn default_nq() -> usize {
    256
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            np: default_np(),
            nq: default_nq(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_newton")]
    pub newton: f64,
    #[serde(default = "default_tight")]
    pub quadrature: f64,
    #[serde(default = "default_tight")]
    pub root: f64,
}

fn default_newton() -> f64 {
    1e-10
}

fn default_tight() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            newton: default_newton(),
            quadrature: default_tight(),
            root: default_tight(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "default_newton_iters")]
    pub max_newton_iters: usize,
    #[serde(default = "default_steps")]
    pub max_continuation_steps: usize,
    #[serde(default = "default_lambda_cap")]
    pub lambda_cap: f64,
}

fn default_newton_iters() -> usize {
    50
}

fn default_steps() -> usize {
    200
}

fn default_lambda_cap() -> f64 {
    1e3
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_newton_iters: default_newton_iters(),
            max_continuation_steps: default_steps(),
            lambda_cap: default_lambda_cap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    pub vorticity: VorticitySpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub budgets: Budgets,
    /// The Lipschitz bound M; only used to flag waves whose slope exceeds it.
    #[serde(default = "default_slope_bound")]
    pub slope_bound_m: f64,
}

fn default_slope_bound() -> f64 {
    1.0
}

impl RunConfig {
    pub fn new(vorticity: VorticitySpec) -> Self {
        Self {
            vorticity,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            budgets: Budgets::default(),
            slope_bound_m: default_slope_bound(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tolerances.newton", self.tolerances.newton),
            ("tolerances.quadrature", self.tolerances.quadrature),
            ("tolerances.root", self.tolerances.root),
            ("budgets.lambdaCap", self.budgets.lambda_cap),
            ("slopeBoundM", self.slope_bound_m),
        ];
        for (field, x) in positive {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::validation(field, format!("must be positive and finite (got {x})")));
            }
        }
        for (field, n) in [("grid.np", self.grid.np), ("grid.nq", self.grid.nq)] {
            if n < 8 {
                return Err(Error::validation(field, format!("must be at least 8 (got {n})")));
            }
        }
        if self.budgets.max_newton_iters == 0 {
            return Err(Error::validation("budgets.maxNewtonIters", "must be at least 1"));
        }
        if self.budgets.max_continuation_steps == 0 {
            return Err(Error::validation("budgets.maxContinuationSteps", "must be at least 1"));
        }
        Ok(())
    }

    /// Parses strictly; errors carry the JSON path of the offending item.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::validation(if path == "." { "config".to_string() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical pretty JSON with every default spelled out.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn vorticity_fn(&self) -> Result<VorticityFn> {
        Ok(make_vorticity(self.vorticity.clone())?.with_tolerances(NumTol {
            quadrature: self.tolerances.quadrature,
            root: self.tolerances.root,
        }))
    }

    pub fn newton_options(&self) -> NewtonOptions {
        NewtonOptions {
            tol: self.tolerances.newton,
            max_iter: self.budgets.max_newton_iters,
            ..NewtonOptions::default()
        }
    }

    pub fn branch_options(&self) -> BranchOptions {
        BranchOptions {
            nq: self.grid.nq,
            newton: self.newton_options(),
            max_steps: self.budgets.max_continuation_steps,
            lambda_cap: self.budgets.lambda_cap,
            slope_bound: self.slope_bound_m,
        }
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_json(r#"{"vorticity":{"kind":"zero"}}"#).unwrap();
        assert_eq!(c, RunConfig::new(VorticitySpec::Zero));
        assert_eq!(c.grid.np, 64);
        assert_eq!(c.grid.nq, 256);
        assert_eq!(c.tolerances.newton, 1e-10);
        assert_eq!(c.tolerances.quadrature, 1e-12);
        assert_eq!(c.tolerances.root, 1e-12);
        assert_eq!(c.slope_bound_m, 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected_with_their_name() {
        let e = RunConfig::from_json(r#"{"vortcity":{"kind":"zero"}}"#).unwrap_err();
        assert!(e.to_string().contains("vortcity"), "{e}");
        let e = RunConfig::from_json(r#"{"vorticity":{"kind":"zero"},"grid":{"np":64,"nQ":3}}"#).unwrap_err();
        assert!(e.to_string().contains("nQ"), "{e}");
        let e = RunConfig::from_json(r#"{"vorticity":{"kind":"constant","b":"x"}}"#).unwrap_err();
        assert!(e.to_string().contains("vorticity"), "{e}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        let e = RunConfig::from_json(r#"{"vorticity":{"kind":"zero"},"grid":{"np":4}}"#).unwrap_err();
        assert!(e.to_string().contains("grid.np"), "{e}");
        let e = RunConfig::from_json(r#"{"vorticity":{"kind":"zero"},"slopeBoundM":0}"#).unwrap_err();
        assert!(e.to_string().contains("slopeBoundM"), "{e}");
    }

    #[test]
    fn canonical_json_round_trips() {
        let text = r#"{"vorticity":{"kind":"samples","p":[0,0.5,1],"omega":[0.1,-0.2,0.3]},"grid":{"nq":64}}"#;
        let c = RunConfig::from_json(text).unwrap();
        let once = c.to_json();
        let twice = RunConfig::from_json(&once).unwrap().to_json();
        assert_eq!(once, twice);
    }
}
