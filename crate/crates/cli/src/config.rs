//! The run configuration: one TOML file, parsed strictly.
//!
//! Every table rejects keys it does not know, so a typo fails the run with
//! a diagnostic naming the key instead of silently falling back to a
//! default.

use std::path::Path;

use serde::Deserialize;

use radbound_core::bounds::{HPairing, Operation};
use radbound_core::experiments::{GreenConfig, Instance};
use radbound_core::ProblemSpec;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Bound-side description, for `bounds`, `regimes` and `sweep`.
    pub spec: Option<ProblemSpec>,
    #[serde(default)]
    pub bounds: BoundsArgs,
    /// A solvable instance, for `solve` and `verify`.
    pub instance: Option<Instance>,
    #[serde(default)]
    pub verify: VerifyArgs,
    pub green: Option<GreenConfig>,
    pub sweep: Option<SweepArgs>,
}

/// Arguments of the estimates that take more than the spec.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    #[serde(default)]
    pub pairing: Option<HPairing>,
    /// Target exponent of the Lq estimate.
    pub q: Option<f64>,
    pub excess_measure: Option<f64>,
    /// `‖u‖_{2p/(p-2)}` for the Moser estimate.
    pub u_norm: Option<f64>,
    /// `‖u‖_{2s/(s-1),∂Ω}` for the boundary-data estimate.
    pub u_trace_norm: Option<f64>,
    /// Target exponent of the W^{1,q} duality estimate.
    pub duality_q: Option<f64>,
    /// Target exponent of the L¹-data and Green estimates.
    pub adjoint_q: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Energy,
    Linf,
    Decay,
    Moser,
    L1,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[serde(default = "default_studies")]
    pub studies: Vec<Study>,
    /// Decay-study thresholds; geometric up to max|u_h| when absent.
    pub k_grid: Option<Vec<f64>>,
    #[serde(default = "default_rungs")]
    pub moser_rungs: usize,
    #[serde(default = "default_m")]
    pub m_schedule: Vec<f64>,
    #[serde(default = "default_q")]
    pub q_grid: Vec<f64>,
}

impl Default for VerifyArgs {
    fn default() -> Self {
        VerifyArgs {
            studies: default_studies(),
            k_grid: None,
            moser_rungs: default_rungs(),
            m_schedule: default_m(),
            q_grid: default_q(),
        }
    }
}

fn default_studies() -> Vec<Study> {
    vec![Study::Energy, Study::Linf]
}

fn default_rungs() -> usize {
    8
}

fn default_m() -> Vec<f64> {
    vec![1.0, 10.0, 100.0, 1000.0]
}

fn default_q() -> Vec<f64> {
    vec![1.3]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    pub parameter: String,
    pub grid: Vec<f64>,
    pub operations: Vec<Operation>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Failure::Config(m) => Failure::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Config, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(e.to_string()))
    }

    pub fn spec(&self) -> Result<&ProblemSpec, Failure> {
        let spec = self.spec.as_ref().ok_or_else(|| Failure::Config("missing [spec] table".into()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn instance(&self) -> Result<&Instance, Failure> {
        self.instance
            .as_ref()
            .ok_or_else(|| Failure::Config("missing [instance] table".into()))
    }
}
