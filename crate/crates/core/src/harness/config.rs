//! Declarative experiment configuration: one TOML file describes a study
//! completely, so any result directory can be reproduced from its config
//! copy and seed alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heavy::{StabilityIndex, WaitingLaw, WaitingTimeModel};
use crate::pearson::{ChainParams, DiffusionKind};

/// The six runnable studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    GeneratorConvergence,
    Stationarity,
    SubordinatorLaplace,
    InverseSubordinator,
    CtrwMarginal,
    DensityConsistency,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::GeneratorConvergence => "generator_convergence",
            StudyKind::Stationarity => "stationarity",
            StudyKind::SubordinatorLaplace => "subordinator_laplace",
            StudyKind::InverseSubordinator => "inverse_subordinator",
            StudyKind::CtrwMarginal => "ctrw_marginal",
            StudyKind::DensityConsistency => "density_consistency",
        }
    }
}

impl std::fmt::Display for StudyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn default_schema_version() -> u32 {
    1
}

/// Full study description. Unknown keys are rejected so typos fail loudly.
///
/// Field notes:
/// - `beta` is the waiting-time tail index; `beta = 1` is allowed only with
///   `waiting_law = "unit"` (the deterministic reference clock) and vice
///   versa.
/// - `x0` defaults per kind (OU 0, Jacobi 1/2, CIR b/a) when omitted.
/// - `order` is the spectral truncation; when omitted each study picks its
///   documented default.
/// - for `stationarity`, `paths` is read as the chain step count.
/// - `times` is overloaded per study: observation times for `ctrw_marginal`
///   and `density_consistency`, Laplace probe points for
///   `subordinator_laplace`, inversion horizons for `inverse_subordinator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub study: StudyKind,
    pub kind: DiffusionKind,
    pub cp: ChainParams,
    pub beta: f64,
    #[serde(default = "WaitingLawChoice::default")]
    pub waiting_law: WaitingLawChoice,
    pub n_list: Vec<u64>,
    pub paths: u64,
    pub times: Vec<f64>,
    pub seed: u64,
    pub output_dir: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

/// Waiting-law selector mirrored into config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WaitingLawChoice {
    Pareto,
    #[default]
    PositiveStable,
    Unit,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config { message: e.to_string() })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(Error::Config {
                message: format!("unsupported schema_version {}", self.schema_version),
            });
        }
        self.cp.validate(self.kind).map_err(|e| Error::Config { message: e.to_string() })?;
        if self.n_list.is_empty() {
            return Err(Error::Config { message: "n_list must be nonempty".into() });
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config { message: "n_list must be strictly ascending".into() });
        }
        if self.n_list[0] == 0 {
            return Err(Error::Config { message: "chain sizes must be positive".into() });
        }
        match self.waiting_law {
            WaitingLawChoice::Unit => {
                if self.beta != 1.0 {
                    return Err(Error::Config {
                        message: format!(
                            "waiting_law = \"unit\" is the beta = 1 reference clock; got beta = {}",
                            self.beta
                        ),
                    });
                }
            }
            _ => {
                if self.beta == 1.0 {
                    return Err(Error::Config {
                        message: "beta = 1 requires waiting_law = \"unit\" (the classical clock)"
                            .into(),
                    });
                }
                StabilityIndex::new(self.beta)
                    .map_err(|e| Error::Config { message: e.to_string() })?;
            }
        }
        if self.paths == 0 {
            return Err(Error::Config { message: "paths must be positive".into() });
        }
        if self.times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::Config { message: "times must be finite and nonnegative".into() });
        }
        let needs_times = matches!(
            self.study,
            StudyKind::CtrwMarginal
                | StudyKind::DensityConsistency
                | StudyKind::SubordinatorLaplace
                | StudyKind::InverseSubordinator
        );
        if needs_times && self.times.is_empty() {
            return Err(Error::Config {
                message: format!("study {} needs a nonempty times list", self.study),
            });
        }
        if let Some(x0) = self.x0 {
            if !self.kind.state_space().contains(x0) {
                return Err(Error::Config {
                    message: format!("x0 = {x0} outside the {} state space", self.kind.name()),
                });
            }
        }
        if self.order == Some(0) {
            return Err(Error::Config { message: "order must be positive".into() });
        }
        Ok(())
    }

    /// Start point: configured x0, or the kind's natural default
    /// (OU 0, Jacobi 1/2, CIR b/a).
    pub fn resolved_x0(&self) -> f64 {
        self.x0.unwrap_or(match self.kind {
            DiffusionKind::Ou => 0.0,
            DiffusionKind::Jacobi => 0.5,
            DiffusionKind::Cir => self.cp.b / self.cp.a,
        })
    }

    /// Spectral truncation order: configured, or the study default
    /// (60 for Jacobi, 100 otherwise, where Laguerre/Hermite tails decay
    /// more slowly).
    pub fn resolved_order(&self) -> usize {
        self.order.unwrap_or(match self.kind {
            DiffusionKind::Jacobi => 60,
            _ => 100,
        })
    }

    /// Canonical serialization: the parsed config re-emitted with fields in
    /// declaration order and defaults made explicit. Two files describing the
    /// same experiment canonicalize to identical bytes, so the provenance
    /// hash and the config copy in a run directory do not depend on the
    /// author's formatting.
    pub fn canonical_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config { message: e.to_string() })
    }

    /// The calibrated waiting-time model this config selects.
    pub fn waiting_model(&self) -> Result<WaitingTimeModel> {
        Ok(match self.waiting_law {
            WaitingLawChoice::Unit => WaitingTimeModel::unit(),
            WaitingLawChoice::Pareto => WaitingTimeModel::pareto(StabilityIndex::new(self.beta)?),
            WaitingLawChoice::PositiveStable => {
                WaitingTimeModel::positive_stable(StabilityIndex::new(self.beta)?)
            }
        })
    }
}

impl WaitingLawChoice {
    pub fn as_law(self) -> WaitingLaw {
        match self {
            WaitingLawChoice::Pareto => WaitingLaw::Pareto,
            WaitingLawChoice::PositiveStable => WaitingLaw::PositiveStable,
            WaitingLawChoice::Unit => WaitingLaw::Unit,
        }
    }
}
