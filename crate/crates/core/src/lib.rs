//! Fractional Pearson diffusion toolkit.
//!
//! Simulates correlated continuous-time random walks built from urn-scheme
//! Markov chains (Bernoulli-Laplace for OU, Wright-Fisher for CIR and
//! Jacobi) under heavy-tailed renewal clocks, and evaluates the limiting
//! time-fractional diffusion marginals through Mittag-Leffler spectral
//! expansions in the matching orthogonal polynomial bases.
//!
//! Layout:
//! - [`pearson`]: diffusion kinds, parameter maps, coefficients.
//! - [`chains`]: the two urn chains, rescaling, discrete generators.
//! - [`heavy`]: stable subordinator, inverse process, renewal counting.
//! - [`ctrw`]: the composed walk and seeded ensembles.
//! - [`spectral`]: Mittag-Leffler function, Gaussian quadrature, spectral
//!   transition densities, Caputo derivative.
//! - [`harness`]: statistics, study drivers, export, and the self-test
//!   gates used by the command-line tool.

pub mod chains;
pub mod ctrw;
pub mod error;
pub mod harness;
pub mod heavy;
pub mod pearson;
pub mod rng;
pub mod spectral;

pub use ctrw::{ctrw_value, empirical_cdf, run_ensemble, CtrwSpec, EmpiricalCdf, EnsembleResult};
pub use error::{Error, Result};
pub use heavy::{StabilityIndex, WaitingLaw, WaitingTimeModel};
pub use pearson::{ChainParams, DiffusionKind, DiffusionParams};
pub use spectral::{EigenSystem, SpectralDensity};
