//! The correlated continuous-time random walk: an urn chain stepped by a
//! heavy-tailed renewal clock.
//!
//! For a chain of size n with c_n steps per unit time and a waiting-time
//! law of tail index beta, the walk's value at time t is the rescaled chain
//! after
//!
//!   floor( (c_n / n) N(n^(1/beta) t) )
//!
//! transitions, where N is the renewal count of the waiting times. As
//! n -> infinity these marginals converge to the time-fractional Pearson
//! diffusion started at x0; the spectral densities give the limit law.
//!
//! Ensembles fan out over a seeded counter RNG: path k always consumes the
//! stream (master_seed, k), so results are reproducible for a fixed
//! (spec, t, paths, seed) regardless of thread count, and doubling `paths`
//! extends an ensemble without disturbing the existing draws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::{initial_state, RescaledChainView};
use crate::error::{Error, Result};
use crate::heavy::{renewal_count_streaming, WaitingTimeModel};
use crate::pearson::{ChainParams, DiffusionKind};
use crate::rng::path_rng;

/// Full description of one walk: target diffusion, chain size, start
/// point, and waiting-time model (which carries the tail index).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtrwSpec {
    pub kind: DiffusionKind,
    pub cp: ChainParams,
    pub n: u64,
    pub x0: f64,
    pub waiting: WaitingTimeModel,
}

impl CtrwSpec {
    pub fn validate(&self) -> Result<()> {
        self.cp.validate(self.kind)?;
        self.waiting.validate()?;
        if self.n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                message: "chain size must be positive".into(),
            });
        }
        // Embedding must succeed; surfaces bad x0 before any simulation.
        initial_state(self.kind, &self.cp, self.n, self.x0)?;
        Ok(())
    }

    /// Chain transitions corresponding to `renewals` clock ticks:
    /// floor((c_n / n) renewals).
    pub fn steps_for_renewals(&self, renewals: u64) -> Result<u64> {
        let view = RescaledChainView::new(self.kind, self.cp, self.n)?;
        let per_tick = view.steps_per_unit_time() / self.n as f64;
        let steps = (per_tick * renewals as f64).floor();
        if steps > 4.0e18 {
            return Err(Error::InvalidParameter {
                name: "t",
                message: format!("step budget {steps} overflows"),
            });
        }
        Ok(steps as u64)
    }
}

/// One marginal draw of the walk at time t. Steps the chain lazily (O(1)
/// memory) exactly the budgeted number of transitions.
pub fn ctrw_value<R: rand::Rng + ?Sized>(spec: &CtrwSpec, t: f64, rng: &mut R) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t",
            message: format!("need finite t >= 0, got {t}"),
        });
    }
    spec.validate()?;
    let view = RescaledChainView::new(spec.kind, spec.cp, spec.n)?;
    let mut state = initial_state(spec.kind, &spec.cp, spec.n, spec.x0)?;
    let horizon = (spec.n as f64).powf(1.0 / spec.waiting.tail_exponent()) * t;
    let renewals = if t == 0.0 { 0 } else { renewal_count_streaming(&spec.waiting, horizon, rng) };
    let steps = spec.steps_for_renewals(renewals)?;
    for _ in 0..steps {
        state = view.step(state, rng)?;
    }
    Ok(view.rescale(state))
}

/// A simulated ensemble of walk values at a common time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub time: f64,
    pub samples: Vec<f64>,
    pub paths: u64,
    pub seed: u64,
    pub spec: CtrwSpec,
}

/// Simulate `paths` independent walk values at time t. Deterministic in
/// (spec, t, paths, master_seed); path k uses RNG stream k, so extending
/// `paths` preserves every existing sample. Failures carry the offending
/// path index; the lowest failing index is reported.
pub fn run_ensemble(
    spec: &CtrwSpec,
    t: f64,
    paths: u64,
    master_seed: u64,
) -> Result<EnsembleResult> {
    spec.validate()?;
    if paths == 0 {
        return Err(Error::InvalidParameter {
            name: "paths",
            message: "need at least one path".into(),
        });
    }
    let samples: Vec<f64> = (0..paths)
        .into_par_iter()
        .map(|idx| {
            let mut rng = path_rng(master_seed, idx);
            ctrw_value(spec, t, &mut rng)
                .map_err(|e| Error::PathFailure { path: idx, source: Box::new(e) })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EnsembleResult { time: t, samples, paths, seed: master_seed, spec: *spec })
}

/// Right-continuous empirical distribution of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyResult { what: "ensemble samples" });
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("samples must be comparable"));
        Ok(EmpiricalCdf { sorted })
    }

    /// F_hat(x) = #{samples <= x} / count.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Samples in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }
}

/// Empirical CDF of an ensemble's samples.
pub fn empirical_cdf(result: &EnsembleResult) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(&result.samples)
}
