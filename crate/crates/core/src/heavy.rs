//! Heavy-tailed waiting times, the stable subordinator, its inverse, and
//! renewal counting.
//!
//! Everything here is normalized to the subordinator D with Laplace
//! transform E[exp(-s D_1)] = exp(-s^beta): stable increments come from
//! Kanter's two-uniform representation, and the calibrated Pareto law
//! t0 U^(-1/beta) with t0 = Gamma(1-beta)^(-1/beta) sits in its domain of
//! attraction with the same normalization, so n^(-1/beta) T_n -> D_1 for
//! both. The inverse process E_t = inf{x : D_x > t} is read off a grid
//! path, and N_t = max{r : T_r <= t} counts renewals (ties included).

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Tail exponent beta, strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StabilityIndex(f64);

impl StabilityIndex {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                message: format!("need 0 < beta < 1, got {beta}"),
            });
        }
        Ok(StabilityIndex(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for StabilityIndex {
    type Error = Error;
    fn try_from(beta: f64) -> Result<Self> {
        StabilityIndex::new(beta)
    }
}

impl From<StabilityIndex> for f64 {
    fn from(b: StabilityIndex) -> f64 {
        b.0
    }
}

/// Waiting-time law for the renewal clock. `Unit` (deterministic waits of
/// one) is the degenerate beta -> 1 reference: it makes the walk collapse
/// to the plain time-changed chain and is used for sanity checks and as a
/// beta = 1 mode in studies; `beta` is ignored in that case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaitingLaw {
    Pareto,
    PositiveStable,
    Unit,
}

/// A calibrated waiting-time model: law, tail index, and scale. Use the
/// constructors; they pin the scale that keeps n^(-1/beta) T_n -> D_1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaitingTimeModel {
    pub beta: StabilityIndex,
    pub scale: f64,
    pub law: WaitingLaw,
}

impl WaitingTimeModel {
    /// Pareto waits t0 U^(-1/beta) with t0 = Gamma(1-beta)^(-1/beta).
    pub fn pareto(beta: StabilityIndex) -> Self {
        let b = beta.value();
        WaitingTimeModel { beta, scale: gamma(1.0 - b).powf(-1.0 / b), law: WaitingLaw::Pareto }
    }

    /// Exact one-sided stable waits distributed as D_1.
    pub fn positive_stable(beta: StabilityIndex) -> Self {
        WaitingTimeModel { beta, scale: 1.0, law: WaitingLaw::PositiveStable }
    }

    /// Deterministic unit waits (the beta -> 1 reference clock).
    pub fn unit() -> Self {
        WaitingTimeModel {
            beta: StabilityIndex(0.5),
            scale: 1.0,
            law: WaitingLaw::Unit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                message: format!("need a positive finite scale, got {}", self.scale),
            });
        }
        Ok(())
    }

    /// The exponent governing the n^(1/beta) clock rescaling; 1 for `Unit`.
    pub fn tail_exponent(&self) -> f64 {
        match self.law {
            WaitingLaw::Unit => 1.0,
            _ => self.beta.value(),
        }
    }

    /// Draw one waiting time.
    pub fn sample_wait<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.law {
            WaitingLaw::Pareto => {
                let mut u: f64 = rng.random();
                while u == 0.0 {
                    u = rng.random();
                }
                self.scale * u.powf(-1.0 / self.beta.value())
            }
            WaitingLaw::PositiveStable => {
                self.scale * sample_stable_subordinator_increment(self.beta, 1.0, rng)
            }
            WaitingLaw::Unit => self.scale,
        }
    }
}

/// One increment D_{t+dt} - D_t of the standard beta-stable subordinator,
/// equal in law to dt^(1/beta) S with S Kanter's two-uniform draw:
///
///   S = sin(beta u) sin((1-beta) u)^w / (sin(u)^(1/beta) W^w),
///   u = pi U, w = (1-beta)/beta, W ~ Exp(1).
///
/// Always strictly positive.
pub fn sample_stable_subordinator_increment<R: Rng + ?Sized>(
    beta: StabilityIndex,
    dt: f64,
    rng: &mut R,
) -> f64 {
    debug_assert!(dt > 0.0, "increment width must be positive");
    let b = beta.value();
    let omega = (1.0 - b) / b;
    let mut u: f64 = rng.random();
    while u == 0.0 {
        u = rng.random();
    }
    let theta = std::f64::consts::PI * u;
    let mut w: f64 = rng.sample(Exp1);
    while w == 0.0 {
        w = rng.sample(Exp1);
    }
    let s = (b * theta).sin() * ((1.0 - b) * theta).sin().powf(omega)
        / (theta.sin().powf(1.0 / b) * w.powf(omega));
    dt.powf(1.0 / b) * s
}

/// A subordinator trajectory sampled on the grid 0, h, 2h, ...;
/// values[k] = D(k h), values[0] = 0, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatorPath {
    pub grid_step: f64,
    pub values: Vec<f64>,
}

impl SubordinatorPath {
    /// Simulate `steps` increments of width h (so values has steps + 1
    /// entries).
    pub fn simulate<R: Rng + ?Sized>(
        beta: StabilityIndex,
        h: f64,
        steps: u64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "grid_step",
                message: format!("need a positive finite grid step, got {h}"),
            });
        }
        let mut values = Vec::with_capacity(steps as usize + 1);
        let mut acc = 0.0;
        values.push(acc);
        for _ in 0..steps {
            acc += sample_stable_subordinator_increment(beta, h, rng);
            values.push(acc);
        }
        Ok(SubordinatorPath { grid_step: h, values })
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    /// Continue this trajectory by `steps` further increments. Extending
    /// (rather than resimulating longer) keeps inverse queries unbiased:
    /// a fresh, longer path would silently drop the large excursions that
    /// made the original one too short.
    pub fn extend<R: Rng + ?Sized>(&mut self, beta: StabilityIndex, steps: u64, rng: &mut R) {
        let mut acc = self.last();
        self.values.reserve(steps as usize);
        for _ in 0..steps {
            acc += sample_stable_subordinator_increment(beta, self.grid_step, rng);
            self.values.push(acc);
        }
    }
}

/// Grid inverse of the subordinator: x* = h min{k : D(k h) > t}, an upper
/// bracket with E_t in [x* - h, x*]. Fails with the time deficit when the
/// path never climbs above t (caller simulates a longer path).
pub fn inverse_subordinator(path: &SubordinatorPath, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            message: format!("need t >= 0, got {t}"),
        });
    }
    // First index with D(k h) > t; values are increasing so the predicate
    // "<= t" is monotone and partition_point applies.
    let k = path.values.partition_point(|&v| v <= t);
    if k == path.values.len() {
        return Err(Error::PathTooShort { deficit: t - path.last() });
    }
    Ok(path.grid_step * k as f64)
}

/// A renewal sequence: partial sums T_0 = 0 <= T_1 <= ... <= T_count and
/// the horizon T_count up to which counting queries are answerable.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalSample {
    pub partial_sums: Vec<f64>,
    pub horizon: f64,
}

/// Draw `count` waiting times and accumulate their partial sums. The sums
/// use plain sequential addition, matching `renewal_count_streaming`
/// bit for bit on the same draw sequence.
pub fn sample_waiting_times<R: Rng + ?Sized>(
    model: &WaitingTimeModel,
    count: u64,
    rng: &mut R,
) -> RenewalSample {
    let mut partial_sums = Vec::with_capacity(count as usize + 1);
    let mut acc = 0.0f64;
    partial_sums.push(acc);
    for _ in 0..count {
        acc += model.sample_wait(rng);
        partial_sums.push(acc);
    }
    RenewalSample { horizon: acc, partial_sums }
}

/// N_t = max{r : T_r <= t}, ties counted, by binary search. Querying past
/// the realized horizon is an error rather than a truncated count.
pub fn renewal_count(sample: &RenewalSample, t: f64) -> Result<u64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t",
            message: format!("need t >= 0, got {t}"),
        });
    }
    if t > sample.horizon {
        return Err(Error::HorizonExceeded { t, horizon: sample.horizon });
    }
    let k = sample.partial_sums.partition_point(|&v| v <= t);
    Ok((k - 1) as u64)
}

/// Streaming renewal count to a horizon without materializing the sums.
pub fn renewal_count_streaming<R: Rng + ?Sized>(
    model: &WaitingTimeModel,
    horizon: f64,
    rng: &mut R,
) -> u64 {
    let mut acc = 0.0f64;
    let mut count = 0u64;
    loop {
        acc += model.sample_wait(rng);
        if acc > horizon {
            return count;
        }
        count += 1;
    }
}
