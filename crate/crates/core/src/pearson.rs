//! The three light-tailed Pearson diffusion families and their chain maps.
//!
//! An Ornstein-Uhlenbeck (OU), Cox-Ingersoll-Ross (CIR), or Jacobi diffusion
//! is described here twice: by the raw urn-chain parameters (theta, a, b, d)
//! that drive the discrete models, and by the derived SDE parameters
//! (drift_rate, mean, vol_scale) that the spectral machinery consumes.
//! `derive_params` is the bridge between the two.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Pearson family. State spaces: OU on all of R, CIR on [0, inf),
/// Jacobi on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffusionKind {
    Ou,
    Cir,
    Jacobi,
}

impl DiffusionKind {
    pub fn name(self) -> &'static str {
        match self {
            DiffusionKind::Ou => "ou",
            DiffusionKind::Cir => "cir",
            DiffusionKind::Jacobi => "jacobi",
        }
    }

    pub fn state_space(self) -> StateSpace {
        match self {
            DiffusionKind::Ou => StateSpace {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            },
            DiffusionKind::Cir => StateSpace {
                lower: 0.0,
                upper: f64::INFINITY,
            },
            DiffusionKind::Jacobi => StateSpace {
                lower: 0.0,
                upper: 1.0,
            },
        }
    }
}

impl std::fmt::Display for DiffusionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DiffusionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ou" => Ok(DiffusionKind::Ou),
            "cir" => Ok(DiffusionKind::Cir),
            "jacobi" => Ok(DiffusionKind::Jacobi),
            other => Err(Error::InvalidParameter {
                name: "kind",
                message: format!("expected ou, cir, or jacobi, got `{other}`"),
            }),
        }
    }
}

/// State-space interval with explicit infinite endpoints where unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpace {
    pub lower: f64,
    pub upper: f64,
}

impl StateSpace {
    /// Closed containment (boundary points allowed).
    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && self.lower <= x && x <= self.upper
    }

    /// Strict interior.
    pub fn interior(&self, x: f64) -> bool {
        x.is_finite() && self.lower < x && x < self.upper
    }
}

/// Raw urn-chain parameters.
///
/// theta is the time-scaling rate. For OU, a and b locate and scale the
/// lattice (a nonzero, b free). For CIR and Jacobi, a and b are the mutation
/// rates (both positive). d is the CIR state-scaling exponent, in (0, 1),
/// and must be absent for the other kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

impl ChainParams {
    pub fn validate(&self, kind: DiffusionKind) -> Result<()> {
        let bad = |name: &'static str, message: String| Error::InvalidParameter { name, message };
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(bad("theta", format!("must be positive, got {}", self.theta)));
        }
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(bad("a", format!("a and b must be finite, got a={}, b={}", self.a, self.b)));
        }
        match kind {
            DiffusionKind::Ou => {
                if self.a == 0.0 {
                    return Err(bad("a", "must be nonzero for ou".into()));
                }
                if self.d.is_some() {
                    return Err(bad("d", "only valid for cir".into()));
                }
            }
            DiffusionKind::Jacobi => {
                if self.a <= 0.0 || self.b <= 0.0 {
                    return Err(bad("a", format!("a and b must be positive for jacobi, got a={}, b={}", self.a, self.b)));
                }
                if self.d.is_some() {
                    return Err(bad("d", "only valid for cir".into()));
                }
            }
            DiffusionKind::Cir => {
                if self.a <= 0.0 || self.b <= 0.0 {
                    return Err(bad("a", format!("a and b must be positive for cir, got a={}, b={}", self.a, self.b)));
                }
                match self.d {
                    Some(d) if d.is_finite() && 0.0 < d && d < 1.0 => {}
                    other => {
                        return Err(bad("d", format!("must lie in (0, 1) for cir, got {other:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The CIR exponent, after validation has established it exists.
    pub(crate) fn d_cir(&self) -> f64 {
        self.d.expect("validated cir params carry d")
    }
}

/// Derived SDE parameters.
///
/// The three fields are overloaded per family:
/// OU     drift_rate = tau,   mean = -b/a,    vol_scale = sigma = 1/(a sqrt 2)
/// CIR    drift_rate = theta, mean = b/a,     vol_scale = 1/a
/// Jacobi drift_rate = gamma = theta (a+b), mean = b/(a+b), vol_scale = delta = 1/(2(a+b))
///
/// Everything downstream (drift, squared diffusion, stationary density,
/// eigenvalues) is a function of these three numbers and the kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    pub drift_rate: f64,
    pub mean: f64,
    pub vol_scale: f64,
}

/// Map chain parameters to SDE parameters.
///
/// For OU the sign of vol_scale follows the sign of a; only vol_scale^2
/// enters any downstream formula, so the output law matches the |a| case.
pub fn derive_params(kind: DiffusionKind, cp: &ChainParams) -> Result<DiffusionParams> {
    cp.validate(kind)?;
    Ok(match kind {
        DiffusionKind::Ou => DiffusionParams {
            drift_rate: cp.theta,
            mean: -cp.b / cp.a,
            vol_scale: 1.0 / (cp.a * std::f64::consts::SQRT_2),
        },
        DiffusionKind::Cir => DiffusionParams {
            drift_rate: cp.theta,
            mean: cp.b / cp.a,
            vol_scale: 1.0 / cp.a,
        },
        DiffusionKind::Jacobi => DiffusionParams {
            drift_rate: cp.theta * (cp.a + cp.b),
            mean: cp.b / (cp.a + cp.b),
            vol_scale: 1.0 / (2.0 * (cp.a + cp.b)),
        },
    })
}

fn check_in_space(kind: DiffusionKind, x: f64) -> Result<()> {
    if kind.state_space().contains(x) {
        Ok(())
    } else {
        Err(Error::OutsideStateSpace { kind: kind.name(), x })
    }
}

fn check_interior(kind: DiffusionKind, x: f64) -> Result<()> {
    if kind.state_space().interior(x) {
        Ok(())
    } else {
        Err(Error::OutsideStateSpace { kind: kind.name(), x })
    }
}

/// Drift coefficient mu(x). All three families revert linearly to the mean.
pub fn drift(kind: DiffusionKind, p: &DiffusionParams, x: f64) -> Result<f64> {
    check_in_space(kind, x)?;
    Ok(drift_unchecked(p, x))
}

pub(crate) fn drift_unchecked(p: &DiffusionParams, x: f64) -> f64 {
    -p.drift_rate * (x - p.mean)
}

/// Squared diffusion coefficient sigma^2(x). Degenerates to 0 exactly at the
/// Jacobi boundaries and at the CIR origin.
pub fn diffusion_sq(kind: DiffusionKind, p: &DiffusionParams, x: f64) -> Result<f64> {
    check_in_space(kind, x)?;
    Ok(diffusion_sq_unchecked(kind, p, x))
}

pub(crate) fn diffusion_sq_unchecked(kind: DiffusionKind, p: &DiffusionParams, x: f64) -> f64 {
    match kind {
        DiffusionKind::Ou => 2.0 * p.drift_rate * p.vol_scale * p.vol_scale,
        DiffusionKind::Cir => p.drift_rate * p.vol_scale * x,
        DiffusionKind::Jacobi => 2.0 * p.drift_rate * p.vol_scale * x * (1.0 - x),
    }
}

/// A scalar function with first and second derivatives.
///
/// Implementors may supply exact derivatives; the defaults fall back to
/// centered finite differences with step max(1e-5, 1e-5 |x|), adequate for
/// C3 test functions at the tolerances used here.
pub trait C2Fn {
    fn value(&self, x: f64) -> f64;

    fn d1(&self, x: f64) -> f64 {
        let h = fd_step(x);
        (self.value(x + h) - self.value(x - h)) / (2.0 * h)
    }

    fn d2(&self, x: f64) -> f64 {
        let h = fd_step(x);
        (self.value(x + h) - 2.0 * self.value(x) + self.value(x - h)) / (h * h)
    }
}

/// Finite-difference step used by the `C2Fn` defaults.
pub fn fd_step(x: f64) -> f64 {
    (1e-5f64).max(1e-5 * x.abs())
}

/// Wrap a plain closure as a `C2Fn` with finite-difference derivatives.
pub struct FdFn<F>(pub F);

impl<F: Fn(f64) -> f64> C2Fn for FdFn<F> {
    fn value(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Apply the infinitesimal generator: mu(x) f'(x) + (1/2) sigma^2(x) f''(x).
pub fn generator_apply<F: C2Fn + ?Sized>(
    kind: DiffusionKind,
    p: &DiffusionParams,
    f: &F,
    x: f64,
) -> Result<f64> {
    check_in_space(kind, x)?;
    Ok(drift_unchecked(p, x) * f.d1(x) + 0.5 * diffusion_sq_unchecked(kind, p, x) * f.d2(x))
}

/// Stationary density m(x): Normal for OU, Gamma for CIR, Beta for Jacobi,
/// in the parameterizations fixed by `derive_params`. Valid on the open
/// interior of the state space.
pub fn stationary_density(kind: DiffusionKind, p: &DiffusionParams, x: f64) -> Result<f64> {
    check_interior(kind, x)?;
    Ok(stationary_density_unchecked(kind, p, x))
}

pub(crate) fn stationary_density_unchecked(kind: DiffusionKind, p: &DiffusionParams, x: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    // a * ln(x) with the 0 * ln(0) = 0 convention, so boundary evaluation
    // yields the correct limit for every shape.
    fn xlny(a: f64, x: f64) -> f64 {
        if a == 0.0 {
            0.0
        } else {
            a * x.ln()
        }
    }
    match kind {
        DiffusionKind::Ou => {
            let sig = p.vol_scale.abs();
            let z = (x - p.mean) / sig;
            (-0.5 * z * z).exp() / (sig * (2.0 * std::f64::consts::PI).sqrt())
        }
        DiffusionKind::Cir => {
            // Gamma with shape 2b and rate 2a, written in chain terms.
            let shape = 2.0 * p.mean / p.vol_scale;
            let rate = 2.0 / p.vol_scale;
            (shape * rate.ln() + xlny(shape - 1.0, x) - rate * x - ln_gamma(shape)).exp()
        }
        DiffusionKind::Jacobi => {
            // Beta(2b, 2a) in chain terms: p = mean/delta, q = (1-mean)/delta.
            let pp = p.mean / p.vol_scale;
            let qq = (1.0 - p.mean) / p.vol_scale;
            let ln_b = ln_gamma(pp) + ln_gamma(qq) - ln_gamma(pp + qq);
            (xlny(pp - 1.0, x) + xlny(qq - 1.0, 1.0 - x) - ln_b).exp()
        }
    }
}
