//! Caputo fractional derivative of a sampled function, L1 scheme.
//!
//! For u sampled at u_j = u(j h) the regularized (Caputo) derivative of
//! order beta in (0, 1) at t = k h is approximated by
//!
//!   D^beta u(t) ~ h^{-beta} / Gamma(2 - beta) *
//!                 sum_{j<k} [ (k-j)^{1-beta} - (k-j-1)^{1-beta} ] (u_{j+1} - u_j),
//!
//! the product-rectangle (piecewise-linear) quadrature of the convolution
//! with the initial value subtracted; exact for linear u, with O(h^{2-beta})
//! error for smooth u. At beta = 1 it degrades gracefully to an ordinary
//! difference-quotient derivative.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Caputo derivative of order `beta` at time `t`, from samples u(j h),
/// j = 0..samples.len(). `t` must sit on the sample grid (within rounding)
/// and deep enough into it for the scheme to apply.
pub fn caputo_derivative(samples: &[f64], h: f64, beta: f64, t: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter {
            name: "h",
            message: format!("need a positive step, got {h}"),
        });
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            message: format!("need beta in (0, 1], got {beta}"),
        });
    }
    let kf = t / h;
    let k = kf.round();
    if (kf - k).abs() > 1e-6 {
        return Err(Error::InsufficientSampling {
            detail: format!("t = {t} is not on the sample grid with step {h}"),
        });
    }
    let k = k as usize;
    if k < 1 || samples.len() < k + 1 {
        return Err(Error::InsufficientSampling {
            detail: format!(
                "need samples through index {k} (t = {t}, h = {h}), have {}",
                samples.len()
            ),
        });
    }

    if beta == 1.0 {
        // Plain derivative: centered where possible, one-sided at the end.
        return Ok(if k + 1 < samples.len() {
            (samples[k + 1] - samples[k - 1]) / (2.0 * h)
        } else if k >= 2 {
            (3.0 * samples[k] - 4.0 * samples[k - 1] + samples[k - 2]) / (2.0 * h)
        } else {
            (samples[k] - samples[k - 1]) / h
        });
    }

    let e = 1.0 - beta;
    let mut total = 0.0;
    let mut comp = 0.0;
    for j in 0..k {
        let m = (k - j) as f64;
        let w = m.powf(e) - (m - 1.0).powf(e);
        let term = w * (samples[j + 1] - samples[j]);
        let y = term - comp;
        let s = total + y;
        comp = (s - total) - y;
        total = s;
    }
    Ok(total * h.powf(-beta) / gamma(2.0 - beta))
}
