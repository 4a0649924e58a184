//! Gaussian quadrature and orthonormal polynomial systems for the three
//! stationary weights (Normal, Gamma, Beta).
//!
//! Nodes come from the symmetric tridiagonal (Jacobi) matrix of the monic
//! recurrence, then get polished with a few Newton steps on the orthonormal
//! polynomial q_m. Weights are Christoffel numbers 1/K_m(x, x). The more
//! common eigenvector-squared weights are avoided on purpose: at m = 200 the
//! Gamma weight's far-tail nodes carry weights near 1e-300 and the eigenvector
//! route loses them to roundoff, which corrupts Gram matrices downstream.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::pearson::{DiffusionKind, DiffusionParams};

/// Monic three-term recurrence coefficients for the normalized stationary
/// weight of `kind`: p_{k+1}(x) = (x - alpha_k) p_k(x) - beta_k p_{k-1}(x),
/// with beta_0 = 1 holding the (normalized) total mass.
///
/// Returns (alpha, beta), each of length nmax + 1.
pub fn recurrence(kind: DiffusionKind, p: &DiffusionParams, nmax: usize) -> (Vec<f64>, Vec<f64>) {
    let mut al = vec![0.0; nmax + 1];
    let mut be = vec![0.0; nmax + 1];
    be[0] = 1.0;
    match kind {
        DiffusionKind::Ou => {
            // Hermite, shifted and scaled: Normal(mean, sigma^2).
            let sig2 = p.vol_scale * p.vol_scale;
            for k in 0..=nmax {
                al[k] = p.mean;
                if k >= 1 {
                    be[k] = k as f64 * sig2;
                }
            }
        }
        DiffusionKind::Cir => {
            // Laguerre: Gamma with shape s and rate r.
            let s = 2.0 * p.mean / p.vol_scale;
            let r = 2.0 / p.vol_scale;
            for k in 0..=nmax {
                let kf = k as f64;
                al[k] = (2.0 * kf + s) / r;
                if k >= 1 {
                    be[k] = kf * (kf + s - 1.0) / (r * r);
                }
            }
        }
        DiffusionKind::Jacobi => {
            // Jacobi on [-1, 1] with exponents (A, B), mapped to Beta(p, q)
            // on (0, 1) via x -> (1 + x) / 2.
            let pp = p.mean / p.vol_scale;
            let qq = (1.0 - p.mean) / p.vol_scale;
            let aa = qq - 1.0;
            let bb = pp - 1.0;
            let c = aa + bb;
            al[0] = (1.0 + (bb - aa) / (c + 2.0)) / 2.0;
            for k in 1..=nmax {
                let kf = k as f64;
                let two_kc = 2.0 * kf + c;
                al[k] = (1.0 + (bb * bb - aa * aa) / (two_kc * (two_kc + 2.0))) / 2.0;
                be[k] = if k == 1 {
                    (aa + 1.0) * (bb + 1.0) / ((c + 2.0) * (c + 2.0) * (c + 3.0))
                } else {
                    kf * (kf + aa) * (kf + bb) * (kf + c)
                        / (two_kc * two_kc * (two_kc * two_kc - 1.0))
                };
            }
        }
    }
    (al, be)
}

/// An m-point Gauss rule for a normalized weight: sum(weights) = 1.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Build the m-point Gauss rule from monic recurrence coefficients.
/// Requires alpha.len() >= m and beta.len() >= m + 1.
pub fn gauss_rule(alpha: &[f64], beta: &[f64], m: usize) -> Result<QuadRule> {
    if m == 0 || alpha.len() < m || beta.len() < m + 1 {
        return Err(Error::InvalidParameter {
            name: "quadrature_order",
            message: format!(
                "need alpha.len() >= m >= 1 and beta.len() >= m + 1, got m={m}, alpha={}, beta={}",
                alpha.len(),
                beta.len()
            ),
        });
    }
    for (k, &b) in beta.iter().enumerate().take(m + 1).skip(1) {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter {
                name: "recurrence",
                message: format!("beta[{k}] = {b} must be positive and finite"),
            });
        }
    }

    let seeds = tridiag_eigenvalues(&alpha[..m], &beta[1..m]);
    let b: Vec<f64> = beta.iter().map(|&v| v.sqrt()).collect();

    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    let mut q = vec![0.0; m + 1];
    let mut dq = vec![0.0; m + 1];
    for &seed in &seeds {
        let mut x = seed;
        // Newton on q_m. Four steps suffice from tridiagonal seeds.
        for _ in 0..4 {
            q[0] = 1.0;
            dq[0] = 0.0;
            q[1] = (x - alpha[0]) / b[1];
            dq[1] = 1.0 / b[1];
            for j in 1..m {
                q[j + 1] = ((x - alpha[j]) * q[j] - b[j] * q[j - 1]) / b[j + 1];
                dq[j + 1] = ((x - alpha[j]) * dq[j] + q[j] - b[j] * dq[j - 1]) / b[j + 1];
            }
            if dq[m] == 0.0 || !q[m].is_finite() {
                break;
            }
            let step = q[m] / dq[m];
            x -= step;
            if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        // Christoffel weight: 1 / sum_{j < m} q_j(x)^2. An overflowing sum
        // means the true weight is below f64 range; clamp it to zero.
        q[0] = 1.0;
        if m > 1 {
            q[1] = (x - alpha[0]) / b[1];
            for j in 1..m - 1 {
                q[j + 1] = ((x - alpha[j]) * q[j] - b[j] * q[j - 1]) / b[j + 1];
            }
        }
        let ksum: f64 = q[..m].iter().map(|&v| v * v).sum();
        nodes.push(x);
        weights.push(if ksum.is_finite() { 1.0 / ksum } else { 0.0 });
    }
    Ok(QuadRule { nodes, weights })
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// squared off-diagonal `off_sq`, ascending.
fn tridiag_eigenvalues(diag: &[f64], off_sq: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        mat[(i, i)] = diag[i];
        if i + 1 < m {
            let e = off_sq[i].sqrt();
            mat[(i, i + 1)] = e;
            mat[(i + 1, i)] = e;
        }
    }
    let mut ev: Vec<f64> = mat.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    ev
}

/// Orthonormal polynomial values and first two derivatives at one point.
#[derive(Debug, Clone)]
pub struct OrthoDerivs {
    pub q: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// Evaluate q_0..q_n and their first two derivatives at x, from the monic
/// recurrence (alpha, beta). Requires alpha.len() >= n and beta.len() >= n + 1
/// (n >= 1; for n = 0 only beta[0] is touched).
pub fn ortho_eval(alpha: &[f64], beta: &[f64], n: usize, x: f64) -> OrthoDerivs {
    let mut q = vec![0.0; n + 1];
    let mut d1 = vec![0.0; n + 1];
    let mut d2 = vec![0.0; n + 1];
    q[0] = 1.0;
    if n >= 1 {
        let b1 = beta[1].sqrt();
        q[1] = (x - alpha[0]) / b1;
        d1[1] = 1.0 / b1;
        let mut bk = b1;
        for k in 1..n {
            let bk1 = beta[k + 1].sqrt();
            q[k + 1] = ((x - alpha[k]) * q[k] - bk * q[k - 1]) / bk1;
            d1[k + 1] = ((x - alpha[k]) * d1[k] + q[k] - bk * d1[k - 1]) / bk1;
            d2[k + 1] = ((x - alpha[k]) * d2[k] + 2.0 * d1[k] - bk * d2[k - 1]) / bk1;
            bk = bk1;
        }
    }
    OrthoDerivs { q, d1, d2 }
}

/// Values-only evaluation into a caller buffer of length n + 1, with
/// pre-squared-rooted recurrence norms `bsqrt` (bsqrt[k] = sqrt(beta[k])).
pub(crate) fn ortho_values_into(alpha: &[f64], bsqrt: &[f64], n: usize, x: f64, q: &mut [f64]) {
    debug_assert!(q.len() == n + 1);
    q[0] = 1.0;
    if n >= 1 {
        q[1] = (x - alpha[0]) / bsqrt[1];
        for k in 1..n {
            q[k + 1] = ((x - alpha[k]) * q[k] - bsqrt[k] * q[k - 1]) / bsqrt[k + 1];
        }
    }
}

/// 12-point Gauss-Legendre rule on [-1, 1].
pub(crate) const GL12: [(f64, f64); 12] = [
    (-0.9815606342467192, 0.04717533638651183),
    (-0.9041172563704749, 0.10693932599531843),
    (-0.7699026741943047, 0.16007832854334622),
    (-0.5873179542866175, 0.20316742672306592),
    (-0.3678314989981802, 0.23349253653835481),
    (-0.12523340851146892, 0.24914704581340277),
    (0.12523340851146892, 0.24914704581340277),
    (0.3678314989981802, 0.23349253653835481),
    (0.5873179542866175, 0.20316742672306592),
    (0.7699026741943047, 0.16007832854334622),
    (0.9041172563704749, 0.10693932599531843),
    (0.9815606342467192, 0.04717533638651183),
];

/// 5-point Gauss-Legendre rule on [-1, 1].
pub(crate) const GL5: [(f64, f64); 5] = [
    (-0.9061798459386640, 0.23692688505618908),
    (-0.5384693101056831, 0.47862867049936647),
    (0.0, 0.5688888888888889),
    (0.5384693101056831, 0.47862867049936647),
    (0.9061798459386640, 0.23692688505618908),
];

/// Integrate f over [a, b] with `panels` equal panels of 12-point
/// Gauss-Legendre. Exact for polynomials of degree <= 23 per panel.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    let mut comp = 0.0;
    for i in 0..panels {
        let lo = a + i as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        for &(xi, wi) in GL12.iter() {
            let term = wi * half * f(mid + half * xi);
            let y = term - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn moments(rule: &QuadRule, k: u32) -> f64 {
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * x.powi(k as i32))
            .sum()
    }

    #[test]
    fn hermite_recurrence_coefficients() {
        let p = DiffusionParams { drift_rate: 1.0, mean: 0.0, vol_scale: 1.0 };
        let (al, be) = recurrence(DiffusionKind::Ou, &p, 6);
        for k in 0..=6 {
            assert_abs_diff_eq!(al[k], 0.0);
        }
        assert_abs_diff_eq!(be[0], 1.0);
        for k in 1..=6 {
            assert_abs_diff_eq!(be[k], k as f64);
        }
    }

    #[test]
    fn normal_rule_moments() {
        let p = DiffusionParams { drift_rate: 1.0, mean: 0.0, vol_scale: 1.0 };
        let (al, be) = recurrence(DiffusionKind::Ou, &p, 30);
        let rule = gauss_rule(&al, &be, 20).unwrap();
        assert_abs_diff_eq!(moments(&rule, 0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(moments(&rule, 1), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(moments(&rule, 2), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(moments(&rule, 4), 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(moments(&rule, 6), 15.0, epsilon = 1e-11);
    }

    #[test]
    fn gamma_rule_moments() {
        // CIR acceptance parameters: Gamma with shape 8, rate 4.
        let p = DiffusionParams { drift_rate: 1.0, mean: 2.0, vol_scale: 0.5 };
        let (al, be) = recurrence(DiffusionKind::Cir, &p, 60);
        let rule = gauss_rule(&al, &be, 40).unwrap();
        assert_abs_diff_eq!(moments(&rule, 0), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(moments(&rule, 1), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(moments(&rule, 2), 4.5, epsilon = 1e-12);
        assert!(rule.nodes.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn beta_rule_moments() {
        // Jacobi acceptance parameters: Beta(2, 2).
        let p = DiffusionParams { drift_rate: 2.0, mean: 0.5, vol_scale: 0.25 };
        let (al, be) = recurrence(DiffusionKind::Jacobi, &p, 60);
        let rule = gauss_rule(&al, &be, 40).unwrap();
        assert_abs_diff_eq!(moments(&rule, 0), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(moments(&rule, 1), 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(moments(&rule, 2), 0.3, epsilon = 1e-13);
        assert!(rule.nodes.iter().all(|&x| 0.0 < x && x < 1.0));
    }

    #[test]
    fn high_order_rule_stays_normalized() {
        // m = 200 is the production order; far-tail Gamma weights underflow
        // and must come back as exact zeros, not garbage.
        let p = DiffusionParams { drift_rate: 1.0, mean: 2.0, vol_scale: 0.5 };
        let (al, be) = recurrence(DiffusionKind::Cir, &p, 220);
        let rule = gauss_rule(&al, &be, 200).unwrap();
        assert_abs_diff_eq!(moments(&rule, 0), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(moments(&rule, 1), 2.0, epsilon = 1e-12);
        assert!(rule.weights.iter().all(|&w| w >= 0.0 && w.is_finite()));
    }

    #[test]
    fn ortho_eval_matches_closed_hermite() {
        // Orthonormal Hermite against explicit low orders for N(0, 1):
        // q2 = (x^2 - 1)/sqrt(2), q3 = (x^3 - 3x)/sqrt(6).
        let p = DiffusionParams { drift_rate: 1.0, mean: 0.0, vol_scale: 1.0 };
        let (al, be) = recurrence(DiffusionKind::Ou, &p, 5);
        for &x in &[-1.7, 0.0, 0.4, 2.3] {
            let od = ortho_eval(&al, &be, 3, x);
            assert_abs_diff_eq!(od.q[0], 1.0);
            assert_abs_diff_eq!(od.q[1], x, epsilon = 1e-14);
            assert_abs_diff_eq!(od.q[2], (x * x - 1.0) / 2f64.sqrt(), epsilon = 1e-13);
            assert_abs_diff_eq!(od.q[3], (x * x * x - 3.0 * x) / 6f64.sqrt(), epsilon = 1e-13);
            assert_abs_diff_eq!(od.d1[2], 2.0 * x / 2f64.sqrt(), epsilon = 1e-13);
            assert_abs_diff_eq!(od.d2[3], 6.0 * x / 6f64.sqrt(), epsilon = 1e-13);
        }
    }

    #[test]
    fn ortho_values_agree_with_full_eval() {
        let p = DiffusionParams { drift_rate: 2.0, mean: 0.5, vol_scale: 0.25 };
        let (al, be) = recurrence(DiffusionKind::Jacobi, &p, 12);
        let bsqrt: Vec<f64> = be.iter().map(|&b| b.sqrt()).collect();
        let mut q = vec![0.0; 11];
        for &x in &[0.02, 0.5, 0.97] {
            ortho_values_into(&al, &bsqrt, 10, x, &mut q);
            let od = ortho_eval(&al, &be, 10, x);
            for k in 0..=10 {
                assert_abs_diff_eq!(q[k], od.q[k], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn panel_integration_examples() {
        assert_abs_diff_eq!(integrate_panels(|x| x * x, 0.0, 1.0, 4), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            integrate_panels(f64::exp, 0.0, 1.0, 8),
            std::f64::consts::E - 1.0,
            epsilon = 1e-13
        );
        let gl12_weight_sum: f64 = GL12.iter().map(|&(_, w)| w).sum();
        assert_abs_diff_eq!(gl12_weight_sum, 2.0, epsilon = 1e-15);
        let gl5_weight_sum: f64 = GL5.iter().map(|&(_, w)| w).sum();
        assert_abs_diff_eq!(gl5_weight_sum, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn gauss_rule_rejects_short_inputs() {
        let p = DiffusionParams { drift_rate: 1.0, mean: 0.0, vol_scale: 1.0 };
        let (al, be) = recurrence(DiffusionKind::Ou, &p, 5);
        assert!(gauss_rule(&al, &be, 6).is_err());
        assert!(gauss_rule(&al, &be, 0).is_err());
    }
}
