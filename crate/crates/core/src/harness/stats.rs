//! Test statistics for the verification gates: Kolmogorov-Smirnov
//! distances (one- and two-sample) with the asymptotic Kolmogorov law,
//! and Pearson chi-square occupation tests with tail merging.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Kolmogorov-Smirnov distance between a sorted sample and a model CDF
/// evaluated at the sample points: max over i of the gap between F(x_(i))
/// and both i/n and (i-1)/n.
pub fn ks_distance_to_cdf(sorted: &[f64], cdf_values: &[f64]) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyResult { what: "ks sample" });
    }
    if sorted.len() != cdf_values.len() {
        return Err(Error::InvalidParameter {
            name: "cdf_values",
            message: format!("length {} does not match sample {}", cdf_values.len(), sorted.len()),
        });
    }
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, (&x, &f)) in sorted.iter().zip(cdf_values).enumerate() {
        if i + 1 < sorted.len() && sorted[i + 1] < x {
            return Err(Error::InvalidParameter {
                name: "sorted",
                message: "sample must be ascending".into(),
            });
        }
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameter {
                name: "cdf_values",
                message: format!("cdf value {f} outside [0, 1]"),
            });
        }
        let hi = (i as f64 + 1.0) / n;
        let lo = i as f64 / n;
        d = d.max((f - hi).abs()).max((f - lo).abs());
    }
    Ok(d)
}

/// Survival function of the Kolmogorov distribution,
/// Q(x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2), with the
/// theta-transformed series on the small-x side for accuracy.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    if x < 1.18 {
        // Dual series: P(K <= x) = sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / 8x^2).
        let t = (-std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / x
            * (t + t.powi(9) + t.powi(25) + t.powi(49));
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let t = (-2.0 * x * x).exp();
        let mut acc = 0.0;
        let mut sign = 1.0;
        for k in 1..100 {
            let term = t.powi(k * k);
            if term < 1e-17 {
                break;
            }
            acc += sign * term;
            sign = -sign;
        }
        (2.0 * acc).clamp(0.0, 1.0)
    }
}

/// Two-sample Kolmogorov-Smirnov test. Returns (distance, asymptotic
/// p-value) using the effective size n m/(n+m) with the standard
/// small-sample correction.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyResult { what: "ks two-sample input" });
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).expect("comparable samples"));
    ys.sort_by(|p, q| p.partial_cmp(q).expect("comparable samples"));
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        let v = x.min(y);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let sq = ne.sqrt();
    let p = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
    Ok((d, p))
}

/// Result of a chi-square occupation test after tail merging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: u64,
    pub threshold: f64,
    pub pass: bool,
}

/// Upper quantile of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_threshold(dof: u64, quantile: f64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::InvalidParameter {
            name: "dof",
            message: "need at least one degree of freedom".into(),
        });
    }
    let law = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter {
        name: "dof",
        message: e.to_string(),
    })?;
    Ok(law.inverse_cdf(quantile))
}

/// Pearson chi-square of observed counts against cell probabilities, with
/// cells merged greedily left to right until each merged cell has expected
/// count at least 5 (a trailing light cell joins its predecessor). The
/// gate compares against the 0.99 quantile at the merged dof.
pub fn occupation_chi_square(observed: &[u64], probs: &[f64]) -> Result<ChiSquareReport> {
    if observed.is_empty() || observed.len() != probs.len() {
        return Err(Error::InvalidParameter {
            name: "observed",
            message: format!(
                "need matching nonempty cells, got {} observed vs {} probabilities",
                observed.len(),
                probs.len()
            ),
        });
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::EmptyResult { what: "occupation counts" });
    }
    let psum: f64 = probs.iter().sum();
    if probs.iter().any(|&p| !(p >= 0.0)) || (psum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParameter {
            name: "probs",
            message: format!("cell probabilities must be nonnegative and sum to 1, got {psum}"),
        });
    }
    let tf = total as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&o, &p) in observed.iter().zip(probs) {
        acc_o += o as f64;
        acc_e += tf * p;
        if acc_e >= 5.0 {
            cells.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += acc_o;
            last.1 += acc_e;
        } else {
            cells.push((acc_o, acc_e));
        }
    }
    if cells.len() < 2 {
        return Err(Error::InsufficientSampling {
            detail: format!("only {} merged cell(s); draw more samples", cells.len()),
        });
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (cells.len() - 1) as u64;
    let threshold = chi_square_threshold(dof, 0.99)?;
    Ok(ChiSquareReport { statistic, dof, threshold, pass: statistic < threshold })
}

/// Sample mean and its standard error.
pub fn mean_and_se(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSampling {
            detail: "need at least two samples for a standard error".into(),
        });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kolmogorov_law_values() {
        // Known points of the Kolmogorov distribution.
        assert_abs_diff_eq!(kolmogorov_sf(1.0), 0.26999967167735456, epsilon = 1e-9);
        assert_abs_diff_eq!(kolmogorov_sf(1.36), 0.049485876755377876, epsilon = 1e-9);
        assert_abs_diff_eq!(kolmogorov_sf(0.5), 0.9639452436648751, epsilon = 1e-9);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
        assert!(kolmogorov_sf(3.0) < 1e-7);
        // No jump where the two series hand over.
        assert_abs_diff_eq!(
            kolmogorov_sf(1.18 - 1e-9),
            kolmogorov_sf(1.18 + 1e-9),
            epsilon = 1e-7
        );
    }

    #[test]
    fn ks_distance_examples() {
        // Three points at exactly their own quantiles of U(0,1).
        let sorted = [0.25, 0.5, 0.75];
        let cdf: Vec<f64> = sorted.to_vec();
        let d = ks_distance_to_cdf(&sorted, &cdf).unwrap();
        // |0.25 - 0/3| = 0.25 realized at the first point.
        assert_abs_diff_eq!(d, 0.25, epsilon = 1e-15);
        assert!(ks_distance_to_cdf(&[], &[]).is_err());
        assert!(ks_distance_to_cdf(&[1.0, 0.5], &[0.5, 0.2]).is_err());
    }

    #[test]
    fn two_sample_ks_identical_and_disjoint() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (d, p) = ks_two_sample(&a, &a).unwrap();
        assert_eq!(d, 0.0);
        assert!(p > 0.999);
        let b: Vec<f64> = (0..100).map(|i| 1000.0 + i as f64).collect();
        let (d, p) = ks_two_sample(&a, &b).unwrap();
        assert_eq!(d, 1.0);
        assert!(p < 1e-10);
    }

    #[test]
    fn two_sample_ks_calibration() {
        // Same law: p should be comfortably nonsmall for a typical seed.
        use crate::rng::master_rng;
        use rand::Rng;
        let mut rng = master_rng(31);
        let a: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let (_, p) = ks_two_sample(&a, &b).unwrap();
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn chi_square_merging_and_threshold() {
        // Uniform over 4 cells, 100 draws: all expected = 25, no merging.
        let probs = [0.25; 4];
        let obs = [24u64, 26, 25, 25];
        let rep = occupation_chi_square(&obs, &probs).unwrap();
        assert_eq!(rep.dof, 3);
        assert_abs_diff_eq!(rep.statistic, (1.0 + 1.0) / 25.0, epsilon = 1e-12);
        assert!(rep.pass);
        assert_abs_diff_eq!(chi_square_threshold(10, 0.99).unwrap(), 23.209, epsilon = 1e-2);
        // Tiny tail cells merge: expected counts 1/499/499/1 at 1000 draws
        // fold each light tail into its neighbor, leaving two cells.
        let rep =
            occupation_chi_square(&[1, 499, 499, 1], &[0.001, 0.499, 0.499, 0.001]).unwrap();
        assert_eq!(rep.dof, 1);
        assert!(rep.pass);
        // A single merged cell is not a test.
        assert!(matches!(
            occupation_chi_square(&[3, 2], &[0.5, 0.5]),
            Err(Error::InsufficientSampling { .. })
        ));
    }

    #[test]
    fn mean_and_se_constant() {
        let (m, se) = mean_and_se(&[2.0, 2.0, 2.0, 2.0]).unwrap();
        assert_eq!(m, 2.0);
        assert_eq!(se, 0.0);
        assert!(mean_and_se(&[1.0]).is_err());
    }
}
