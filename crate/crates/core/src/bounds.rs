//! Closed-form upper bounds on the overlap ratio `k` in `omega_C >= k omega_Q`.

use crate::error::{Error, Result};
use crate::mub::{is_prime_power, largest_prime_power_leq};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseAdjusted {
    pub eps1: f64,
    pub eps2: f64,
    /// Dimension the noise formula was evaluated at (the prime power `d'`).
    pub evaluated_at: usize,
    pub tight: f64,
    pub coarse: f64,
    /// `tight < 1`
    pub below_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KBoundReport {
    pub dim: usize,
    /// Largest prime power `d' <= dim`.
    pub subdim_used: usize,
    /// `(1/d')(1 + sqrt(1 - 1/d'))`, the binding bound.
    pub exact_bound: f64,
    /// `2/d'`
    pub coarse_bound: f64,
    /// `4/(d - 1)`
    pub coarse_bound_any_dim: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_adjusted: Option<NoiseAdjusted>,
    /// Whether `eps1` and `eps2` both sit below [`noise_threshold`] at `d'`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_ok: Option<bool>,
}

fn exact_at(d: usize) -> f64 {
    let df = d as f64;
    (1.0 + (1.0 - 1.0 / df).sqrt()) / df
}

fn require_noise_dim(d: usize) -> Result<()> {
    if d < 4 || !is_prime_power(d) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            supported: "prime powers >= 4".into(),
        });
    }
    Ok(())
}

/// Noiseless bound for `d >= 4`.
pub fn theorem2_bound(d: usize) -> Result<KBoundReport> {
    if d < 4 {
        return Err(Error::UnsupportedDimension {
            dim: d,
            supported: "d >= 4 (d = 3 has its own certificate)".into(),
        });
    }
    let sub = largest_prime_power_leq(d)?;
    Ok(KBoundReport {
        dim: d,
        subdim_used: sub,
        exact_bound: exact_at(sub),
        coarse_bound: 2.0 / sub as f64,
        coarse_bound_any_dim: 4.0 / (d as f64 - 1.0),
        noise_adjusted: None,
        threshold_ok: None,
    })
}

/// Noiseless bound plus the noise-adjusted forms, evaluated at `d'`.
pub fn theorem2_bound_with_noise(d: usize, eps1: f64, eps2: f64) -> Result<KBoundReport> {
    let mut report = theorem2_bound(d)?;
    let sub = report.subdim_used;
    let (tight, coarse) = noisy_bound(sub, eps1, eps2)?;
    let threshold = noise_threshold(sub)?;
    report.noise_adjusted = Some(NoiseAdjusted {
        eps1,
        eps2,
        evaluated_at: sub,
        tight,
        coarse,
        below_one: tight < 1.0,
    });
    report.threshold_ok = Some(eps1 < threshold && eps2 < threshold);
    Ok(report)
}

/// `(tight, coarse)` noise-adjusted bounds for prime-power `d >= 4`:
///
/// ```text
/// tight  = (1/d)(1 + d^2 (d-1)(1.5 d eps1 + eps2))(1 + sqrt(1 - 1/d))
/// coarse = 2/d + d^2 (3 d eps1 + 2 eps2)
/// ```
pub fn noisy_bound(d: usize, eps1: f64, eps2: f64) -> Result<(f64, f64)> {
    require_noise_dim(d)?;
    for (name, e) in [("eps1", eps1), ("eps2", eps2)] {
        if !(e >= 0.0) || !e.is_finite() {
            return Err(Error::InvalidArgument(format!("{name} must be a finite non-negative number, got {e}")));
        }
    }
    let df = d as f64;
    let tight = (1.0 + df * df * (df - 1.0) * (1.5 * df * eps1 + eps2)) * exact_at(d);
    let coarse = 2.0 / df + df * df * (3.0 * df * eps1 + 2.0 * eps2);
    Ok((tight, coarse))
}

/// Largest common `eps = eps1 = eps2` for which the tight noisy bound stays
/// below 1 (at equality it is exactly 1):
/// `eps = 2 / ((d-1)(3d+2)) * (1 - sqrt(1 - 1/d) - 1/d^2)`.
pub fn noise_threshold(d: usize) -> Result<f64> {
    require_noise_dim(d)?;
    let df = d as f64;
    Ok(2.0 / ((df - 1.0) * (3.0 * df + 2.0)) * (1.0 - (1.0 - 1.0 / df).sqrt() - 1.0 / (df * df)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub dim: usize,
    pub subdim_used: usize,
    pub exact_bound: f64,
    /// `exact_bound * d'`, which lies in `(1, 2]`.
    pub scaled: f64,
}

pub fn asymptotic_check(dims: &[usize]) -> Result<Vec<AsymptoticRow>> {
    dims.iter()
        .map(|&d| {
            let r = theorem2_bound(d)?;
            Ok(AsymptoticRow {
                dim: d,
                subdim_used: r.subdim_used,
                exact_bound: r.exact_bound,
                scaled: r.exact_bound * r.subdim_used as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedK {
    pub average: f64,
    /// `4/(d - 1)`
    pub bound: f64,
    pub satisfied: bool,
    /// False when `bound >= 1`, in which case no model can violate it.
    pub binding: bool,
}

/// Mean of the `d^2` per-pair ratios `k(c, e^alpha_i)` against `4/(d-1)`.
pub fn averaged_k_bound(values: &[f64], d: usize) -> Result<AveragedK> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} is below 2")));
    }
    if values.len() != d * d {
        return Err(Error::InvalidArgument(format!(
            "expected {} ratios for d = {d}, got {}",
            d * d,
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidArgument(format!("ratio {v} outside [0, 1]")));
    }
    let average = values.iter().sum::<f64>() / values.len() as f64;
    let bound = 4.0 / (d as f64 - 1.0);
    Ok(AveragedK {
        average,
        bound,
        satisfied: average < bound,
        binding: bound < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn noiseless_values() {
        let r = theorem2_bound(4).unwrap();
        assert_eq!(r.subdim_used, 4);
        assert_abs_diff_eq!(r.exact_bound, 0.25 * (1.0 + 0.75f64.sqrt()), epsilon = 1e-15);
        assert_eq!(r.coarse_bound, 0.5);
        assert!(r.exact_bound < r.coarse_bound);

        let r = theorem2_bound(10).unwrap();
        assert_eq!(r.subdim_used, 9);
        assert_abs_diff_eq!(r.exact_bound, (1.0 + (8.0f64 / 9.0).sqrt()) / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.coarse_bound_any_dim, 4.0 / 9.0, epsilon = 1e-15);

        for d in [2, 3] {
            assert!(matches!(theorem2_bound(d), Err(Error::UnsupportedDimension { .. })));
        }
    }

    #[test]
    fn exact_bound_below_both_coarse_forms() {
        for d in 4..200 {
            let r = theorem2_bound(d).unwrap();
            assert!(r.exact_bound < r.coarse_bound, "d={d}");
            assert!(r.exact_bound < r.coarse_bound_any_dim, "d={d}");
            assert!(r.exact_bound > 0.0 && r.exact_bound <= 1.0);
        }
    }

    #[test]
    fn asymptotics() {
        let dims: Vec<usize> = (2..=10).map(|k| 1usize << k).collect();
        let rows = asymptotic_check(&dims).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].exact_bound < w[0].exact_bound);
        }
        assert!(rows.iter().all(|r| r.scaled > 1.0 && r.scaled <= 2.0));
        let last = rows.last().unwrap();
        assert_eq!(last.dim, 1024);
        assert!(last.exact_bound < 0.005);
    }

    #[test]
    fn noisy_forms() {
        let (t, c) = noisy_bound(4, 0.0, 0.0).unwrap();
        assert_eq!(t, theorem2_bound(4).unwrap().exact_bound);
        assert_eq!(c, 0.5);
        let (t, c) = noisy_bound(4, 0.001, 0.001).unwrap();
        assert!(t < 1.0 && t <= c);
        // coarse = 1/2 + 16 * 14 * 0.0034
        let (_, c) = noisy_bound(4, 0.0034, 0.0034).unwrap();
        assert_abs_diff_eq!(c, 0.5 + 16.0 * 14.0 * 0.0034, epsilon = 1e-12);
        assert!(c >= 1.0);
        assert!(noisy_bound(4, -1e-3, 0.0).is_err());
        assert!(noisy_bound(4, f64::NAN, 0.0).is_err());
        assert!(noisy_bound(6, 0.0, 0.0).is_err());
        // monotone in each argument
        let mut prev = 0.0;
        for k in 0..50 {
            let (t, _) = noisy_bound(5, 1e-4 * k as f64, 2e-4).unwrap();
            assert!(t >= prev);
            prev = t;
        }
    }

    #[test]
    fn threshold_is_the_crossing_point() {
        let e4 = noise_threshold(4).unwrap();
        assert!((e4 - 0.0034).abs() < 1e-4, "{e4}");
        let (t, _) = noisy_bound(4, e4, e4).unwrap();
        assert_abs_diff_eq!(t, 1.0, epsilon = 1e-12);
        let primes = [4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27];
        for w in primes.windows(2) {
            assert!(noise_threshold(w[1]).unwrap() < noise_threshold(w[0]).unwrap());
        }
        for d in primes {
            let e = noise_threshold(d).unwrap();
            assert!(noisy_bound(d, 0.99 * e, 0.99 * e).unwrap().0 < 1.0);
            assert!(noisy_bound(d, 1.01 * e, 1.01 * e).unwrap().0 > 1.0);
        }
    }

    #[test]
    fn noise_fields_use_prime_power_reduction() {
        let r = theorem2_bound_with_noise(10, 1e-4, 1e-4).unwrap();
        let n = r.noise_adjusted.unwrap();
        assert_eq!(n.evaluated_at, 9);
        assert_eq!(n.tight, noisy_bound(9, 1e-4, 1e-4).unwrap().0);
        assert_eq!(r.threshold_ok, Some(1e-4 < noise_threshold(9).unwrap()));
    }

    #[test]
    fn averaged_bound_semantics() {
        let r = averaged_k_bound(&[0.0; 16], 4).unwrap();
        assert_eq!(r.average, 0.0);
        assert!(r.satisfied);
        let r = averaged_k_bound(&[1.0; 16], 4).unwrap();
        assert!(r.satisfied && !r.binding);
        let r = averaged_k_bound(&[0.6; 81], 9).unwrap();
        assert_eq!(r.bound, 0.5);
        assert!(!r.satisfied && r.binding);
        assert!(averaged_k_bound(&[0.1; 15], 4).is_err());
        let mut bad = vec![0.1; 16];
        bad[3] = 1.2;
        assert!(averaged_k_bound(&bad, 4).is_err());
    }
}
