//! Complete families of mutually unbiased bases for prime and small
//! prime-power dimensions, their verification, and the prime-power
//! subspace reduction used for arbitrary dimensions.

use crate::field::GaloisField;
use crate::linalg::{C64, ZERO};
use crate::qstate::{fidelity, orthonormality_defect, OrthonormalBasis, PureState};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SUPPORTED: &str = "{2, 4, 8, 9} and odd primes";

/// Bases whose cross-basis fidelities all equal `1/dim`. Basis `g` carries
/// the label `g + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MubFamily {
    pub dim: usize,
    pub bases: Vec<OrthonormalBasis>,
}

impl MubFamily {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn basis(&self, label: usize) -> &OrthonormalBasis {
        &self.bases[label - 1]
    }
}

/// Outcome of [`verify_mub`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MubReport {
    pub dim: usize,
    pub bases: usize,
    /// max |fidelity - 1/dim| over all cross-basis pairs
    pub max_deviation: f64,
    pub max_orthonormality_defect: f64,
    pub passes: bool,
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// `Some(p)` when `n = p^k` for a prime `p` and `k >= 1`.
pub fn prime_power_base(n: usize) -> Option<usize> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|k| n % k == 0)?;
    let mut m = n;
    while m % p == 0 {
        m /= p;
    }
    (m == 1).then_some(p)
}

pub fn is_prime_power(n: usize) -> bool {
    prime_power_base(n).is_some()
}

pub fn is_supported_dimension(dim: usize) -> bool {
    matches!(dim, 2 | 4 | 8 | 9) || (dim > 2 && is_prime(dim))
}

/// Largest prime power `d' <= d` (with `d' >= 4`), for `d >= 4`.
pub fn largest_prime_power_leq(d: usize) -> Result<usize> {
    if d < 4 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 4, got {d}")));
    }
    Ok((4..=d).rev().find(|&k| is_prime_power(k)).expect("4 is a prime power"))
}

/// Builds `dim + 1` mutually unbiased bases.
///
/// The first basis is always the standard basis. Odd primes use the
/// quadratic-phase bases `exp(2 pi i (g k^2 + i k) / d) / sqrt(d)`; `d = 2`
/// uses the Pauli eigenbases; `d = 9` uses `omega_3^{tr(a x^2 + b x)}` over
/// GF(9); `d = 4, 8` use `i^{x^T S_a x} (-1)^{b.x}` with `S_a` the trace form
/// `tr(a w_i w_j)` of GF(2^m).
pub fn generate_mub(dim: usize) -> Result<MubFamily> {
    if !is_supported_dimension(dim) {
        return Err(Error::UnsupportedDimension {
            dim,
            supported: SUPPORTED.into(),
        });
    }
    let mut raw: Vec<Vec<Vec<C64>>> = vec![standard_vectors(dim)];
    match dim {
        2 => raw.extend(pauli_bases()),
        4 | 8 => raw.extend(binary_field_bases(dim)),
        9 => raw.extend(odd_field_bases(dim)),
        _ => raw.extend(prime_bases(dim)),
    }
    let bases = raw
        .into_iter()
        .map(|vs| {
            let states = vs.into_iter().map(PureState::normalized).collect::<Result<Vec<_>>>()?;
            OrthonormalBasis::new(states)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MubFamily { dim, bases })
}

fn standard_vectors(d: usize) -> Vec<Vec<C64>> {
    (0..d)
        .map(|k| {
            let mut v = vec![ZERO; d];
            v[k] = C64::new(1.0, 0.0);
            v
        })
        .collect()
}

fn root_of_unity(num: usize, den: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * (num % den) as f64 / den as f64)
}

fn pauli_bases() -> Vec<Vec<Vec<C64>>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    vec![
        vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]],
        vec![vec![c(s, 0.0), c(0.0, s)], vec![c(s, 0.0), c(0.0, -s)]],
    ]
}

fn prime_bases(d: usize) -> Vec<Vec<Vec<C64>>> {
    let amp = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|g| {
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|k| root_of_unity(g * k * k + i * k, d) * amp)
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn odd_field_bases(d: usize) -> Vec<Vec<Vec<C64>>> {
    let f = GaloisField::new(d).expect("supported field");
    let p = f.characteristic();
    let amp = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    (0..d)
                        .map(|x| {
                            let ax2 = f.mul(a, f.mul(x, x));
                            let bx = f.mul(b, x);
                            root_of_unity(f.trace(f.add(ax2, bx)), p) * amp
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn binary_field_bases(d: usize) -> Vec<Vec<Vec<C64>>> {
    let f = GaloisField::new(d).expect("supported field");
    let m = f.degree();
    let amp = 1.0 / (d as f64).sqrt();
    let w: Vec<usize> = (0..m).map(|k| f.basis_element(k)).collect();
    (0..d)
        .map(|a| {
            let s: Vec<Vec<usize>> = (0..m)
                .map(|i| (0..m).map(|j| f.trace(f.mul(a, f.mul(w[i], w[j])))).collect())
                .collect();
            (0..d)
                .map(|b| {
                    let bv = f.coordinates(b);
                    (0..d)
                        .map(|x| {
                            let xv = f.coordinates(x);
                            let mut quad = 0;
                            for i in 0..m {
                                for j in 0..m {
                                    quad += xv[i] * s[i][j] * xv[j];
                                }
                            }
                            let lin: usize = (0..m).map(|i| bv[i] * xv[i]).sum();
                            // i^quad * (-1)^lin = i^(quad + 2 lin)
                            root_of_unity(quad + 2 * lin, 4) * amp
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Max |fidelity - 1/subdim| across vectors drawn from distinct sets.
pub fn cross_fidelity_deviation(sets: &[Vec<PureState>], subdim: usize) -> Result<f64> {
    let target = 1.0 / subdim as f64;
    let mut worst: f64 = 0.0;
    for (g, a) in sets.iter().enumerate() {
        for b in sets.iter().skip(g + 1) {
            for u in a {
                for v in b {
                    worst = worst.max((fidelity(u, v)? - target).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Checks mutual unbiasedness and per-basis orthonormality of a family.
pub fn verify_mub(family: &MubFamily) -> MubReport {
    verify_sets(
        &family.bases.iter().map(|b| b.vectors().to_vec()).collect::<Vec<_>>(),
        family.dim,
    )
}

/// [`verify_mub`] for bases given as plain vector sets spanning a common
/// `subdim`-dimensional subspace (e.g. after embedding).
pub fn verify_sets(sets: &[Vec<PureState>], subdim: usize) -> MubReport {
    let max_deviation = cross_fidelity_deviation(sets, subdim).unwrap_or(f64::INFINITY);
    let max_orthonormality_defect = sets
        .iter()
        .map(|s| orthonormality_defect(s))
        .fold(0.0, f64::max);
    MubReport {
        dim: subdim,
        bases: sets.len(),
        max_deviation,
        max_orthonormality_defect,
        passes: max_deviation < 1e-10 && max_orthonormality_defect < 1e-10,
    }
}

/// Zero-pads states of dimension `d'` into `C^target`.
pub fn embed_states(states: &[PureState], target: usize) -> Result<Vec<PureState>> {
    states
        .iter()
        .map(|s| {
            if s.dim() > target {
                return Err(Error::InvalidArgument(format!(
                    "cannot embed dimension {} into {target}",
                    s.dim()
                )));
            }
            let mut v = s.amplitudes().to_vec();
            v.resize(target, ZERO);
            PureState::new(v)
        })
        .collect()
}

/// Embeds every basis of a family into `C^target`.
pub fn embed_family(family: &MubFamily, target: usize) -> Result<Vec<Vec<PureState>>> {
    family
        .bases
        .iter()
        .map(|b| embed_states(b.vectors(), target))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::fidelity;
    use proptest::prelude::*;

    fn sieve_prime_powers(n: usize) -> Vec<usize> {
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for k in 2..=n {
            if !composite[k] {
                primes.push(k);
                let mut j = k * k;
                while j <= n {
                    composite[j] = true;
                    j += k;
                }
            }
        }
        let mut pp: Vec<usize> = Vec::new();
        for p in primes {
            let mut q = p;
            while q <= n {
                pp.push(q);
                q *= p;
            }
        }
        pp.sort();
        pp
    }

    #[test]
    fn all_supported_families_verify() {
        for d in [2, 3, 4, 5, 7, 8, 9, 11, 13] {
            let fam = generate_mub(d).unwrap();
            assert_eq!(fam.len(), d + 1);
            assert!(fam.bases.iter().all(|b| b.dim() == d));
            let r = verify_mub(&fam);
            assert!(r.passes, "d={d}: {r:?}");
            assert!(r.max_deviation < 1e-10);
        }
        assert!(verify_mub(&generate_mub(3).unwrap()).max_deviation < 1e-12);
        assert!(verify_mub(&generate_mub(5).unwrap()).max_deviation < 1e-10);
        assert!(verify_mub(&generate_mub(9).unwrap()).max_deviation < 1e-10);
    }

    #[test]
    fn unsupported_dimension_names_the_supported_set() {
        let err = generate_mub(6).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unsupported dimension 6"));
        assert!(msg.contains("{2, 4, 8, 9} and odd primes"));
        assert!(generate_mub(16).is_err());
        assert!(generate_mub(1).is_err());
    }

    #[test]
    fn broken_family_is_flagged() {
        let mut fam = generate_mub(3).unwrap();
        // replace a vector of basis 2 by a mate from basis 1
        let mut vs = fam.bases[1].vectors().to_vec();
        vs[0] = fam.bases[0].vector(0).clone();
        let sets: Vec<Vec<PureState>> = vec![fam.bases[0].vectors().to_vec(), vs];
        let r = verify_sets(&sets, 3);
        assert!(r.max_deviation >= 1.0 / 3.0 - 1e-10);
        assert!(!r.passes);
        fam.bases.truncate(1);
        assert!(verify_mub(&fam).passes);
    }

    #[test]
    fn prime_power_reduction() {
        assert_eq!(largest_prime_power_leq(4).unwrap(), 4);
        assert_eq!(largest_prime_power_leq(10).unwrap(), 9);
        assert_eq!(largest_prime_power_leq(100).unwrap(), 97);
        assert!(largest_prime_power_leq(3).is_err());
        let pp = sieve_prime_powers(2000);
        for d in 4..=2000 {
            let oracle = *pp.iter().filter(|&&q| q <= d).max().unwrap();
            let got = largest_prime_power_leq(d).unwrap();
            assert_eq!(got, oracle, "d={d}");
            assert!(2 * got > d, "Bertrand consequence fails at d={d}");
        }
    }

    #[test]
    fn embedding_preserves_fidelities() {
        let e = embed_states(&[PureState::basis(2, 0).unwrap()], 4).unwrap();
        let amps: Vec<f64> = e[0].amplitudes().iter().map(|z| z.re).collect();
        assert_eq!(amps, vec![1.0, 0.0, 0.0, 0.0]);

        let fam = generate_mub(4).unwrap();
        let a = fam.bases[1].vector(2);
        let b = fam.bases[3].vector(1);
        let emb = embed_states(&[a.clone(), b.clone()], 7).unwrap();
        assert_eq!(fidelity(a, b).unwrap(), fidelity(&emb[0], &emb[1]).unwrap());

        let sets = embed_family(&fam, 10).unwrap();
        assert!(sets.iter().flatten().all(|s| s.dim() == 10));
        assert!(verify_sets(&sets, 4).passes);
        assert!(embed_states(&[PureState::basis(5, 0).unwrap()], 4).is_err());
    }

    #[test]
    fn family_json_nests_bases_and_states() {
        let fam = generate_mub(2).unwrap();
        let v = serde_json::to_value(&fam).unwrap();
        assert_eq!(v["dim"], 2);
        assert_eq!(v["bases"].as_array().unwrap().len(), 3);
        assert_eq!(v["bases"][1]["vectors"][0]["dim"], 2);
        let back: MubFamily = serde_json::from_value(v).unwrap();
        assert_eq!(back, fam);
    }

    proptest! {
        #[test]
        fn prime_power_detection_matches_factorisation(n in 2usize..5000) {
            let mut m = n;
            let mut distinct = 0;
            let mut p = 2;
            while p * p <= m {
                if m % p == 0 {
                    distinct += 1;
                    while m % p == 0 { m /= p; }
                }
                p += 1;
            }
            if m > 1 { distinct += 1; }
            prop_assert_eq!(is_prime_power(n), distinct == 1);
        }
    }
}
