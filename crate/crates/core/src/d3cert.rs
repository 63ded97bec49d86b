//! Certificate that `k < 1` in dimension 3, where no triple drawn from
//! distinct mutually unbiased bases is PP-incompatible.
//!
//! A fixed state `c` is combined with vectors of three MUBs; for every triple
//! `(e^alpha_i, e^beta_j, c)` the conjugate-basis search gives the smallest
//! misfire sum, and
//!
//! ```text
//! k <= (1 + sum over triples of misfire sums) / sum_{alpha,i} omega_Q(e^alpha_i, c)
//! ```

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::qstate::{fidelity, orthonormality_defect, quantum_overlap, OrthonormalBasis, PureState};
use crate::rng::stream_rng;
use crate::triples::{find_conjugate_basis, misfire_probabilities, pp_incompatible, triple_overlaps};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Printed components of `c`, rounded to three decimals.
pub const C_COMPONENTS: [(f64, f64); 3] = [(-0.374, -0.236), (0.778, -0.071), (0.018, -0.441)];

/// Base pairs in the order the tables are reported.
pub const FAMILIES: [(usize, usize); 3] = [(1, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D3Instance {
    /// `e^1, e^2, e^3`
    pub bases: Vec<OrthonormalBasis>,
    pub c: PureState,
    /// Norm of the printed components before renormalisation.
    pub c_raw_norm: f64,
}

impl D3Instance {
    /// `e^alpha_i` with 1-based labels.
    pub fn vector(&self, alpha: usize, i: usize) -> &PureState {
        self.bases[alpha - 1].vector(i - 1)
    }
}

pub fn canonical_states() -> D3Instance {
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let w2 = w * w;
    let one = C64::new(1.0, 0.0);
    let s = 1.0 / 3f64.sqrt();
    let basis = |rows: [[C64; 3]; 3], scale: f64| {
        let vectors = rows
            .iter()
            .map(|r| PureState::new(r.iter().map(|z| z * scale).collect()).expect("unit vector"))
            .collect();
        OrthonormalBasis::new(vectors).expect("orthonormal")
    };
    let zero = C64::new(0.0, 0.0);
    let e1 = basis([[one, zero, zero], [zero, one, zero], [zero, zero, one]], 1.0);
    let e2 = basis([[one, one, w2], [one, w2, one], [one, w, w]], s);
    let e3 = basis([[one, w, w2], [one, one, one], [one, w2, w]], s);
    let raw: Vec<C64> = C_COMPONENTS.iter().map(|&(re, im)| C64::new(re, im)).collect();
    let c_raw_norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    D3Instance {
        bases: vec![e1, e2, e3],
        c: PureState::normalized(raw).expect("nonzero"),
        c_raw_norm,
    }
}

/// `(epsilon, triple_sum)` for the triple `(a, b, c)` and frame `{f1, f2, f3}`.
pub fn quantum_epsilon(a: &PureState, b: &PureState, c: &PureState, frame: &[PureState]) -> Result<(f64, f64)> {
    if frame.len() != 3 {
        return Err(Error::InvalidBasis(format!("expected 3 vectors, got {}", frame.len())));
    }
    let defect = orthonormality_defect(frame);
    if defect > 1e-8 {
        return Err(Error::InvalidBasis(format!("frame is not orthonormal (defect {defect:.3e})")));
    }
    let m = misfire_probabilities([a, b, c], frame)?;
    let sum: f64 = m.iter().sum();
    Ok((sum / 3.0, sum))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleEntry {
    pub alpha: usize,
    pub beta: usize,
    pub i: usize,
    pub j: usize,
    pub epsilon: f64,
    /// `3 * epsilon`, the quantity listed per row in the reference tables.
    pub triple_sum: f64,
    pub basis: Vec<PureState>,
    pub pp_incompatible: bool,
    pub converged: bool,
    pub agreeing_restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySum {
    pub alpha: usize,
    pub beta: usize,
    pub epsilon_sum: f64,
    /// `3 * epsilon_sum`
    pub triple_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub restarts: usize,
    pub seed: u64,
    pub entries: Vec<TripleEntry>,
    pub family_sums: Vec<FamilySum>,
    /// `3 * sum of all epsilons`
    pub grand_noise_sum: f64,
    pub overlap_weight_sum: f64,
    pub k_bound: f64,
    pub all_converged: bool,
}

impl CertificateReport {
    pub fn entry(&self, alpha: usize, beta: usize, i: usize, j: usize) -> Option<&TripleEntry> {
        self.entries
            .iter()
            .find(|e| (e.alpha, e.beta, e.i, e.j) == (alpha, beta, i, j))
    }
}

/// `sum_{alpha,i} (1 - sqrt(1 - |<e^alpha_i|c>|^2))`
pub fn overlap_weight_sum(instance: &D3Instance) -> f64 {
    instance
        .bases
        .iter()
        .flat_map(|b| b.vectors())
        .map(|e| quantum_overlap(e, &instance.c).expect("same dimension"))
        .sum()
}

/// `(1 + grand_noise_sum) / overlap_weight_sum`
pub fn certify_k(grand_noise_sum: f64, overlap_weight_sum: f64) -> Result<f64> {
    if !grand_noise_sum.is_finite() || grand_noise_sum < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid noise sum {grand_noise_sum}")));
    }
    if !overlap_weight_sum.is_finite() || overlap_weight_sum <= 0.0 {
        return Err(Error::InvalidArgument(format!("invalid overlap weight sum {overlap_weight_sum}")));
    }
    Ok((1.0 + grand_noise_sum) / overlap_weight_sum)
}

/// Seed for the restarts of one triple, derived from the run seed.
fn triple_seed(seed: u64, index: usize) -> u64 {
    stream_rng(seed, (1u64 << 40) + index as u64).next_u64()
}

/// Runs the conjugate-basis search for all 27 triples.
///
/// Non-converged triples are kept in the report with `converged = false`
/// and clear `all_converged`.
pub fn optimize_all_triples(instance: &D3Instance, restarts: usize, seed: u64) -> Result<CertificateReport> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let mut entries = Vec::with_capacity(27);
    for &(alpha, beta) in &FAMILIES {
        for i in 1..=3 {
            for j in 1..=3 {
                let a = instance.vector(alpha, i);
                let b = instance.vector(beta, j);
                let r = find_conjugate_basis(a, b, &instance.c, restarts, triple_seed(seed, entries.len()))?;
                entries.push(TripleEntry {
                    alpha,
                    beta,
                    i,
                    j,
                    epsilon: r.epsilon,
                    triple_sum: r.triple_sum,
                    basis: r.basis,
                    pp_incompatible: pp_incompatible(&triple_overlaps(a, b, &instance.c)?),
                    converged: r.converged,
                    agreeing_restarts: r.agreeing_restarts,
                });
            }
        }
    }
    let family_sums: Vec<FamilySum> = FAMILIES
        .iter()
        .map(|&(alpha, beta)| {
            let eps: f64 = entries
                .iter()
                .filter(|e| (e.alpha, e.beta) == (alpha, beta))
                .map(|e| e.epsilon)
                .sum();
            FamilySum {
                alpha,
                beta,
                epsilon_sum: eps,
                triple_sum: 3.0 * eps,
            }
        })
        .collect();
    let grand_noise_sum = family_sums.iter().map(|f| f.triple_sum).sum();
    let overlap = overlap_weight_sum(instance);
    let all_converged = entries.iter().all(|e| e.converged);
    Ok(CertificateReport {
        restarts,
        seed,
        k_bound: certify_k(grand_noise_sum, overlap)?,
        entries,
        family_sums,
        grand_noise_sum,
        overlap_weight_sum: overlap,
        all_converged,
    })
}

/// Like [`certify_k`] on a finished report, but refuses reports with
/// non-converged triples.
pub fn certify_report(report: &CertificateReport) -> Result<f64> {
    if let Some(e) = report.entries.iter().find(|e| !e.converged) {
        return Err(Error::NotConverged(format!(
            "triple (alpha={}, beta={}, i={}, j={})",
            e.alpha, e.beta, e.i, e.j
        )));
    }
    certify_k(report.grand_noise_sum, report.overlap_weight_sum)
}

/// One row per triple: indices, the three basis vectors as re/im pairs, then
/// `epsilon`, `triple_sum` and the convergence flag.
pub fn to_csv(report: &CertificateReport) -> String {
    let mut out = String::from("alpha,beta,i,j");
    for k in 1..=3 {
        for r in 1..=3 {
            let _ = write!(out, ",f{k}_{r}_re,f{k}_{r}_im");
        }
    }
    out.push_str(",epsilon,triple_sum,converged\n");
    for e in &report.entries {
        let _ = write!(out, "{},{},{},{}", e.alpha, e.beta, e.i, e.j);
        for f in &e.basis {
            for z in f.amplitudes() {
                let _ = write!(out, ",{:e},{:e}", z.re, z.im);
            }
        }
        let _ = writeln!(out, ",{:e},{:e},{}", e.epsilon, e.triple_sum, e.converged);
    }
    out
}

/// Fidelity table `|<e^alpha_i|c>|^2`, row-major over `(alpha, i)`.
pub fn c_fidelities(instance: &D3Instance) -> Vec<f64> {
    instance
        .bases
        .iter()
        .flat_map(|b| b.vectors())
        .map(|e| fidelity(e, &instance.c).expect("same dimension"))
        .collect()
}
