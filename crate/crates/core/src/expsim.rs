//! Finite-sample simulation of the noisy prepare-and-measure experiment.
//!
//! The design uses a reference state `c` and `d` bases `e^1..e^d`. Two kinds
//! of settings are run, each with a fixed number of shots:
//!
//! - for every triple `(e^alpha_i, e^beta_j, c)` with `alpha < beta`, each of
//!   the three states is measured in `{f1, f2, f3, f4}`;
//! - every `e^alpha_i` is measured in its own basis `e^alpha`.
//!
//! Misfire frequencies are averaged into
//!
//! ```text
//! eps(c, e^a_i, e^b_j) = (R[f1|e^a_i] + R[f2|e^b_j] + R[f3|c]) / 3
//! eps(e^a_i, e^a_j)    = (R[e^a_j|e^a_i] + R[e^a_i|e^a_j]) / 2
//! ```
//!
//! and `eps1`, `eps2` are the means over all triples and same-basis pairs.
//! Outcome `f4` is treated as never occurring: counts landing there are
//! removed before forming frequencies and reported as a diagnostic.

use crate::bounds::{noisy_bound, noise_threshold};
use crate::d3cert::canonical_states;
use crate::error::{Error, Result};
use crate::linalg::{self, I};
use crate::mub::{generate_mub, is_prime_power};
use crate::qstate::{born_probability, quantum_overlap, OrthonormalBasis, PureState};
use crate::rng::{map_indexed, stream_rng};
use crate::triples::{find_conjugate_basis, misfire_probabilities};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Shots of a misalignment setting are split into this many batches, each
/// with its own random rotation of the preparation.
pub const DEFAULT_BATCHES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseChannel {
    None,
    /// With probability `p` the outcome is uniform over the outcomes of the
    /// measurement restricted to the relevant subspace.
    Depolarizing { p: f64 },
    /// Preparations rotated by `exp(i sigma G)`, `G` a Gaussian Hermitian
    /// matrix (standard normal diagonal, unit-variance complex off-diagonal).
    Misalignment { sigma: f64 },
}

impl NoiseChannel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseChannel::Depolarizing { p } if !(0.0..=1.0).contains(&p) => {
                Err(Error::InvalidArgument(format!("depolarizing probability {p} outside [0, 1]")))
            }
            NoiseChannel::Misalignment { sigma } if !(sigma >= 0.0) || !sigma.is_finite() => {
                Err(Error::InvalidArgument(format!("misalignment scale {sigma} must be finite and >= 0")))
            }
            _ => Ok(()),
        }
    }
}

impl FromStr for NoiseChannel {
    type Err = Error;

    /// `none`, `depolarizing:P` or `misalignment:SIGMA`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let value = || {
            arg.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad noise parameter in {s:?}")))
        };
        let channel = match kind {
            "none" if arg.is_empty() => NoiseChannel::None,
            "depolarizing" => NoiseChannel::Depolarizing { p: value()? },
            "misalignment" => NoiseChannel::Misalignment { sigma: value()? },
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown noise {s:?}; expected none, depolarizing:P or misalignment:SIGMA"
                )))
            }
        };
        channel.validate()?;
        Ok(channel)
    }
}

impl fmt::Display for NoiseChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseChannel::None => write!(f, "none"),
            NoiseChannel::Depolarizing { p } => write!(f, "depolarizing:{p}"),
            NoiseChannel::Misalignment { sigma } => write!(f, "misalignment:{sigma}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub channel: NoiseChannel,
    pub shots: u64,
    pub seed: u64,
    pub batches: usize,
}

impl NoiseConfig {
    pub fn new(channel: NoiseChannel, shots: u64, seed: u64) -> Self {
        Self {
            channel,
            shots,
            seed,
            batches: DEFAULT_BATCHES,
        }
    }

    fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        if self.batches == 0 {
            return Err(Error::InvalidArgument("batches must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleDesign {
    pub alpha: usize,
    pub beta: usize,
    pub i: usize,
    pub j: usize,
    /// `f1, f2, f3`
    pub basis: Vec<PureState>,
    /// Noiseless misfire average of the basis.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub dim: usize,
    pub c: PureState,
    /// `e^1 .. e^n`, labelled from 1.
    pub bases: Vec<OrthonormalBasis>,
    pub triples: Vec<TripleDesign>,
}

impl Design {
    pub fn vector(&self, alpha: usize, i: usize) -> &PureState {
        self.bases[alpha - 1].vector(i - 1)
    }

    /// `sum_{alpha,i} omega_Q(c, e^alpha_i)`
    pub fn overlap_weight_sum(&self) -> f64 {
        self.bases
            .iter()
            .flat_map(|b| b.vectors())
            .map(|e| quantum_overlap(e, &self.c).expect("same dimension"))
            .sum()
    }

    fn build(dim: usize, c: PureState, bases: Vec<OrthonormalBasis>, restarts: usize, seed: u64) -> Result<Self> {
        let n = bases.len();
        let mut index = Vec::new();
        for alpha in 1..=n {
            for beta in alpha + 1..=n {
                for i in 1..=dim {
                    for j in 1..=dim {
                        index.push((alpha, beta, i, j));
                    }
                }
            }
        }
        let vec = |alpha: usize, i: usize| bases[alpha - 1].vector(i - 1);
        let triples = index
            .iter()
            .enumerate()
            .map(|(t, &(alpha, beta, i, j))| {
                let r = find_conjugate_basis(vec(alpha, i), vec(beta, j), &c, restarts, seed.wrapping_add(t as u64))?;
                if !r.converged {
                    return Err(Error::NotConverged(format!(
                        "conjugate basis for triple (alpha={alpha}, beta={beta}, i={i}, j={j})"
                    )));
                }
                Ok(TripleDesign {
                    alpha,
                    beta,
                    i,
                    j,
                    basis: r.basis,
                    epsilon: r.epsilon,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, c, bases, triples })
    }
}

/// Design for prime-power `d >= 4`: `c` is the first vector of the standard
/// basis and `e^1..e^d` are the remaining bases of the complete MUB family.
pub fn mub_design(d: usize, restarts: usize, seed: u64) -> Result<Design> {
    if d < 4 || !is_prime_power(d) {
        return Err(Error::UnsupportedDimension {
            dim: d,
            supported: "prime powers >= 4, or 3 via the canonical instance".into(),
        });
    }
    let family = generate_mub(d)?;
    let c = family.bases[0].vector(0).clone();
    Design::build(d, c, family.bases[1..].to_vec(), restarts, seed)
}

/// Design on the canonical three-dimensional instance.
pub fn d3_design(restarts: usize, seed: u64) -> Result<Design> {
    let inst = canonical_states();
    Design::build(3, inst.c, inst.bases, restarts, seed)
}

/// `mub_design` for `d >= 4`, `d3_design` for `d = 3`.
pub fn design_for(d: usize, restarts: usize, seed: u64) -> Result<Design> {
    if d == 3 {
        d3_design(restarts, seed)
    } else {
        mub_design(d, restarts, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub alpha: usize,
    pub beta: usize,
    pub i: usize,
    pub j: usize,
    /// Rows: preparations `e^alpha_i`, `e^beta_j`, `c`; columns `f1..f4`.
    pub counts: [[u64; 4]; 3],
}

impl TripleRecord {
    /// `R[f_k | prep_k]` with `f4` counts removed from the denominator.
    pub fn misfire_frequencies(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, row) in self.counts.iter().enumerate() {
            let kept = row[0] + row[1] + row[2];
            out[k] = if kept == 0 { 0.0 } else { row[k] as f64 / kept as f64 };
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    pub alpha: usize,
    pub i: usize,
    /// Counts of outcomes `e^alpha_1 .. e^alpha_d`.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub dim: usize,
    pub shots: u64,
    pub triples: Vec<TripleRecord>,
    pub bases: Vec<BasisRecord>,
}

impl FrequencyTable {
    /// `R[e^alpha_j | e^alpha_i]`
    pub fn basis_frequency(&self, alpha: usize, i: usize, j: usize) -> Option<f64> {
        self.bases
            .iter()
            .find(|r| r.alpha == alpha && r.i == i)
            .and_then(|r| {
                let total: u64 = r.counts.iter().sum();
                r.counts.get(j - 1).map(|c| *c as f64 / total.max(1) as f64)
            })
    }

    /// Share of triple-setting shots that landed on `f4`: overall and worst
    /// single preparation.
    pub fn f4_mass(&self) -> F4Diagnostic {
        let mut total = 0u64;
        let mut f4 = 0u64;
        let mut worst: f64 = 0.0;
        for r in &self.triples {
            for row in &r.counts {
                let n: u64 = row.iter().sum();
                total += n;
                f4 += row[3];
                if n > 0 {
                    worst = worst.max(row[3] as f64 / n as f64);
                }
            }
        }
        F4Diagnostic {
            overall: if total == 0 { 0.0 } else { f4 as f64 / total as f64 },
            worst_setting: worst,
            discarded_shots: f4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F4Diagnostic {
    pub overall: f64,
    pub worst_setting: f64,
    pub discarded_shots: u64,
}

/// Multinomial draw by successive conditional binomials.
fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64], out: &mut [u64]) {
    let mut remaining = n;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    for (k, p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            out[k] += remaining;
            break;
        }
        let p = p.max(0.0);
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let x = Binomial::new(remaining, q).expect("probability in [0, 1]").sample(rng);
        out[k] += x;
        remaining -= x;
        mass -= p;
    }
}

/// Outcome probabilities for one preparation; with depolarizing noise the
/// uniform part covers the first `uniform_over` outcomes.
fn noisy_probabilities(
    channel: &NoiseChannel,
    prep: &PureState,
    outcomes: &[PureState],
    uniform_over: usize,
    rotation: Option<&linalg::CMatrix>,
) -> Vec<f64> {
    let rotated;
    let psi = match rotation {
        Some(u) => {
            rotated = prep.transformed(u).expect("same dimension");
            &rotated
        }
        None => prep,
    };
    let born: Vec<f64> = outcomes.iter().map(|f| born_probability(f, psi).expect("same dimension")).collect();
    match *channel {
        NoiseChannel::Depolarizing { p } => born
            .iter()
            .enumerate()
            .map(|(k, b)| (1.0 - p) * b + if k < uniform_over { p / uniform_over as f64 } else { 0.0 })
            .collect(),
        _ => born,
    }
}

/// Counts for one preparation; outcomes not covered by `outcomes` fall into
/// a trailing slot (the `f4` outcome for triple settings).
fn simulate_setting(
    noise: &NoiseConfig,
    stream: u64,
    prep: &PureState,
    outcomes: &[PureState],
    uniform_over: usize,
    with_rest: bool,
) -> Vec<u64> {
    let mut rng = stream_rng(noise.seed, stream);
    let slots = outcomes.len() + usize::from(with_rest);
    let mut counts = vec![0u64; slots];
    let with_tail = |mut p: Vec<f64>| {
        if with_rest {
            let total: f64 = p.iter().sum();
            p.push((1.0 - total).max(0.0));
        }
        p
    };
    match noise.channel {
        NoiseChannel::Misalignment { sigma } => {
            let b = noise.batches as u64;
            let d = prep.dim();
            for k in 0..b {
                let n = noise.shots / b + u64::from(k < noise.shots % b);
                let g = linalg::gaussian_hermitian(d, &mut rng);
                let u = g.scaled(I * sigma).expm();
                let p = with_tail(noisy_probabilities(&noise.channel, prep, outcomes, uniform_over, Some(&u)));
                multinomial(&mut rng, n, &p, &mut counts);
            }
        }
        _ => {
            let p = with_tail(noisy_probabilities(&noise.channel, prep, outcomes, uniform_over, None));
            multinomial(&mut rng, noise.shots, &p, &mut counts);
        }
    }
    counts
}

/// Runs every setting of the design with `noise.shots` shots each.
/// Settings draw from independent streams indexed by their position, so the
/// table does not depend on scheduling.
pub fn run_experiment(design: &Design, noise: &NoiseConfig) -> Result<FrequencyTable> {
    noise.validate()?;
    if design.triples.iter().any(|t| t.basis.len() != 3) {
        return Err(Error::InvalidArgument("design triple is missing its conjugate basis".into()));
    }
    let d = design.dim;
    let nt = design.triples.len();
    let triples = map_indexed(nt, |t| {
        let td = &design.triples[t];
        let preps = [design.vector(td.alpha, td.i), design.vector(td.beta, td.j), &design.c];
        let mut counts = [[0u64; 4]; 3];
        for (k, prep) in preps.iter().enumerate() {
            let c = simulate_setting(noise, (3 * t + k) as u64, prep, &td.basis, 3, true);
            counts[k].copy_from_slice(&c);
        }
        TripleRecord {
            alpha: td.alpha,
            beta: td.beta,
            i: td.i,
            j: td.j,
            counts,
        }
    });
    let nb = design.bases.len();
    let bases = map_indexed(nb * d, |s| {
        let (alpha, i) = (s / d + 1, s % d + 1);
        let basis = design.bases[alpha - 1].vectors();
        BasisRecord {
            alpha,
            i,
            counts: simulate_setting(noise, (3 * nt + s) as u64, &basis[i - 1], basis, d, false),
        }
    });
    Ok(FrequencyTable {
        dim: d,
        shots: noise.shots,
        triples,
        bases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleEps {
    pub alpha: usize,
    pub beta: usize,
    pub i: usize,
    pub j: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEps {
    pub alpha: usize,
    pub i: usize,
    pub j: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub dim: usize,
    pub triples: Vec<TripleEps>,
    pub pairs: Vec<PairEps>,
    /// Mean over the triples (`d^3 (d-1) / 2` of them for a full MUB design).
    pub eps1: f64,
    /// Mean over same-basis pairs (`d^2 (d-1) / 2`).
    pub eps2: f64,
    pub overlap_weight_sum: f64,
}

impl NoiseSummary {
    /// `(1 + 3 sum eps_triples + 2 sum eps_pairs) / sum omega_Q(c, e^alpha_i)`
    pub fn general_k_bound(&self) -> f64 {
        let t: f64 = self.triples.iter().map(|e| e.epsilon).sum();
        let p: f64 = self.pairs.iter().map(|e| e.epsilon).sum();
        (1.0 + 3.0 * t + 2.0 * p) / self.overlap_weight_sum
    }
}

/// Per-triple and per-pair misfire averages and their means.
pub fn aggregate_eps(table: &FrequencyTable, design: &Design) -> Result<NoiseSummary> {
    let d = design.dim;
    let mut triples = Vec::with_capacity(design.triples.len());
    for td in &design.triples {
        let rec = table
            .triples
            .iter()
            .find(|r| (r.alpha, r.beta, r.i, r.j) == (td.alpha, td.beta, td.i, td.j))
            .ok_or_else(|| {
                Error::IncompleteTable(format!(
                    "no record for triple (alpha={}, beta={}, i={}, j={})",
                    td.alpha, td.beta, td.i, td.j
                ))
            })?;
        let r = rec.misfire_frequencies();
        triples.push(TripleEps {
            alpha: td.alpha,
            beta: td.beta,
            i: td.i,
            j: td.j,
            epsilon: (r[0] + r[1] + r[2]) / 3.0,
        });
    }
    let mut pairs = Vec::new();
    for alpha in 1..=design.bases.len() {
        for i in 1..=d {
            for j in i + 1..=d {
                let missing = || Error::IncompleteTable(format!("no record for basis {alpha}, state {i} or {j}"));
                let rji = table.basis_frequency(alpha, i, j).ok_or_else(missing)?;
                let rij = table.basis_frequency(alpha, j, i).ok_or_else(missing)?;
                pairs.push(PairEps {
                    alpha,
                    i,
                    j,
                    epsilon: 0.5 * (rji + rij),
                });
            }
        }
    }
    let mean = |xs: &mut dyn Iterator<Item = f64>, n: usize| if n == 0 { 0.0 } else { xs.sum::<f64>() / n as f64 };
    let eps1 = mean(&mut triples.iter().map(|e| e.epsilon), triples.len());
    let eps2 = mean(&mut pairs.iter().map(|e| e.epsilon), pairs.len());
    Ok(NoiseSummary {
        dim: d,
        triples,
        pairs,
        eps1,
        eps2,
        overlap_weight_sum: design.overlap_weight_sum(),
    })
}

/// Noise-adjusted bound on `k` from measured `eps1`, `eps2`: the tight
/// closed form for prime-power `d >= 4`; for other designs (the
/// three-dimensional one) the general ratio of [`NoiseSummary::general_k_bound`].
pub fn experimental_k_bound(summary: &NoiseSummary) -> Result<f64> {
    if summary.dim >= 4 && is_prime_power(summary.dim) {
        Ok(noisy_bound(summary.dim, summary.eps1, summary.eps2)?.0)
    } else {
        Ok(summary.general_k_bound())
    }
}

/// Expected `(eps1, eps2)` under depolarizing noise `p`, given the
/// noiseless misfire averages of the design.
pub fn depolarizing_prediction(design: &Design, p: f64) -> (f64, f64) {
    let n = design.triples.len().max(1) as f64;
    let eps_q: f64 = design.triples.iter().map(|t| t.epsilon).sum::<f64>() / n;
    ((1.0 - p) * eps_q + p / 3.0, p / design.dim as f64)
}

/// Standard deviations of `(eps1, eps2)` for per-frequency success
/// probabilities `(q1, q2)`, from the binomial variances of the averaged
/// frequencies.
pub fn binomial_sigmas(design: &Design, shots: u64, q1: f64, q2: f64) -> (f64, f64) {
    let n1 = 3.0 * design.triples.len() as f64;
    let pairs = design.bases.len() * design.dim * (design.dim - 1) / 2;
    let n2 = 2.0 * pairs as f64;
    let s = shots as f64;
    ((q1 * (1.0 - q1) / (s * n1)).sqrt(), (q2 * (1.0 - q2) / (s * n2)).sqrt())
}

/// Whether both measured means sit below the common threshold for `d`.
pub fn below_threshold(summary: &NoiseSummary) -> Option<(f64, bool)> {
    noise_threshold(summary.dim)
        .ok()
        .map(|t| (t, summary.eps1 < t && summary.eps2 < t))
}

/// Noiseless misfire probabilities of every triple in the design.
pub fn design_misfires(design: &Design) -> Result<Vec<[f64; 3]>> {
    design
        .triples
        .iter()
        .map(|t| {
            misfire_probabilities(
                [design.vector(t.alpha, t.i), design.vector(t.beta, t.j), &design.c],
                &t.basis,
            )
        })
        .collect()
}
