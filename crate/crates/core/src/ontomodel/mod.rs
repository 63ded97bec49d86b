//! Ontological models: epistemic states `mu_psi` over an ontic space,
//! response functions `xi_M(f|lambda)`, and the checks that relate them to
//! quantum predictions.

mod discrete;
mod ks;
pub mod sphere;
mod suite;

pub use discrete::{DiscreteModel, DiscreteModelJson};
pub use ks::{bloch_vector, ks_model_d2, KsModel, DEFAULT_GRID_RESOLUTION, MIN_GRID_RESOLUTION};
pub use suite::{random_inequality_suite, InequalitySuite, SuiteStats, SLACK_TOL};

use crate::error::{Error, Result};
use crate::qstate::{helstrom_measurement, quantum_overlap, Measurement, PureState};
use serde::{Deserialize, Serialize};

/// Pointwise and normalisation tolerance for states and responses.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Ontic space discretised as weighted points: unit weights for a finite
/// space, quadrature weights for a sampled continuum.
#[derive(Debug, Clone, PartialEq)]
pub struct OnticSpace {
    weights: Vec<f64>,
}

impl OnticSpace {
    pub fn discrete(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidModel("ontic space needs at least one point".into()));
        }
        Ok(Self { weights: vec![1.0; points] })
    }

    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidModel("quadrature weights must be finite and non-negative".into()));
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::SpaceMismatch(format!(
                "values on {n} points, space has {}",
                self.len()
            )));
        }
        Ok(())
    }

    /// `integral min_k mu_k`
    pub fn overlap(&self, states: &[&EpistemicState]) -> Result<f64> {
        if states.is_empty() {
            return Err(Error::InvalidArgument("no states given".into()));
        }
        for s in states {
            self.check(s.values.len())?;
        }
        Ok(self
            .weights
            .iter()
            .enumerate()
            .map(|(p, w)| w * states.iter().map(|s| s.values[p]).fold(f64::INFINITY, f64::min))
            .sum())
    }

    /// `integral xi(f|lambda) mu(lambda)` for every outcome.
    pub fn outcome_probabilities(&self, state: &EpistemicState, response: &ResponseFunction) -> Result<Vec<f64>> {
        self.check(state.values.len())?;
        self.check(response.points())?;
        Ok(response
            .values
            .iter()
            .map(|xi| self.weights.iter().zip(xi).zip(&state.values).map(|((w, x), m)| w * x * m).sum())
            .collect())
    }
}

/// Density of one quantum state over an [`OnticSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EpistemicState {
    values: Vec<f64>,
}

impl EpistemicState {
    /// Validates non-negativity and `sum_p w_p v_p = 1` within
    /// [`NORMALIZATION_TOL`].
    pub fn new(space: &OnticSpace, values: Vec<f64>) -> Result<Self> {
        space.check(values.len())?;
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!("density value {v} is negative or not finite")));
        }
        let total: f64 = space.weights.iter().zip(&values).map(|(w, v)| w * v).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!("density integrates to {total}, not 1")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Per-outcome response values `xi(f|lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResponseFunction {
    values: Vec<Vec<f64>>,
}

impl ResponseFunction {
    /// Validates `0 <= xi <= 1` and `sum_f xi(f|lambda) = 1` at every point.
    pub fn new(space: &OnticSpace, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidModel("response function has no outcomes".into()));
        }
        for v in &values {
            space.check(v.len())?;
            if let Some(x) = v.iter().find(|x| !(-NORMALIZATION_TOL..=1.0 + NORMALIZATION_TOL).contains(*x)) {
                return Err(Error::InvalidModel(format!("response value {x} outside [0, 1]")));
            }
        }
        for p in 0..space.len() {
            let total: f64 = values.iter().map(|v| v[p]).sum();
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidModel(format!(
                    "responses at point {p} sum to {total}, not 1"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn outcomes(&self) -> usize {
        self.values.len()
    }

    pub fn points(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// A model of quantum states and measurements in a fixed dimension.
pub trait OntologicalModel {
    fn dim(&self) -> usize;

    /// `integral xi_M(f|lambda) mu_psi(lambda)` for each effect of `m`, in
    /// effect order.
    fn outcome_probabilities(&self, psi: &PureState, m: &Measurement) -> Result<Vec<f64>>;

    /// `integral min_k mu_{psi_k}`
    fn overlap(&self, states: &[&PureState]) -> Result<f64>;

    /// `integral over supp(mu_phi) of mu_psi`
    fn mass_on_support(&self, psi: &PureState, phi: &PureState) -> Result<f64>;

    /// `mu_{states[0]}`-measure of `{lambda : mu_k(lambda) > tol for all k}`.
    fn support_intersection_measure(&self, states: &[&PureState], tol: f64) -> Result<f64>;
}

/// Largest deviation between model and Born probabilities.
pub fn born_check<M: OntologicalModel + ?Sized>(model: &M, psi: &PureState, m: &Measurement) -> Result<f64> {
    let predicted = model.outcome_probabilities(psi, m)?;
    let born = m.probabilities(psi)?;
    Ok(predicted.iter().zip(&born).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

pub fn overlap_pair<M: OntologicalModel + ?Sized>(model: &M, psi: &PureState, phi: &PureState) -> Result<f64> {
    model.overlap(&[psi, phi])
}

pub fn overlap_triple<M: OntologicalModel + ?Sized>(
    model: &M,
    a: &PureState,
    b: &PureState,
    c: &PureState,
) -> Result<f64> {
    model.overlap(&[a, b, c])
}

pub fn support_intersection_measure<M: OntologicalModel + ?Sized>(
    model: &M,
    states: &[&PureState],
    tol: f64,
) -> Result<f64> {
    model.support_intersection_measure(states, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`
    pub slack: f64,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, slack: rhs - lhs }
    }
}

/// Union-bound inequality for a reference state `c` and families
/// `e^alpha_i` of states:
///
/// ```text
/// sum_{alpha,i} int min(mu_c, mu_{alpha,i})
///   <= int mu_c + sum_{alpha<beta, i, j} int min(mu_c, mu_{alpha,i}, mu_{beta,j})
///               + sum_{alpha, i<j} int min(mu_{alpha,i}, mu_{alpha,j})
/// ```
pub fn bonferroni_check(space: &OnticSpace, c: &EpistemicState, families: &[Vec<EpistemicState>]) -> Result<InequalityCheck> {
    let lhs: f64 = families
        .iter()
        .flatten()
        .map(|e| space.overlap(&[c, e]))
        .sum::<Result<f64>>()?;
    let mut rhs = space.overlap(&[c])?;
    for (a, fa) in families.iter().enumerate() {
        for fb in &families[a + 1..] {
            for ea in fa {
                for eb in fb {
                    rhs += space.overlap(&[c, ea, eb])?;
                }
            }
        }
        for (i, ei) in fa.iter().enumerate() {
            for ej in &fa[i + 1..] {
                rhs += space.overlap(&[ei, ej])?;
            }
        }
    }
    Ok(InequalityCheck::new(lhs, rhs))
}

/// `int min_j mu_j <= sum_i P(f_i | psi_i)` for one response function whose
/// outcome `i` is paired with state `i`.
pub fn response_min_bound(
    space: &OnticSpace,
    states: &[&EpistemicState],
    response: &ResponseFunction,
) -> Result<InequalityCheck> {
    if states.len() != response.outcomes() {
        return Err(Error::InvalidArgument(format!(
            "{} states paired with {} outcomes",
            states.len(),
            response.outcomes()
        )));
    }
    let lhs = space.overlap(states)?;
    let mut rhs = 0.0;
    for (i, s) in states.iter().enumerate() {
        rhs += space.outcome_probabilities(s, response)?[i];
    }
    Ok(InequalityCheck::new(lhs, rhs))
}

/// Model version of [`response_min_bound`]: outcome `i` of `m` is paired
/// with `states[i]` and model probabilities replace frequencies.
pub fn response_min_bound_model<M: OntologicalModel + ?Sized>(
    model: &M,
    states: &[&PureState],
    m: &Measurement,
) -> Result<InequalityCheck> {
    if states.len() != m.effects().len() {
        return Err(Error::InvalidArgument(format!(
            "{} states paired with {} outcomes",
            states.len(),
            m.effects().len()
        )));
    }
    let lhs = model.overlap(states)?;
    let mut rhs = 0.0;
    for (i, s) in states.iter().enumerate() {
        rhs += model.outcome_probabilities(s, m)?[i];
    }
    Ok(InequalityCheck::new(lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub index: usize,
    pub omega_c: f64,
    pub omega_q: f64,
    /// Born residual on the discriminating measurement for the pair.
    pub born_residual: f64,
    pub precondition_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub born_tolerance: f64,
    pub pairs: Vec<PairCheck>,
    /// Largest `omega_C - omega_Q` over pairs passing the Born gate.
    pub worst_violation: f64,
    /// Pairs on which the model fails to reproduce the discriminating
    /// measurement; these are not counterexamples.
    pub precondition_failures: usize,
}

/// Checks `omega_C <= omega_Q` on each pair, gated on the model reproducing
/// the Helstrom measurement for that pair within `born_tol`.
pub fn verify_theorem1<M: OntologicalModel + ?Sized>(
    model: &M,
    pairs: &[(PureState, PureState)],
    born_tol: f64,
) -> Result<Theorem1Report> {
    let mut out = Vec::with_capacity(pairs.len());
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for (index, (psi, phi)) in pairs.iter().enumerate() {
        let m = helstrom_measurement(psi, phi)?;
        let residual = born_check(model, psi, &m)?.max(born_check(model, phi, &m)?);
        let omega_c = overlap_pair(model, psi, phi)?;
        let omega_q = quantum_overlap(psi, phi)?;
        let ok = residual <= born_tol;
        if ok {
            worst = worst.max(omega_c - omega_q);
        } else {
            failures += 1;
        }
        out.push(PairCheck {
            index,
            omega_c,
            omega_q,
            born_residual: residual,
            precondition_ok: ok,
        });
    }
    Ok(Theorem1Report {
        born_tolerance: born_tol,
        pairs: out,
        worst_violation: worst,
        precondition_failures: failures,
    })
}
