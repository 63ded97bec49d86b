//! Ontological models on a finite ontic space, loadable from JSON:
//!
//! ```json
//! {
//!   "points": 3,
//!   "states": {"psi": [0.5, 0.5, 0.0]},
//!   "responses": {"Z": {"0": [1, 0, 0], "1": [0, 1, 1]}},
//!   "dim": 2,
//!   "kets": {"psi": [[1, 0], [0, 0]]},
//!   "measurements": {"Z": {"0": [[[1, 0], [0, 0]]], "1": [[[0, 0], [1, 0]]]}}
//! }
//! ```
//!
//! `dim`, `kets` and `measurements` are optional; without them the model can
//! only be queried by label. Each measurement outcome lists the kets spanning
//! its projector.

use super::{EpistemicState, OnticSpace, OntologicalModel, ResponseFunction};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::qstate::{fidelity, Effect, Measurement, PureState};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Fidelity above which a queried state is identified with a model ket.
const SAME_RAY: f64 = 1e-9;

type Ket = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModelJson {
    pub points: usize,
    pub states: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub responses: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub kets: BTreeMap<String, Ket>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measurements: BTreeMap<String, BTreeMap<String, Vec<Ket>>>,
}

#[derive(Debug, Clone)]
struct Response {
    outcomes: Vec<String>,
    function: ResponseFunction,
}

#[derive(Debug, Clone)]
pub struct DiscreteModel {
    space: OnticSpace,
    dim: Option<usize>,
    states: BTreeMap<String, EpistemicState>,
    responses: BTreeMap<String, Response>,
    kets: BTreeMap<String, PureState>,
    measurements: BTreeMap<String, Measurement>,
}

fn to_state(ket: &Ket) -> Result<PureState> {
    PureState::normalized(ket.iter().map(|&[re, im]| C64::new(re, im)).collect())
}

fn from_state(s: &PureState) -> Ket {
    s.amplitudes().iter().map(|z| [z.re, z.im]).collect()
}

impl DiscreteModel {
    pub fn from_json(raw: DiscreteModelJson) -> Result<Self> {
        let space = OnticSpace::discrete(raw.points)?;
        let states = raw
            .states
            .into_iter()
            .map(|(k, v)| {
                EpistemicState::new(&space, v)
                    .map(|s| (k.clone(), s))
                    .map_err(|e| Error::InvalidModel(format!("state {k}: {e}")))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        let responses = raw
            .responses
            .into_iter()
            .map(|(k, outcomes)| {
                let (labels, values): (Vec<String>, Vec<Vec<f64>>) = outcomes.into_iter().unzip();
                let function =
                    ResponseFunction::new(&space, values).map_err(|e| Error::InvalidModel(format!("measurement {k}: {e}")))?;
                Ok((k, Response { outcomes: labels, function }))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;

        let quantum = !raw.kets.is_empty() || !raw.measurements.is_empty();
        let dim = match (raw.dim, quantum) {
            (None, true) => return Err(Error::InvalidModel("\"dim\" is required with kets or measurements".into())),
            (d, _) => d,
        };
        let mut kets = BTreeMap::new();
        for (k, ket) in &raw.kets {
            if !states.contains_key(k) {
                return Err(Error::InvalidModel(format!("ket {k} has no epistemic state")));
            }
            let s = to_state(ket)?;
            if Some(s.dim()) != dim {
                return Err(Error::InvalidModel(format!("ket {k} has dimension {}", s.dim())));
            }
            kets.insert(k.clone(), s);
        }
        let mut measurements = BTreeMap::new();
        for (k, outcomes) in raw.measurements {
            let response = responses
                .get(&k)
                .ok_or_else(|| Error::InvalidModel(format!("measurement {k} has no response function")))?;
            let labels: Vec<&String> = outcomes.keys().collect();
            if labels.iter().map(|s| s.as_str()).ne(response.outcomes.iter().map(String::as_str)) {
                return Err(Error::InvalidModel(format!("measurement {k}: outcomes differ from its responses")));
            }
            let effects = outcomes
                .into_iter()
                .map(|(label, vs)| {
                    Ok(Effect {
                        label,
                        vectors: vs.iter().map(to_state).collect::<Result<_>>()?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let m = Measurement::new(dim.unwrap_or(0), effects, true)
                .map_err(|e| Error::InvalidModel(format!("measurement {k}: {e}")))?;
            measurements.insert(k, m);
        }
        Ok(Self {
            space,
            dim,
            states,
            responses,
            kets,
            measurements,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: DiscreteModelJson =
            serde_json::from_str(text).map_err(|e| Error::InvalidModel(format!("malformed model file: {e}")))?;
        Self::from_json(raw)
    }

    pub fn to_json(&self) -> DiscreteModelJson {
        DiscreteModelJson {
            points: self.space.len(),
            states: self.states.iter().map(|(k, s)| (k.clone(), s.values().to_vec())).collect(),
            responses: self
                .responses
                .iter()
                .map(|(k, r)| {
                    (
                        k.clone(),
                        r.outcomes.iter().cloned().zip(r.function.values().iter().cloned()).collect(),
                    )
                })
                .collect(),
            dim: self.dim,
            kets: self.kets.iter().map(|(k, s)| (k.clone(), from_state(s))).collect(),
            measurements: self
                .measurements
                .iter()
                .map(|(k, m)| {
                    (
                        k.clone(),
                        m.effects()
                            .iter()
                            .map(|e| (e.label.clone(), e.vectors.iter().map(from_state).collect()))
                            .collect(),
                    )
                })
                .collect(),
        }
    }

    /// One ontic point per state; the state sits on its point and responses
    /// at that point are the Born probabilities.
    pub fn psi_ontic(states: &[(String, PureState)], measurements: &[(String, Measurement)]) -> Result<Self> {
        let n = states.len();
        let dim = states
            .first()
            .map(|(_, s)| s.dim())
            .ok_or_else(|| Error::InvalidModel("no states".into()))?;
        let mut raw = DiscreteModelJson {
            points: n,
            states: BTreeMap::new(),
            responses: BTreeMap::new(),
            dim: Some(dim),
            kets: BTreeMap::new(),
            measurements: BTreeMap::new(),
        };
        for (p, (label, s)) in states.iter().enumerate() {
            let mut w = vec![0.0; n];
            w[p] = 1.0;
            raw.states.insert(label.clone(), w);
            raw.kets.insert(label.clone(), from_state(s));
        }
        for (label, m) in measurements {
            let mut per_outcome: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            let mut kets: BTreeMap<String, Vec<Ket>> = BTreeMap::new();
            for e in m.effects() {
                per_outcome.insert(e.label.clone(), states.iter().map(|(_, s)| e.probability(s)).collect());
                kets.insert(e.label.clone(), e.vectors.iter().map(from_state).collect());
            }
            raw.responses.insert(label.clone(), per_outcome);
            raw.measurements.insert(label.clone(), kets);
        }
        Self::from_json(raw)
    }

    pub fn space(&self) -> &OnticSpace {
        &self.space
    }

    pub fn state(&self, label: &str) -> Option<&EpistemicState> {
        self.states.get(label)
    }

    pub fn state_labels(&self) -> impl Iterator<Item = &str> {
        self.states.keys().map(String::as_str)
    }

    pub fn response(&self, label: &str) -> Option<&ResponseFunction> {
        self.responses.get(label).map(|r| &r.function)
    }

    /// States with a ket attached, in label order.
    pub fn kets(&self) -> impl Iterator<Item = (&str, &PureState)> {
        self.kets.iter().map(|(k, s)| (k.as_str(), s))
    }

    pub fn measurements(&self) -> impl Iterator<Item = (&str, &Measurement)> {
        self.measurements.iter().map(|(k, m)| (k.as_str(), m))
    }

    fn lookup_state(&self, psi: &PureState) -> Result<&EpistemicState> {
        let label = self
            .kets
            .iter()
            .find(|(_, k)| k.dim() == psi.dim() && fidelity(k, psi).map(|f| f >= 1.0 - SAME_RAY).unwrap_or(false))
            .map(|(l, _)| l)
            .ok_or_else(|| Error::Unsupported("state is not represented in the model".into()))?;
        Ok(&self.states[label])
    }

    /// Response rows of a stored measurement, in the effect order of `m`.
    fn lookup_response(&self, m: &Measurement) -> Result<Vec<&[f64]>> {
        let same = |a: &Effect, b: &Effect| a.rank() == b.rank() && b.vectors.iter().all(|v| (a.probability(v) - 1.0).abs() < SAME_RAY);
        for (label, stored) in &self.measurements {
            if stored.dim() != m.dim() || stored.effects().len() != m.effects().len() {
                continue;
            }
            let rows: Option<Vec<usize>> = m
                .effects()
                .iter()
                .map(|e| stored.effects().iter().position(|s| same(s, e)))
                .collect();
            if let Some(rows) = rows {
                let values = self.responses[label].function.values();
                return Ok(rows.into_iter().map(|r| values[r].as_slice()).collect());
            }
        }
        Err(Error::Unsupported("measurement is not represented in the model".into()))
    }
}

impl OntologicalModel for DiscreteModel {
    fn dim(&self) -> usize {
        self.dim.unwrap_or(0)
    }

    fn outcome_probabilities(&self, psi: &PureState, m: &Measurement) -> Result<Vec<f64>> {
        let mu = self.lookup_state(psi)?;
        Ok(self
            .lookup_response(m)?
            .into_iter()
            .map(|xi| xi.iter().zip(mu.values()).map(|(x, w)| x * w).sum())
            .collect())
    }

    fn overlap(&self, states: &[&PureState]) -> Result<f64> {
        let mus = states.iter().map(|s| self.lookup_state(s)).collect::<Result<Vec<_>>>()?;
        self.space.overlap(&mus)
    }

    fn mass_on_support(&self, psi: &PureState, phi: &PureState) -> Result<f64> {
        let (a, b) = (self.lookup_state(psi)?, self.lookup_state(phi)?);
        Ok(a.values().iter().zip(b.values()).filter(|(_, w)| **w > 0.0).map(|(v, _)| v).sum())
    }

    fn support_intersection_measure(&self, states: &[&PureState], tol: f64) -> Result<f64> {
        let mus = states.iter().map(|s| self.lookup_state(s)).collect::<Result<Vec<_>>>()?;
        let first = mus.first().ok_or_else(|| Error::InvalidArgument("no states given".into()))?;
        Ok((0..self.space.len())
            .filter(|&p| mus.iter().all(|m| m.values()[p] > tol))
            .map(|p| first.values()[p])
            .sum())
    }
}
