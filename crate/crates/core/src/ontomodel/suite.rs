//! Seeded random discrete instances for the two ontic inequalities.

use super::{bonferroni_check, response_min_bound, EpistemicState, OnticSpace, ResponseFunction};
use crate::error::{Error, Result};
use crate::rng::{map_indexed, stream_rng};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Slack below which an instance counts as a violation.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteStats {
    pub instances: usize,
    pub min_slack: f64,
    pub mean_slack: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySuite {
    pub points: usize,
    pub seed: u64,
    /// Reference state plus two families of three states.
    pub union_bound: SuiteStats,
    pub response_bound: SuiteStats,
    pub passes: bool,
}

fn random_state<R: Rng>(space: &OnticSpace, rng: &mut R) -> Result<EpistemicState> {
    let n = space.len();
    let keep = rng.random_range(0.05..1.0);
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(keep) { rng.random::<f64>() } else { 0.0 })
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        w[rng.random_range(0..n)] = 1.0;
    }
    let s: f64 = w.iter().sum();
    EpistemicState::new(space, w.iter().map(|x| x / s).collect())
}

fn random_response<R: Rng>(space: &OnticSpace, outcomes: usize, rng: &mut R) -> Result<ResponseFunction> {
    let n = space.len();
    let mut values = vec![vec![0.0; n]; outcomes];
    for p in 0..n {
        let raw: Vec<f64> = (0..outcomes).map(|_| rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        for (k, r) in raw.iter().enumerate() {
            values[k][p] = r / s;
        }
    }
    ResponseFunction::new(space, values)
}

fn stats(slacks: &[f64]) -> SuiteStats {
    SuiteStats {
        instances: slacks.len(),
        min_slack: slacks.iter().copied().fold(f64::INFINITY, f64::min),
        mean_slack: slacks.iter().sum::<f64>() / slacks.len().max(1) as f64,
        violations: slacks.iter().filter(|s| **s < -SLACK_TOL).count(),
    }
}

/// Runs `union` union-bound instances and `response` response-bound
/// instances on a uniform space of `points` points. Instance `t` draws from
/// its own stream, so results do not depend on scheduling.
pub fn random_inequality_suite(union: usize, response: usize, points: usize, seed: u64) -> Result<InequalitySuite> {
    if points == 0 {
        return Err(Error::InvalidArgument("ontic space needs at least one point".into()));
    }
    let space = OnticSpace::discrete(points)?;
    let u: Vec<f64> = map_indexed(union, |t| -> Result<f64> {
        let mut rng = stream_rng(seed, t as u64);
        let c = random_state(&space, &mut rng)?;
        let families = (0..2)
            .map(|_| (0..3).map(|_| random_state(&space, &mut rng)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(bonferroni_check(&space, &c, &families)?.slack)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let r: Vec<f64> = map_indexed(response, |t| -> Result<f64> {
        let mut rng = stream_rng(seed, (1 << 32) + t as u64);
        let n = rng.random_range(2..=4);
        let states = (0..n).map(|_| random_state(&space, &mut rng)).collect::<Result<Vec<_>>>()?;
        let xi = random_response(&space, n, &mut rng)?;
        let refs: Vec<&EpistemicState> = states.iter().collect();
        Ok(response_min_bound(&space, &refs, &xi)?.slack)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let (union_bound, response_bound) = (stats(&u), stats(&r));
    let passes = union_bound.violations == 0 && response_bound.violations == 0;
    Ok(InequalitySuite {
        points,
        seed,
        union_bound,
        response_bound,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_reproducible_and_clean() {
        let a = random_inequality_suite(20, 10, 12, 5).unwrap();
        assert_eq!(a, random_inequality_suite(20, 10, 12, 5).unwrap());
        assert!(a.passes);
        assert_eq!(a.union_bound.instances, 20);
        assert!(random_inequality_suite(1, 1, 0, 5).is_err());
    }
}
