//! PP-incompatibility of state triples and numerical search for the
//! conjugate measurement basis.
//!
//! For a triple `(a, b, c)` spanning a three-dimensional subspace, the
//! conjugate basis `{f1, f2, f3}` of that subspace minimises the average
//! misfire probability
//!
//! ```text
//! eps = (P(f1|a) + P(f2|b) + P(f3|c)) / 3
//! ```
//!
//! which vanishes exactly when the triple is PP-incompatible. The search runs
//! Nelder–Mead over the chart `U0 exp(i H)`, where `U0` is a Haar-random
//! reference frame of the span and `H` is a zero-diagonal Hermitian 3x3
//! matrix (6 real parameters; per-vector phases do not affect `eps`).

use crate::config::EPSILON_CONVERGENCE;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, I};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::qstate::{check_dims, fidelity, Effect, Measurement, PureState};
use crate::rng::{map_indexed, stream_rng};
use serde::{Deserialize, Serialize};

/// Misfire sums at or below this count as exact zeros and end the search.
pub const ZERO_TARGET: f64 = 1e-20;

/// Relative Gram–Schmidt residual below which a triple counts as spanning
/// fewer than three dimensions.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Pairwise fidelities `x1 = |<a|b>|^2`, `x2 = |<b|c>|^2`, `x3 = |<c|a>|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleOverlaps {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl TripleOverlaps {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        for x in [x1, x2, x3] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidArgument(format!("overlap {x} outside [0, 1]")));
            }
        }
        Ok(Self { x1, x2, x3 })
    }

    pub fn sum(&self) -> f64 {
        self.x1 + self.x2 + self.x3
    }

    /// `(x1 + x2 + x3 - 1)^2 - 4 x1 x2 x3`; non-negative on the admissible side.
    pub fn cubic_margin(&self) -> f64 {
        (self.sum() - 1.0).powi(2) - 4.0 * self.x1 * self.x2 * self.x3
    }
}

fn span_frame(a: &PureState, b: &PureState, c: &PureState) -> Result<Vec<Vec<C64>>> {
    check_dims(a.dim(), b.dim())?;
    check_dims(a.dim(), c.dim())?;
    if a.dim() < 3 {
        return Err(Error::DegenerateSpan { residual: 0.0 });
    }
    let gs = linalg::gram_schmidt(
        &[a.amplitudes().to_vec(), b.amplitudes().to_vec(), c.amplitudes().to_vec()],
        DEGENERACY_TOL,
    );
    if gs.vectors.len() < 3 {
        return Err(Error::DegenerateSpan {
            residual: gs.min_residual(),
        });
    }
    Ok(gs.vectors)
}

/// Pairwise fidelities of a triple; fails when the span is not 3-dimensional.
pub fn triple_overlaps(a: &PureState, b: &PureState, c: &PureState) -> Result<TripleOverlaps> {
    span_frame(a, b, c)?;
    Ok(TripleOverlaps {
        x1: fidelity(a, b)?,
        x2: fidelity(b, c)?,
        x3: fidelity(c, a)?,
    })
}

/// Rounding allowance on the cubic condition, so that triples on the
/// boundary (unbiased triples in dimension 4) are classified by their exact
/// value.
pub const PREDICATE_TOL: f64 = 1e-12;

/// `x1 + x2 + x3 < 1` and `(x1 + x2 + x3 - 1)^2 >= 4 x1 x2 x3`.
pub fn pp_incompatible(x: &TripleOverlaps) -> bool {
    x.sum() < 1.0 && x.cubic_margin() >= -PREDICATE_TOL
}

/// Outcome of a conjugate-basis search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateBasisResult {
    /// `f1, f2, f3`, an orthonormal basis of `span{a, b, c}`.
    pub basis: Vec<PureState>,
    /// `(P(f1|a), P(f2|b), P(f3|c))`
    pub misfires: [f64; 3],
    pub epsilon: f64,
    /// `3 * epsilon`
    pub triple_sum: f64,
    pub converged: bool,
    pub restarts_used: usize,
    /// Restarts whose local minimum is within 1e-9 of the best one.
    pub agreeing_restarts: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    pub local: NelderMeadOptions,
    /// Extra Nelder–Mead passes re-centred on the incumbent.
    pub polish_rounds: usize,
}

impl SearchOptions {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            local: NelderMeadOptions {
                f_target: ZERO_TARGET,
                ..NelderMeadOptions::default()
            },
            polish_rounds: 2,
        }
    }
}

/// Misfire probabilities `(P(f1|a), P(f2|b), P(f3|c))` of a frame.
pub fn misfire_probabilities(states: [&PureState; 3], frame: &[PureState]) -> Result<[f64; 3]> {
    if frame.len() != 3 {
        return Err(Error::InvalidBasis(format!("expected 3 frame vectors, got {}", frame.len())));
    }
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = fidelity(&frame[k], states[k])?;
    }
    Ok(out)
}

struct LocalRun {
    value: f64,
    frame: CMatrix,
    converged: bool,
}

/// Sum of misfires for the frame `U` in span coordinates.
fn misfire_sum(u: &CMatrix, coords: &[[C64; 3]; 3]) -> f64 {
    (0..3)
        .map(|k| {
            let amp: C64 = (0..3).map(|r| u[(r, k)].conj() * coords[k][r]).sum();
            amp.norm_sqr()
        })
        .sum()
}

fn local_search(start: CMatrix, coords: &[[C64; 3]; 3], opts: &SearchOptions) -> LocalRun {
    let chart = |u0: &CMatrix, p: &[f64]| u0 * &linalg::offdiag_hermitian(3, p).scaled(I).expm();
    let mut frame = start;
    let mut best = misfire_sum(&frame, coords);
    let mut converged = false;
    let mut step = opts.local.initial_step;
    for _ in 0..=opts.polish_rounds {
        let local = NelderMeadOptions {
            initial_step: step,
            ..opts.local
        };
        let m = nelder_mead(|p| misfire_sum(&chart(&frame, p), coords), &[0.0; 6], &local);
        if m.value <= best {
            frame = chart(&frame, &m.x);
            best = misfire_sum(&frame, coords);
        }
        converged = m.converged;
        if best <= opts.local.f_target {
            break;
        }
        step *= 0.1;
    }
    LocalRun {
        value: best,
        frame,
        converged,
    }
}

/// Multi-start search with the default local options.
pub fn find_conjugate_basis(
    a: &PureState,
    b: &PureState,
    c: &PureState,
    restarts: usize,
    seed: u64,
) -> Result<ConjugateBasisResult> {
    find_conjugate_basis_with(a, b, c, &SearchOptions::new(restarts, seed))
}

pub fn find_conjugate_basis_with(
    a: &PureState,
    b: &PureState,
    c: &PureState,
    opts: &SearchOptions,
) -> Result<ConjugateBasisResult> {
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let q = span_frame(a, b, c)?;
    let states = [a, b, c];
    let mut coords = [[linalg::ZERO; 3]; 3];
    for k in 0..3 {
        for r in 0..3 {
            coords[k][r] = linalg::inner(&q[r], states[k].amplitudes());
        }
    }

    let runs = map_indexed(opts.restarts, |r| {
        let mut rng = stream_rng(opts.seed, r as u64);
        local_search(linalg::haar_unitary(3, &mut rng), &coords, opts)
    });
    let (_, best) = runs
        .iter()
        .enumerate()
        .min_by(|(i, x), (j, y)| x.value.total_cmp(&y.value).then(i.cmp(j)))
        .expect("at least one restart");
    let agreeing = runs.iter().filter(|r| r.value <= best.value + 1e-9).count();

    // lift the 3x3 frame back to C^d
    let d = a.dim();
    let basis = (0..3)
        .map(|k| {
            let v: Vec<C64> = (0..d)
                .map(|i| (0..3).map(|r| best.frame[(r, k)] * q[r][i]).sum())
                .collect();
            PureState::normalized(v)
        })
        .collect::<Result<Vec<_>>>()?;
    let misfires = misfire_probabilities(states, &basis)?;
    let triple_sum: f64 = misfires.iter().sum();
    let epsilon = triple_sum / 3.0;
    let x = triple_overlaps(a, b, c)?;
    let converged = best.converged && (!pp_incompatible(&x) || epsilon < EPSILON_CONVERGENCE);
    Ok(ConjugateBasisResult {
        basis,
        misfires,
        epsilon,
        triple_sum,
        converged,
        restarts_used: opts.restarts,
        agreeing_restarts: agreeing,
    })
}

/// Four-outcome projective measurement `{f1, f2, f3, f4}` on `C^d`, where
/// `f4` projects onto the orthogonal complement of the span (rank `d - 3`,
/// empty when `d = 3`).
pub fn full_measurement(
    a: &PureState,
    b: &PureState,
    c: &PureState,
    basis: &ConjugateBasisResult,
    d: usize,
) -> Result<Measurement> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!("dimension {d} is below 3")));
    }
    for s in [a, b, c] {
        check_dims(d, s.dim())?;
    }
    if basis.basis.len() != 3 {
        return Err(Error::InvalidBasis("conjugate basis must have 3 vectors".into()));
    }
    let span: Vec<Vec<C64>> = basis.basis.iter().map(|v| v.amplitudes().to_vec()).collect();
    let complement = linalg::orthogonal_complement(&span, d)
        .into_iter()
        .map(PureState::normalized)
        .collect::<Result<Vec<_>>>()?;
    let mut effects: Vec<Effect> = basis
        .basis
        .iter()
        .enumerate()
        .map(|(k, v)| Effect {
            label: format!("f{}", k + 1),
            vectors: vec![v.clone()],
        })
        .collect();
    effects.push(Effect {
        label: "f4".into(),
        vectors: complement,
    });
    Measurement::new(d, effects, true)
}
