//! Pure states, orthonormal bases, projective measurements and the
//! distance/overlap functionals between states and between distributions.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::rng::stream_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Unit vector in `C^dim`, `dim >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct PureState {
    amplitudes: Vec<C64>,
}

/// Wire form of a state: `{"dim": d, "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateJson {
    fn to_amplitudes(&self) -> Result<Vec<C64>> {
        if self.amplitudes.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: self.amplitudes.len(),
            });
        }
        Ok(self.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect())
    }

    /// Parses and rescales to unit norm; for hand-written inputs.
    pub fn into_normalized(self) -> Result<PureState> {
        PureState::normalized(self.to_amplitudes()?)
    }
}

impl TryFrom<StateJson> for PureState {
    type Error = Error;
    fn try_from(value: StateJson) -> Result<Self> {
        PureState::new(value.to_amplitudes()?)
    }
}

impl From<PureState> for StateJson {
    fn from(s: PureState) -> Self {
        StateJson {
            dim: s.dim(),
            amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl PureState {
    /// Validates `dim >= 2` and unit norm within the default tolerance.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_tolerances(amplitudes, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(amplitudes: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidState(format!(
                "dimension must be at least 2, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let n2 = linalg::norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > tol.normalization {
            return Err(Error::InvalidState(format!(
                "squared norm {n2} differs from 1 by more than {}",
                tol.normalization
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = linalg::norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalise a zero or non-finite vector".into()));
        }
        let inv = C64::new(1.0 / n, 0.0);
        let scaled = amplitudes.into_iter().map(|z| z * inv).collect::<Vec<_>>();
        // renormalisation leaves a residual of order 1e-16
        Self::new(scaled)
    }

    /// Standard basis vector `|k>` of `C^dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidArgument(format!("index {k} out of range for dimension {dim}")));
        }
        let mut v = vec![linalg::ZERO; dim];
        v[k] = linalg::ONE;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(linalg::inner(&self.amplitudes, &other.amplitudes))
    }

    /// Multiplies by a global phase `e^{i theta}`.
    pub fn with_phase(&self, theta: f64) -> PureState {
        let p = C64::from_polar(1.0, theta);
        PureState {
            amplitudes: self.amplitudes.iter().map(|z| z * p).collect(),
        }
    }

    /// Applies a unitary (assumed unitary; renormalises rounding drift).
    pub fn transformed(&self, u: &CMatrix) -> Result<PureState> {
        check_dims(u.dim(), self.dim())?;
        PureState::normalized(u.apply(&self.amplitudes))
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `dim` mutually orthogonal unit vectors of `C^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BasisJson", into = "BasisJson")]
pub struct OrthonormalBasis {
    vectors: Vec<PureState>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisJson {
    pub dim: usize,
    pub vectors: Vec<PureState>,
}

impl TryFrom<BasisJson> for OrthonormalBasis {
    type Error = Error;
    fn try_from(value: BasisJson) -> Result<Self> {
        let b = OrthonormalBasis::new(value.vectors)?;
        check_dims(value.dim, b.dim())?;
        Ok(b)
    }
}

impl From<OrthonormalBasis> for BasisJson {
    fn from(b: OrthonormalBasis) -> Self {
        BasisJson {
            dim: b.dim(),
            vectors: b.vectors,
        }
    }
}

impl OrthonormalBasis {
    pub fn new(vectors: Vec<PureState>) -> Result<Self> {
        Self::with_tolerances(vectors, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(vectors: Vec<PureState>, tol: &Tolerances) -> Result<Self> {
        let dim = vectors.first().map(|v| v.dim()).unwrap_or(0);
        if vectors.len() != dim || dim < 2 {
            return Err(Error::InvalidBasis(format!(
                "expected {dim} vectors of dimension {dim}, got {}",
                vectors.len()
            )));
        }
        for v in &vectors {
            check_dims(dim, v.dim())?;
        }
        let defect = orthonormality_defect(&vectors);
        if defect > tol.orthogonality {
            return Err(Error::InvalidBasis(format!(
                "vectors are not orthonormal (max |<v_i|v_j>| = {defect:.3e})"
            )));
        }
        Ok(Self { vectors })
    }

    /// Columns of a unitary matrix.
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        let vectors = u
            .columns()
            .into_iter()
            .map(PureState::normalized)
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }

    pub fn standard(dim: usize) -> Result<Self> {
        Self::new((0..dim).map(|k| PureState::basis(dim, k)).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[PureState] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &PureState {
        &self.vectors[i]
    }

    pub fn to_unitary(&self) -> CMatrix {
        let cols: Vec<Vec<C64>> = self.vectors.iter().map(|v| v.amplitudes().to_vec()).collect();
        CMatrix::from_columns(&cols)
    }
}

/// Largest `|<v_i|v_j> - delta_ij|` over the set.
pub fn orthonormality_defect(vectors: &[PureState]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let ip = linalg::inner(a.amplitudes(), b.amplitudes());
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((ip - target).norm());
        }
    }
    worst
}

/// One outcome of a projective measurement: the projector onto the span of
/// an orthonormal set (possibly empty for a rank-zero outcome).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub label: String,
    pub vectors: Vec<PureState>,
}

impl Effect {
    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// `<psi| P |psi>`.
    pub fn probability(&self, psi: &PureState) -> f64 {
        self.vectors
            .iter()
            .map(|v| linalg::inner(v.amplitudes(), psi.amplitudes()).norm_sqr())
            .sum()
    }
}

/// Projective measurement with labelled, mutually orthogonal effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    dim: usize,
    effects: Vec<Effect>,
    complete: bool,
}

impl Measurement {
    /// Validates mutual orthogonality of all spanning vectors and, when
    /// `complete` is set, that the projectors sum to the identity.
    pub fn new(dim: usize, effects: Vec<Effect>, complete: bool) -> Result<Self> {
        let tol = Tolerances::DEFAULT;
        let all: Vec<PureState> = effects.iter().flat_map(|e| e.vectors.iter().cloned()).collect();
        for v in &all {
            check_dims(dim, v.dim())?;
        }
        if all.len() > dim {
            return Err(Error::InvalidMeasurement(format!(
                "{} spanning vectors exceed dimension {dim}",
                all.len()
            )));
        }
        let defect = orthonormality_defect(&all);
        if defect > tol.orthogonality {
            return Err(Error::InvalidMeasurement(format!(
                "projectors are not mutually orthogonal (defect {defect:.3e})"
            )));
        }
        if complete && all.len() != dim {
            return Err(Error::InvalidMeasurement(format!(
                "effects span rank {} but completeness requires {dim}",
                all.len()
            )));
        }
        Ok(Self { dim, effects, complete })
    }

    /// Rank-one measurement in an orthonormal basis; outcomes labelled `0..d`.
    pub fn projective(basis: &OrthonormalBasis) -> Self {
        let effects = basis
            .vectors()
            .iter()
            .enumerate()
            .map(|(i, v)| Effect {
                label: i.to_string(),
                vectors: vec![v.clone()],
            })
            .collect();
        Self {
            dim: basis.dim(),
            effects,
            complete: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Outcome probabilities in effect order.
    pub fn probabilities(&self, psi: &PureState) -> Result<Vec<f64>> {
        check_dims(self.dim, psi.dim())?;
        Ok(self.effects.iter().map(|e| e.probability(psi)).collect())
    }

    /// True when both measurements have the same projectors, outcome by
    /// outcome (phases and spanning sets may differ).
    pub fn same_projectors(&self, other: &Measurement, tol: f64) -> bool {
        if self.dim != other.dim || self.effects.len() != other.effects.len() {
            return false;
        }
        self.effects.iter().zip(&other.effects).all(|(a, b)| {
            a.rank() == b.rank()
                && b.vectors.iter().all(|v| (a.probability(v) - 1.0).abs() < tol)
        })
    }
}

/// Probability mass function on `n` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl TryFrom<Vec<f64>> for DiscreteDistribution {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        DiscreteDistribution::new(w)
    }
}

impl From<DiscreteDistribution> for Vec<f64> {
    fn from(d: DiscreteDistribution) -> Self {
        d.weights
    }
}

impl DiscreteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDistribution("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > Tolerances::DEFAULT.normalization {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Rescales non-negative weights to sum 1.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        let mut w: Vec<f64> = weights.iter().map(|x| x / total).collect();
        let s: f64 = w.iter().sum();
        // absorb rounding into the largest entry
        if let Some(m) = w.iter_mut().max_by(|a, b| a.total_cmp(b)) {
            *m += 1.0 - s;
        }
        Self::new(w)
    }

    pub fn uniform_on(n: usize, support: &[usize]) -> Result<Self> {
        let mut w = vec![0.0; n];
        for &i in support {
            w[i] = 1.0;
        }
        Self::normalized(w)
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
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// `|<f|psi>|^2`, the Born probability of outcome `f` on preparation `psi`.
pub fn born_probability(f: &PureState, psi: &PureState) -> Result<f64> {
    fidelity(f, psi)
}

/// `sqrt(1 - |<a|b>|^2)`.
pub fn quantum_trace_distance(a: &PureState, b: &PureState) -> Result<f64> {
    Ok((1.0 - fidelity(a, b)?).max(0.0).sqrt())
}

/// `1 - sqrt(1 - |<a|b>|^2)`.
pub fn quantum_overlap(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(1.0 - quantum_trace_distance(a, b)?)
}

/// Quantum overlap as a function of the fidelity alone.
pub fn quantum_overlap_from_fidelity(fid: f64) -> f64 {
    1.0 - (1.0 - fid).max(0.0).sqrt()
}

/// Optimal single-shot success probability for telling `a` from `b` with
/// equal priors.
pub fn helstrom_success(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(0.5 * (1.0 + quantum_trace_distance(a, b)?))
}

/// `sum_i min(p_i, q_i)`.
pub fn classical_overlap(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_support(p, q)?;
    let s: f64 = p.weights.iter().zip(&q.weights).map(|(a, b)| a.min(*b)).sum();
    Ok(s.clamp(0.0, 1.0))
}

/// `(1/2) sum_i |p_i - q_i|`.
pub fn classical_trace_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_support(p, q)?;
    let s: f64 = p.weights.iter().zip(&q.weights).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * s).clamp(0.0, 1.0))
}

fn check_support(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::InvalidDistribution(format!(
            "support sizes differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// Matrix of `<a_i|a_j>`.
pub fn gram_matrix(states: &[PureState]) -> Result<CMatrix> {
    let n = states.len();
    let mut g = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = states[i].inner(&states[j])?;
        }
    }
    Ok(g)
}

/// Helstrom measurement for `a` vs `b`: eigenbasis of `|a><a| - |b><b|`
/// inside their span, plus the complement folded into the first outcome.
/// Outcome 0 guesses `a`, outcome 1 guesses `b`.
pub fn helstrom_measurement(a: &PureState, b: &PureState) -> Result<Measurement> {
    check_dims(a.dim(), b.dim())?;
    let d = a.dim();
    let gs = linalg::gram_schmidt(&[a.amplitudes().to_vec(), b.amplitudes().to_vec()], 1e-12);
    let mut guess_a: Vec<Vec<C64>>;
    let mut guess_b: Vec<Vec<C64>> = Vec::new();
    if gs.vectors.len() < 2 {
        // identical rays: any guess succeeds half the time
        guess_a = vec![gs.vectors[0].clone()];
    } else {
        // coordinates in {q0 = a, q1}
        let q0 = &gs.vectors[0];
        let q1 = &gs.vectors[1];
        let b0 = linalg::inner(q0, b.amplitudes());
        let b1 = linalg::inner(q1, b.amplitudes());
        // 2x2 Hermitian M = |e0><e0| - |b><b| with a = e0
        let m00 = 1.0 - b0.norm_sqr();
        let m11 = -b1.norm_sqr();
        let m01 = -(b0 * b1.conj());
        let tr = m00 + m11;
        let det = m00 * m11 - m01.norm_sqr();
        let disc = ((tr * tr) / 4.0 - det).max(0.0).sqrt();
        let lam_plus = tr / 2.0 + disc;
        // eigenvector for lam_plus: (m01, lam - m00) or (lam - m11, conj(m01))
        let v = if (lam_plus - m11).abs() > 1e-14 {
            vec![C64::new(lam_plus - m11, 0.0), m01.conj()]
        } else {
            vec![m01, C64::new(lam_plus - m00, 0.0)]
        };
        let nv = linalg::norm(&v);
        let (v0, v1) = (v[0] / nv, v[1] / nv);
        let plus: Vec<C64> = q0.iter().zip(q1).map(|(x, y)| x * v0 + y * v1).collect();
        let minus: Vec<C64> = q0
            .iter()
            .zip(q1)
            .map(|(x, y)| x * (-v1.conj()) + y * v0.conj())
            .collect();
        guess_a = vec![plus];
        guess_b.push(minus);
    }
    let spanned: Vec<Vec<C64>> = guess_a.iter().chain(guess_b.iter()).cloned().collect();
    guess_a.extend(linalg::orthogonal_complement(&spanned, d));
    let to_states = |vs: Vec<Vec<C64>>| vs.into_iter().map(PureState::normalized).collect::<Result<Vec<_>>>();
    Measurement::new(
        d,
        vec![
            Effect {
                label: "guess_a".into(),
                vectors: to_states(guess_a)?,
            },
            Effect {
                label: "guess_b".into(),
                vectors: to_states(guess_b)?,
            },
        ],
        true,
    )
}

/// Haar-random pure state from `(seed)`.
pub fn random_state(dim: usize, seed: u64) -> Result<PureState> {
    random_state_with(dim, &mut stream_rng(seed, 0))
}

pub fn random_state_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".into()));
    }
    PureState::normalized(linalg::haar_vector(dim, rng))
}

/// Haar-random orthonormal basis (columns of a Haar unitary).
pub fn random_unitary(dim: usize, seed: u64) -> Result<OrthonormalBasis> {
    random_unitary_with(dim, &mut stream_rng(seed, 0))
}

pub fn random_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<OrthonormalBasis> {
    if dim < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".into()));
    }
    OrthonormalBasis::from_unitary(&linalg::haar_unitary(dim, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ket(v: &[(f64, f64)]) -> PureState {
        PureState::normalized(v.iter().map(|&(r, i)| C64::new(r, i)).collect()).unwrap()
    }

    #[test]
    fn fidelity_trivial_cases() {
        let z0 = PureState::basis(2, 0).unwrap();
        let z1 = PureState::basis(2, 1).unwrap();
        assert_eq!(fidelity(&z0, &z0).unwrap(), 1.0);
        assert_eq!(fidelity(&z0, &z1).unwrap(), 0.0);
        assert_eq!(born_probability(&z0, &z1).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let a = PureState::basis(2, 0).unwrap();
        let b = PureState::basis(3, 0).unwrap();
        assert!(matches!(fidelity(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(quantum_overlap(&a, &b).is_err());
        assert!(helstrom_success(&a, &b).is_err());
    }

    #[test]
    fn unbiased_pair_in_three_dimensions() {
        let s = 1.0 / 3f64.sqrt();
        let plus = ket(&[(s, 0.0), (s, 0.0), (s, 0.0)]);
        let e = PureState::basis(3, 1).unwrap();
        assert_abs_diff_eq!(fidelity(&plus, &e).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn quantum_overlap_values() {
        let z0 = PureState::basis(4, 0).unwrap();
        let z1 = PureState::basis(4, 1).unwrap();
        assert_eq!(quantum_overlap(&z0, &z0).unwrap(), 1.0);
        assert_eq!(quantum_overlap(&z0, &z1).unwrap(), 0.0);
        // fidelity 1/4 in d = 4; reference 1 - sqrt(3)/2 to 20 digits
        let u = ket(&[(0.5, 0.0), (0.5, 0.0), (0.5, 0.0), (0.5, 0.0)]);
        assert_abs_diff_eq!(
            quantum_overlap(&z0, &u).unwrap(),
            0.133_974_596_215_561_353_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn helstrom_values() {
        let z0 = PureState::basis(2, 0).unwrap();
        let z1 = PureState::basis(2, 1).unwrap();
        assert_eq!(helstrom_success(&z0, &z1).unwrap(), 1.0);
        assert_eq!(helstrom_success(&z0, &z0).unwrap(), 0.5);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ket(&[(s, 0.0), (s, 0.0)]);
        // fidelity 1/2 -> (1 + sqrt(1/2)) / 2 = 0.853553390593273762...
        assert_abs_diff_eq!(
            helstrom_success(&z0, &plus).unwrap(),
            0.853_553_390_593_273_762_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn helstrom_measurement_attains_helstrom_success() {
        for seed in 0..20 {
            let a = random_state(3, seed).unwrap();
            let b = random_state(3, seed + 100).unwrap();
            let m = helstrom_measurement(&a, &b).unwrap();
            let pa = m.probabilities(&a).unwrap()[0];
            let pb = m.probabilities(&b).unwrap()[1];
            let success = 0.5 * (pa + pb);
            assert_abs_diff_eq!(success, helstrom_success(&a, &b).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn card_deck_overlap() {
        // 52 cards: 0..26 red (hearts 0..13, diamonds 13..26), aces at 0, 13, 26, 39
        let red: Vec<usize> = (0..26).collect();
        let p = DiscreteDistribution::uniform_on(52, &red).unwrap();
        let q = DiscreteDistribution::uniform_on(52, &[0, 13, 26, 39]).unwrap();
        // brute-force min-sum oracle
        let oracle: f64 = (0..52)
            .map(|i| {
                let pi = if i < 26 { 1.0 / 26.0 } else { 0.0 };
                let qi = if i % 13 == 0 { 0.25 } else { 0.0 };
                f64::min(pi, qi)
            })
            .sum();
        assert_abs_diff_eq!(oracle, 1.0 / 13.0, epsilon = 1e-15);
        assert_abs_diff_eq!(classical_overlap(&p, &q).unwrap(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(
            classical_overlap(&p, &q).unwrap(),
            1.0 - classical_trace_distance(&p, &q).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn classical_overlap_edge_cases() {
        let p = DiscreteDistribution::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let q = DiscreteDistribution::new(vec![0.0, 0.0, 0.25, 0.75]).unwrap();
        assert_eq!(classical_overlap(&p, &p).unwrap(), 1.0);
        assert_eq!(classical_overlap(&p, &q).unwrap(), 0.0);
        let r = DiscreteDistribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(classical_overlap(&p, &r).is_err());
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(PureState::new(vec![ONE]).is_err());
        assert!(PureState::new(vec![ONE, ONE]).is_err());
        assert!(PureState::normalized(vec![ZERO, ZERO]).is_err());
        assert!(DiscreteDistribution::new(vec![0.7, 0.7]).is_err());
        assert!(DiscreteDistribution::new(vec![-0.1, 1.1]).is_err());
        let z0 = PureState::basis(2, 0).unwrap();
        assert!(OrthonormalBasis::new(vec![z0.clone(), z0]).is_err());
    }

    #[test]
    fn random_outputs_are_deterministic_and_valid() {
        assert_eq!(random_state(2, 7).unwrap(), random_state(2, 7).unwrap());
        assert_eq!(random_unitary(2, 7).unwrap(), random_unitary(2, 7).unwrap());
        for d in 2..7 {
            let b = random_unitary(d, 99).unwrap();
            assert!(orthonormality_defect(b.vectors()) < 1e-10);
        }
    }

    #[test]
    fn haar_fidelity_mean_is_one_over_d() {
        // E|<psi|phi>|^2 = 1/d, Var = (d-1)/(d^2 (d+1))
        let draws = 100_000;
        for d in [2usize, 3, 5] {
            let fixed = PureState::basis(d, 0).unwrap();
            let mut rng = stream_rng(42, d as u64);
            let mean: f64 = (0..draws)
                .map(|_| fidelity(&random_state_with(d, &mut rng).unwrap(), &fixed).unwrap())
                .sum::<f64>()
                / draws as f64;
            let df = d as f64;
            let sigma = ((df - 1.0) / (df * df * (df + 1.0)) / draws as f64).sqrt();
            assert!((mean - 1.0 / df).abs() < 3.0 * sigma, "d={d} mean={mean}");
        }
    }

    #[test]
    fn json_round_trip_and_schema() {
        let s = random_state(3, 5).unwrap();
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j["dim"], 3);
        assert_eq!(j["amplitudes"].as_array().unwrap().len(), 3);
        let back: PureState = serde_json::from_value(j).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::json!({"dim": 2, "amplitudes": [[1.0, 0.0], [1.0, 0.0]]});
        assert!(serde_json::from_value::<PureState>(bad).is_err());
    }

    fn cholesky_succeeds(g: &CMatrix, shift: f64) -> bool {
        let n = g.dim();
        let mut l = CMatrix::zeros(n);
        for j in 0..n {
            let mut diag = g[(j, j)].re + shift;
            for k in 0..j {
                diag -= l[(j, k)].norm_sqr();
            }
            if diag <= 0.0 {
                return false;
            }
            let ljj = diag.sqrt();
            l[(j, j)] = C64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut s = g[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        true
    }

    proptest! {
        #[test]
        fn overlap_plus_distance_is_one(seed in any::<u64>(), d in 2usize..6) {
            let a = random_state(d, seed).unwrap();
            let b = random_state(d, seed.wrapping_add(1)).unwrap();
            let w = quantum_overlap(&a, &b).unwrap();
            let t = quantum_trace_distance(&a, &b).unwrap();
            prop_assert_eq!(w + t, 1.0);
            prop_assert!((helstrom_success(&a, &b).unwrap() - (1.0 - w / 2.0)).abs() < 1e-15);
            prop_assert_eq!(fidelity(&a, &b).unwrap(), fidelity(&b, &a).unwrap());
        }

        #[test]
        fn classical_overlap_properties(raw_p in prop::collection::vec(0.0f64..1.0, 8),
                                        raw_q in prop::collection::vec(0.0f64..1.0, 8)) {
            prop_assume!(raw_p.iter().sum::<f64>() > 1e-3 && raw_q.iter().sum::<f64>() > 1e-3);
            let p = DiscreteDistribution::normalized(raw_p).unwrap();
            let q = DiscreteDistribution::normalized(raw_q).unwrap();
            let pq = classical_overlap(&p, &q).unwrap();
            prop_assert_eq!(pq, classical_overlap(&q, &p).unwrap());
            prop_assert!((0.0..=1.0).contains(&pq));
            prop_assert!((classical_overlap(&p, &p).unwrap() - 1.0).abs() < 1e-12);
            let equal = p.weights().iter().zip(q.weights()).all(|(a, b)| (a - b).abs() < 1e-12);
            prop_assert_eq!(equal, (pq - 1.0).abs() < 1e-12);
        }

        #[test]
        fn gram_matrix_is_psd(seed in any::<u64>(), n in 1usize..7, d in 2usize..5) {
            let states: Vec<PureState> = (0..n).map(|k| random_state(d, seed.wrapping_add(k as u64)).unwrap()).collect();
            let g = gram_matrix(&states).unwrap();
            prop_assert!(cholesky_succeeds(&g, 1e-10));
        }
    }
}
