//! Numerical tolerances shared across the crate.

/// Tolerance record used by validating constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum |<v_i|v_j>| accepted between distinct basis vectors.
    pub orthogonality: f64,
    /// Maximum deviation of a squared norm (or a total probability) from 1.
    pub normalization: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        orthogonality: 1e-10,
        normalization: 1e-12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Threshold on the conjugate-basis misfire average below which a triple
/// counts as solved exactly.
pub const EPSILON_CONVERGENCE: f64 = 1e-8;

/// Default number of restarts per conjugate-basis search.
pub const DEFAULT_RESTARTS: usize = 64;

/// Default seed used by every command when none is given.
pub const DEFAULT_SEED: u64 = 20_130_321;
