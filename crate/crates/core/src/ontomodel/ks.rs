//! Kochen–Specker model of a qubit.
//!
//! Ontic states are unit vectors `lambda` on the Bloch sphere. The state with
//! Bloch vector `n` has density `mu(lambda) = max(0, n . lambda) / pi`, and
//! the projector onto the state with Bloch vector `m` fires exactly on the
//! hemisphere `m . lambda > 0`.
//!
//! Integrals are evaluated exactly through spherical polygons; a product
//! quadrature grid gives an independent approximation of the same numbers.

use super::sphere::{self, SphereGrid, SphericalPolygon, V3};
use super::OntologicalModel;
use crate::error::{Error, Result};
use crate::qstate::{Measurement, PureState};
use std::f64::consts::PI;

/// Grid used by [`ks_model_d2`] callers that do not choose one: 720 nodes in
/// `cos(theta)` times 1440 azimuths, just over 10^6 points.
pub const DEFAULT_GRID_RESOLUTION: usize = 720;

/// Below this the grid normalisation of a density misses 1 by more than
/// 1e-3, and the model is rejected.
pub const MIN_GRID_RESOLUTION: usize = 16;

/// Bloch vector of a qubit state.
pub fn bloch_vector(psi: &PureState) -> Result<V3> {
    if psi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: psi.dim(),
        });
    }
    let a = psi.amplitudes();
    let cross = a[0].conj() * a[1];
    let n = [2.0 * cross.re, 2.0 * cross.im, a[0].norm_sqr() - a[1].norm_sqr()];
    let len = sphere::norm(&n);
    Ok([n[0] / len, n[1] / len, n[2] / len])
}

#[derive(Debug, Clone)]
pub struct KsModel {
    grid: SphereGrid,
}

/// Builds the model with a quadrature grid of the given resolution for the
/// grid-based diagnostics.
pub fn ks_model_d2(resolution: usize) -> Result<KsModel> {
    if resolution < MIN_GRID_RESOLUTION {
        return Err(Error::InvalidModel(format!(
            "grid resolution {resolution} is too coarse (minimum {MIN_GRID_RESOLUTION})"
        )));
    }
    Ok(KsModel {
        grid: SphereGrid::new(resolution),
    })
}

fn density(n: &V3, l: &V3) -> f64 {
    sphere::dot(n, l).max(0.0) / PI
}

impl KsModel {
    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    fn normals(states: &[&PureState]) -> Result<Vec<V3>> {
        states.iter().map(|s| bloch_vector(s)).collect()
    }

    /// `integral over H(m) of mu_n`, exactly.
    fn cap_mass(n: &V3, m: &V3) -> f64 {
        let region = SphericalPolygon::hemisphere(n).clip(m);
        sphere::dot(n, &region.vector_area()) / PI
    }

    fn outcome_response(effect: &crate::qstate::Effect) -> Result<Option<V3>> {
        match effect.rank() {
            0 | 2 => Ok(None),
            1 => bloch_vector(&effect.vectors[0]).map(Some),
            r => Err(Error::Unsupported(format!("rank-{r} effect on a qubit"))),
        }
    }

    /// Grid value of `integral mu_psi`; exactly 1 in the continuum.
    pub fn grid_normalization(&self, psi: &PureState) -> Result<f64> {
        let n = bloch_vector(psi)?;
        Ok(self.grid.integrate(|l| density(&n, l)))
    }

    pub fn grid_overlap(&self, states: &[&PureState]) -> Result<f64> {
        let ns = Self::normals(states)?;
        Ok(self
            .grid
            .integrate(|l| ns.iter().map(|n| density(n, l)).fold(f64::INFINITY, f64::min)))
    }

    pub fn grid_outcome_probabilities(&self, psi: &PureState, m: &Measurement) -> Result<Vec<f64>> {
        check_measurement(m)?;
        let n = bloch_vector(psi)?;
        m.effects()
            .iter()
            .map(|e| {
                Ok(match (e.rank(), Self::outcome_response(e)?) {
                    (0, _) => 0.0,
                    (_, None) => 1.0,
                    (_, Some(v)) => self
                        .grid
                        .integrate(|l| if sphere::dot(&v, l) > 0.0 { density(&n, l) } else { 0.0 }),
                })
            })
            .collect()
    }

    /// Pair overlap through the one-dimensional lens integral.
    pub fn lens_overlap(&self, psi: &PureState, phi: &PureState) -> Result<f64> {
        Ok(sphere::lens_integral(&bloch_vector(psi)?, &bloch_vector(phi)?) / PI)
    }
}

fn check_measurement(m: &Measurement) -> Result<()> {
    if m.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: m.dim(),
        });
    }
    if !m.is_complete() {
        return Err(Error::Unsupported("incomplete measurement".into()));
    }
    Ok(())
}

impl OntologicalModel for KsModel {
    fn dim(&self) -> usize {
        2
    }

    fn outcome_probabilities(&self, psi: &PureState, m: &Measurement) -> Result<Vec<f64>> {
        check_measurement(m)?;
        let n = bloch_vector(psi)?;
        m.effects()
            .iter()
            .map(|e| {
                Ok(match (e.rank(), Self::outcome_response(e)?) {
                    (0, _) => 0.0,
                    (_, None) => 1.0,
                    (_, Some(v)) => Self::cap_mass(&n, &v),
                })
            })
            .collect()
    }

    fn overlap(&self, states: &[&PureState]) -> Result<f64> {
        if states.is_empty() {
            return Err(Error::InvalidArgument("no states given".into()));
        }
        Ok(sphere::integrate_min_linear(&Self::normals(states)?) / PI)
    }

    fn mass_on_support(&self, psi: &PureState, phi: &PureState) -> Result<f64> {
        Ok(Self::cap_mass(&bloch_vector(psi)?, &bloch_vector(phi)?))
    }

    /// Evaluated on the quadrature grid.
    fn support_intersection_measure(&self, states: &[&PureState], tol: f64) -> Result<f64> {
        if states.is_empty() {
            return Err(Error::InvalidArgument("no states given".into()));
        }
        let ns = Self::normals(states)?;
        Ok(self.grid.integrate(|l| {
            if ns.iter().all(|n| density(n, l) > tol) {
                density(&ns[0], l)
            } else {
                0.0
            }
        }))
    }
}
