//! Overlap bounds for psi-epistemic ontological models.
//!
//! The crate builds the objects needed to bound how strongly the
//! distributions of an ontological model may overlap while reproducing
//! quantum predictions:
//!
//! - [`qstate`]: pure states, bases, projective measurements and the
//!   classical/quantum overlap functionals.
//! - [`mub`]: complete families of mutually unbiased bases.
//! - [`triples`]: the PP-incompatibility criterion and numerical search for
//!   the conjugate measurement basis of a triple.
//! - [`bounds`]: closed-form bounds on the overlap ratio `k`, noiseless and
//!   noise-adjusted.
//! - [`d3cert`]: the three-dimensional certificate built from nearly
//!   incompatible triples.
//! - [`ontomodel`]: ontological-model oracles (Born check, overlap
//!   integrals, Bonferroni-type inequalities, the Kochen–Specker qubit model).
//! - [`expsim`]: a finite-sample noisy experiment simulator.

pub mod bounds;
pub mod config;
pub mod d3cert;
pub mod error;
pub mod expsim;
pub mod field;
pub mod linalg;
pub mod mub;
pub mod ontomodel;
pub mod optim;
pub mod qstate;
pub mod rng;
pub mod triples;

pub use error::{Error, Result};
