//! Finite-dimensional teleportation channel engine.
//!
//! The crate builds teleportation schemes (entangled resource, a family of
//! rank-one measurement projections on `H1 ⊗ H2`, and one key unitary per
//! outcome), checks them against the recovery identity
//! `U_k · Λ_k(ρ) · U_k* = ρ`, and simulates the Alice → Bob protocol with
//! sampled outcomes.
//!
//! Layout:
//!
//! * [`tensor`] — dense complex matrices, Kronecker products, partial traces,
//!   spectral decomposition and seeded random generation.
//! * [`states`] — kets, density operators, the entangled resource built from a
//!   coefficient matrix, and measurement vectors.
//! * [`channel`] — lifting, measurement, partial-trace, unitary and composite
//!   channels, plus the teleportation channel with an explicit tripartite path
//!   and a fast coefficient-matrix path.
//! * [`scheme`] — key synthesis, the weak solver, sign and Bell families, key
//!   uniqueness analysis and the linearity criterion.
//! * [`protocol`] — Monte-Carlo protocol runs and Uhlmann fidelity.
//!
//! Tensor factors are always ordered `H1` (slowest index) `⊗ H2 ⊗ H3`
//! (fastest index), and all bases are computational bases.

pub mod channel;
pub mod error;
pub mod protocol;
pub mod rng;
pub mod scheme;
pub mod states;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Tolerance for structural checks: Hermitian, unitary, projection, unit
/// norm, unit trace, and state equality in Frobenius norm.
pub const STRUCTURAL_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are merged into one spectral projector.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Outcomes with probability at or below this are treated as null outcomes.
pub const NULL_PROBABILITY: f64 = 1e-12;

/// Largest tripartite dimension handled by the explicit channel path.
pub const EXPLICIT_PATH_MAX_DIM: usize = 512;
