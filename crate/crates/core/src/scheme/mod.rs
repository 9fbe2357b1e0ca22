//! Synthesis and verification of teleportation schemes.
//!
//! A scheme is a resource `ψ` plus a family of measurement vectors `ξ_k` with
//! one key unitary per outcome such that `U_k · Λ_k(ρ) · U_k* = ρ` for every
//! input `ρ`. Keys come from the weak solver: the unnormalized output of outcome
//! `k` is `M* ρ M`, so a key exists exactly when `M* M = c·I`, in which case
//! `U = M / √c` and the outcome fires with probability `c` for every `ρ`.

mod family;
mod linearity;
mod uniqueness;

pub use family::{
    textbook_qubit_keys, singlet_scheme, build_bell_family, build_sign_family, sign_basis, SignVector,
};
pub use linearity::{linearity_check, LinearityReport};
pub use uniqueness::{key_uniqueness, KeyComparison};

use num_complex::Complex64 as C64;

use crate::channel::{coefficient_operator, teleportation_channel};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::states::{EntangledResource, MeasurementVector};
use crate::tensor::{random_density, CMatrix};
use crate::STRUCTURAL_TOL;

/// Key of the maximal-measurement scheme: `U e_α = Σ_h conj(λ[h, α]) e_h`,
/// i.e. the matrix `conj(λ)`.
pub fn key_from_lambda(lambda: &CMatrix) -> Result<CMatrix> {
    let residual = lambda.unitarity_residual();
    if residual > STRUCTURAL_TOL {
        return Err(Error::NotUnitary(residual));
    }
    Ok(lambda.conj())
}

/// A solved weak problem.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakKey {
    pub key: CMatrix,
    /// Outcome probability, the same for every input state.
    pub success_prob: f64,
}

/// Why a `(ξ, ψ)` pair admits no key: `‖M*M − cI‖_F` with `c = tr(M*M)/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rejection {
    pub residual: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeakSolution {
    Solved(WeakKey),
    Rejected(Rejection),
}

impl WeakSolution {
    pub fn solved(&self) -> Option<&WeakKey> {
        match self {
            WeakSolution::Solved(k) => Some(k),
            WeakSolution::Rejected(_) => None,
        }
    }
}

/// Solve the weak teleportation problem for one measurement vector.
///
/// Unsolvable pairs come back as [`WeakSolution::Rejected`]; only shape
/// problems are errors.
pub fn solve_weak(xi: &MeasurementVector, resource: &EntangledResource) -> Result<WeakSolution> {
    let n = xi.d1();
    if xi.d2() != n || resource.d2() != n || resource.d3() != n {
        return Err(Error::DimensionMismatch(format!(
            "weak solver needs d1 = d2 = d3, got {}, {}, {}/{}",
            xi.d1(),
            xi.d2(),
            resource.d2(),
            resource.d3()
        )));
    }
    let m = coefficient_operator(xi, resource)?;
    let gram = m.adjoint().dot(&m);
    let c = gram.trace().re / n as f64;
    let residual = gram.distance(&CMatrix::identity(n).scale_real(c));
    if residual <= STRUCTURAL_TOL && c > 0.0 {
        Ok(WeakSolution::Solved(WeakKey { key: m.scale_real(1.0 / c.sqrt()), success_prob: c }))
    } else {
        Ok(WeakSolution::Rejected(Rejection { residual, c }))
    }
}

/// Gram matrix `G[j, k] = ⟨ξ_j, ξ_k⟩`.
pub fn gram_matrix(xis: &[&MeasurementVector]) -> CMatrix {
    let n = xis.len();
    let mut g = CMatrix::zeros(n, n);
    for (j, a) in xis.iter().enumerate() {
        for (k, b) in xis.iter().enumerate() {
            g[(j, k)] = a.inner(b);
        }
    }
    g
}

/// `‖G − I‖_F` for the Gram matrix of `xis`.
pub fn gram_residual(xis: &[&MeasurementVector]) -> f64 {
    gram_matrix(xis).distance(&CMatrix::identity(xis.len()))
}

/// `|tr(a* b)| / n`: 1 exactly when `b = e^{iθ} a` for unitary `a`, `b`.
pub fn phase_overlap(a: &CMatrix, b: &CMatrix) -> f64 {
    a.adjoint().dot(b).trace().norm() / a.rows() as f64
}

/// One outcome of a scheme.
#[derive(Clone, Debug)]
pub struct SchemeEntry {
    pub label: String,
    pub xi: MeasurementVector,
    pub key: CMatrix,
    pub success_prob: f64,
}

/// Per-outcome comparison of a verified key with a single shared key.
#[derive(Clone, Debug)]
pub struct SharedKeyEntry {
    pub label: String,
    /// `|tr(U_shared* U_k)| / N`.
    pub phase_overlap: f64,
    pub matches_up_to_phase: bool,
    /// `‖U_shared Λ_k(ρ) U_shared* − ρ‖_F` on the probe state.
    pub shared_residual: f64,
    /// Same with the verified key `U_k`.
    pub verified_residual: f64,
}

/// Outcome of testing whether one key recovers the input for every outcome.
#[derive(Clone, Debug)]
pub struct SharedKeyComparison {
    pub shared_key: CMatrix,
    pub probe_seed: u64,
    pub entries: Vec<SharedKeyEntry>,
    /// True when the shared key recovers the probe state on every outcome.
    pub hypothesis_holds: bool,
}

#[derive(Clone, Debug)]
pub struct TeleportationScheme {
    pub n: usize,
    pub resource: EntangledResource,
    pub family: Vec<SchemeEntry>,
    /// Σ_k success probability; `ρ`-independent for a valid scheme.
    pub completeness: f64,
    pub shared_key: Option<SharedKeyComparison>,
}

impl TeleportationScheme {
    /// Solve every measurement vector against `resource` and check the family
    /// is orthonormal. Any rejection or overlap makes the scheme invalid.
    pub fn from_family(resource: EntangledResource, xis: Vec<MeasurementVector>) -> Result<Self> {
        if xis.is_empty() {
            return Err(Error::InvalidScheme("empty measurement family".into()));
        }
        let n = resource.d2();
        let gram = gram_residual(&xis.iter().collect::<Vec<_>>());
        if gram > STRUCTURAL_TOL {
            return Err(Error::InvalidScheme(format!(
                "measurement vectors are not orthonormal (Gram residual {gram:e})"
            )));
        }
        let mut family = Vec::with_capacity(xis.len());
        for xi in xis {
            match solve_weak(&xi, &resource)? {
                WeakSolution::Solved(k) => family.push(SchemeEntry {
                    label: xi.label().to_string(),
                    xi,
                    key: k.key,
                    success_prob: k.success_prob,
                }),
                WeakSolution::Rejected(r) => {
                    return Err(Error::InvalidScheme(format!(
                        "outcome '{}' has no key (residual {:e})",
                        xi.label(),
                        r.residual
                    )))
                }
            }
        }
        let completeness = family.iter().map(|e| e.success_prob).sum();
        Ok(TeleportationScheme { n, resource, family, completeness, shared_key: None })
    }

    pub fn labels(&self) -> Vec<&str> {
        self.family.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn entry(&self, label: &str) -> Option<&SchemeEntry> {
        self.family.iter().find(|e| e.label == label)
    }

    pub fn gram_residual(&self) -> f64 {
        gram_residual(&self.family.iter().map(|e| &e.xi).collect::<Vec<_>>())
    }

    /// Cheap structural invariants: orthonormal family, unitary keys, and
    /// matching dimensions.
    pub fn check_structure(&self) -> Result<()> {
        let gram = self.gram_residual();
        if gram > STRUCTURAL_TOL {
            return Err(Error::InvalidScheme(format!("Gram residual {gram:e}")));
        }
        for e in &self.family {
            let r = e.key.unitarity_residual();
            if r > STRUCTURAL_TOL {
                return Err(Error::InvalidScheme(format!(
                    "key for '{}' is not unitary ({r:e})",
                    e.label
                )));
            }
            if e.xi.d1() != self.n || e.key.rows() != self.n {
                return Err(Error::InvalidScheme(format!("entry '{}' has wrong dimension", e.label)));
            }
        }
        Ok(())
    }

    /// Check the recovery identity on `samples` random states (seeded) plus any
    /// extra states supplied.
    pub fn verify(&self, samples: usize, seed: u64, extra: &[&crate::states::DensityOperator]) -> Result<SchemeVerification> {
        let mut probes: Vec<crate::states::DensityOperator> =
            (0..samples as u64).map(|i| random_density(self.n, derive_seed(seed, i))).collect();
        probes.extend(extra.iter().map(|r| (*r).clone()));

        let mut identity_residuals = Vec::with_capacity(self.family.len());
        let mut probability_residual = 0.0f64;
        for e in &self.family {
            let mut worst = 0.0f64;
            for rho in &probes {
                let (out, p) = teleportation_channel(rho, &e.xi, &self.resource)?;
                let back = e.key.dot(out.matrix()).dot(&e.key.adjoint());
                worst = worst.max(back.distance(rho.matrix()));
                probability_residual = probability_residual.max((p - e.success_prob).abs());
            }
            identity_residuals.push((e.label.clone(), worst));
        }
        let key_unitarity_residual =
            self.family.iter().map(|e| e.key.unitarity_residual()).fold(0.0, f64::max);
        Ok(SchemeVerification {
            gram_residual: self.gram_residual(),
            key_unitarity_residual,
            identity_residuals,
            probability_residual,
            completeness: self.completeness,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SchemeVerification {
    pub gram_residual: f64,
    pub key_unitarity_residual: f64,
    /// Per label, max over probes of `‖U_k Λ_k(ρ) U_k* − ρ‖_F`.
    pub identity_residuals: Vec<(String, f64)>,
    /// Max over outcomes and probes of `|p_channel − success_prob|`.
    pub probability_residual: f64,
    pub completeness: f64,
}

impl SchemeVerification {
    pub fn max_identity_residual(&self) -> f64 {
        self.identity_residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.gram_residual <= tol
            && self.key_unitarity_residual <= tol
            && self.max_identity_residual() <= tol
            && self.probability_residual <= tol
    }
}

/// Unit-modulus global phase relating two matrices, `b ≈ phase · a`, if any.
pub(crate) fn global_phase(a: &CMatrix, b: &CMatrix, tol: f64) -> Option<C64> {
    let overlap = a.adjoint().dot(b).trace();
    if overlap.norm() == 0.0 {
        return None;
    }
    let phase = overlap / overlap.norm();
    (b.distance(&a.scale(phase)) <= tol).then_some(phase)
}
