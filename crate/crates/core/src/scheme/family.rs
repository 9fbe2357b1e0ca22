//! Measurement families: the ±1 sign family for `N = 2^m`, the mod-`N` Bell
//! family, and the qubit singlet scheme with its textbook keys.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;

use super::{
    key_from_lambda, phase_overlap, SharedKeyComparison, SharedKeyEntry, TeleportationScheme,
};
use crate::channel::teleportation_channel;
use crate::error::{Error, Result};
use crate::states::{build_resource, diagonal_xi, MeasurementVector};
use crate::tensor::{random_density, CMatrix};
use crate::STRUCTURAL_TOL;

/// Seed of the probe state used for the shared-key comparison.
const SHARED_KEY_PROBE_SEED: u64 = 0x5EED_0001;

/// `s_α(ν) = (−1)^{σ_α(ν)}` with `σ_α(ν) = Σ_j (1 − ν_j) α_j`.
///
/// Entry `p` of `signs` corresponds to `ν` = the `m` bits of `p`, `ν_1` most
/// significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignVector {
    pub alpha: Vec<u8>,
    pub signs: Vec<i8>,
}

impl SignVector {
    /// `α` as a bitstring, `α_1` first.
    pub fn label(&self) -> String {
        self.alpha.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

fn bits(value: usize, m: u32) -> Vec<u8> {
    (0..m).rev().map(|j| ((value >> j) & 1) as u8).collect()
}

/// The `2^m` sign vectors, ordered by `α` read as a binary number.
pub fn sign_basis(m: u32) -> Vec<SignVector> {
    assert!((1..usize::BITS).contains(&m), "m must be in 1..{}", usize::BITS);
    let n = 1usize << m;
    (0..n)
        .map(|a| {
            let alpha = bits(a, m);
            let signs = (0..n)
                .map(|p| {
                    let nu = bits(p, m);
                    let sigma: u32 =
                        nu.iter().zip(&alpha).map(|(&v, &al)| u32::from((1 - v) * al)).sum();
                    if sigma % 2 == 0 { 1 } else { -1 }
                })
                .collect();
            SignVector { alpha, signs }
        })
        .collect()
}

/// Sign family for `N = 2^m`: `ξ_α = Σ_μ s_α(μ)/√N |μ⟩|μ⟩` against the
/// resource built from `λ`, with one verified key per `α`.
///
/// The scheme also records how the single key `conj(λ)` fares on each
/// outcome.
pub fn build_sign_family(m: u32, lambda: &CMatrix) -> Result<TeleportationScheme> {
    let n = 1usize << m;
    if lambda.rows() != n || lambda.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "λ is {}x{}, sign family needs {n}x{n}",
            lambda.rows(),
            lambda.cols()
        )));
    }
    let shared_key = key_from_lambda(lambda)?;
    let resource = build_resource(lambda)?;
    let amp = 1.0 / (n as f64).sqrt();
    let xis = sign_basis(m)
        .into_iter()
        .map(|s| {
            let t: Vec<C64> = s.signs.iter().map(|&x| C64::new(f64::from(x) * amp, 0.0)).collect();
            diagonal_xi(&t).map(|xi| xi.with_label(s.label()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scheme = TeleportationScheme::from_family(resource, xis)?;
    scheme.shared_key = Some(compare_shared_key(&scheme, shared_key)?);
    Ok(scheme)
}

fn compare_shared_key(scheme: &TeleportationScheme, shared: CMatrix) -> Result<SharedKeyComparison> {
    let probe = random_density(scheme.n, SHARED_KEY_PROBE_SEED);
    let mut entries = Vec::with_capacity(scheme.family.len());
    for e in &scheme.family {
        let (out, _) = teleportation_channel(&probe, &e.xi, &scheme.resource)?;
        let recover = |u: &CMatrix| u.dot(out.matrix()).dot(&u.adjoint()).distance(probe.matrix());
        let overlap = phase_overlap(&shared, &e.key);
        entries.push(SharedKeyEntry {
            label: e.label.clone(),
            phase_overlap: overlap,
            matches_up_to_phase: (overlap - 1.0).abs() <= STRUCTURAL_TOL,
            shared_residual: recover(&shared),
            verified_residual: recover(&e.key),
        });
    }
    let hypothesis_holds = entries.iter().all(|e| e.shared_residual <= STRUCTURAL_TOL);
    Ok(SharedKeyComparison {
        shared_key: shared,
        probe_seed: SHARED_KEY_PROBE_SEED,
        entries,
        hypothesis_holds,
    })
}

/// Label of the Bell-family outcome `(n, m)`.
pub fn bell_label(phase: usize, shift: usize) -> String {
    format!("({phase},{shift})")
}

/// Mod-`N` Bell family: `ξ_nm = N^{-1/2} Σ_j e^{2πijn/N} |j⟩|(j+m) mod N⟩`
/// against `ψ = N^{-1/2} Σ_j |j⟩|j⟩`; `N²` outcomes, complete.
pub fn build_bell_family(n: usize) -> Result<TeleportationScheme> {
    if n < 2 {
        return Err(Error::InvalidArgument("Bell family needs N ≥ 2".into()));
    }
    let resource = build_resource(&CMatrix::identity(n))?;
    let amp = 1.0 / (n as f64).sqrt();
    let mut xis = Vec::with_capacity(n * n);
    for phase in 0..n {
        for shift in 0..n {
            let mut t = CMatrix::zeros(n, n);
            for j in 0..n {
                let angle = 2.0 * PI * (j * phase % n) as f64 / n as f64;
                t[(j, (j + shift) % n)] = C64::from_polar(amp, angle);
            }
            xis.push(MeasurementVector::new(t, bell_label(phase, shift))?);
        }
    }
    TeleportationScheme::from_family(resource, xis)
}

/// The four textbook qubit keys `U_1 … U_4` with `|↑⟩ = e_0`, `|↓⟩ = e_1`.
pub fn textbook_qubit_keys() -> [CMatrix; 4] {
    let m = |d: [f64; 4]| CMatrix::from_real(2, 2, &d).expect("2x2");
    [
        m([1., 0., 0., 1.]),
        m([1., 0., 0., -1.]),
        m([0., 1., 1., 0.]),
        m([0., 1., -1., 0.]),
    ]
}

/// Qubit scheme with resource `c|↑↓⟩ + d|↓↑⟩` and the four Bell projections
/// `F1 = ξ⁻, F2 = ξ⁺, F3 = ζ⁻, F4 = ζ⁺`.
pub fn singlet_scheme(c: C64, d: C64) -> Result<TeleportationScheme> {
    let zero = C64::new(0.0, 0.0);
    let lambda = CMatrix::from_vec(2, 2, vec![zero, c, d, zero])?;
    let resource = build_resource(&lambda)?;
    let bell = |data: [f64; 4], label: &str| {
        let t = CMatrix::from_real(2, 2, &data.map(|x| x * FRAC_1_SQRT_2))?;
        MeasurementVector::new(t, label)
    };
    let xis = vec![
        bell([0., 1., -1., 0.], "F1")?,
        bell([0., 1., 1., 0.], "F2")?,
        bell([1., 0., 0., -1.], "F3")?,
        bell([1., 0., 0., 1.], "F4")?,
    ];
    TeleportationScheme::from_family(resource, xis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::gram_residual;
    use crate::tensor::haar_random_unitary;

    #[test]
    fn sign_basis_m1() {
        let b = sign_basis(1);
        assert_eq!(b[0].signs, vec![1, 1]);
        assert_eq!(b[1].signs, vec![-1, 1]);
        assert_eq!(b[1].label(), "1");
    }

    #[test]
    fn sign_basis_integer_gram() {
        for m in 1..=4 {
            let b = sign_basis(m);
            let n = 1i64 << m;
            for (i, x) in b.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let dot: i64 = x.signs.iter().zip(&y.signs).map(|(&a, &c)| i64::from(a * c)).sum();
                    assert_eq!(dot, if i == j { n } else { 0 });
                }
            }
        }
    }

    #[test]
    fn odd_length_sign_vectors_are_never_orthogonal() {
        // Exhaustive over length-3 ±1 vectors.
        for a in 0..8u32 {
            for b in 0..8u32 {
                let dot: i32 = (0..3)
                    .map(|k| {
                        let sa = if a >> k & 1 == 1 { -1 } else { 1 };
                        let sb = if b >> k & 1 == 1 { -1 } else { 1 };
                        sa * sb
                    })
                    .sum();
                assert_ne!(dot, 0);
            }
        }
    }

    #[test]
    fn sign_family_m1_identity() {
        let s = build_sign_family(1, &CMatrix::identity(2)).unwrap();
        assert_eq!(s.labels(), vec!["0", "1"]);
        assert!(s.family[0].key.distance(&CMatrix::identity(2)) < 1e-12);
        let z = CMatrix::from_real(2, 2, &[-1., 0., 0., 1.]).unwrap();
        assert!(s.family[1].key.distance(&z) < 1e-12);
        assert!((s.completeness - 0.5).abs() < 1e-12);
        let shared = s.shared_key.as_ref().unwrap();
        assert!(!shared.hypothesis_holds);
        assert!(shared.entries[0].matches_up_to_phase);
        assert!(!shared.entries[1].matches_up_to_phase);
        assert!(shared.entries[1].shared_residual > 1e-3);
        assert!(shared.entries.iter().all(|e| e.verified_residual < 1e-10));
    }

    #[test]
    fn sign_family_m2_random_lambda() {
        let s = build_sign_family(2, &haar_random_unitary(4, 5)).unwrap();
        assert_eq!(s.family.len(), 4);
        assert!(s.gram_residual() < 1e-10);
        assert!((s.completeness - 0.25).abs() < 1e-12);
        let v = s.verify(5, 1, &[]).unwrap();
        assert!(v.passes(1e-10), "{v:?}");
    }

    #[test]
    fn sign_family_requires_unitary_lambda() {
        assert!(matches!(
            build_sign_family(1, &CMatrix::identity(2).scale_real(0.5)),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn bell_family_n2_spans_bell_basis() {
        let s = build_bell_family(2).unwrap();
        assert_eq!(s.family.len(), 4);
        let bell_vectors = singlet_scheme(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(-FRAC_1_SQRT_2, 0.0))
            .unwrap()
            .family
            .into_iter()
            .map(|e| e.xi)
            .collect::<Vec<_>>();
        // Every ξ_nm equals one textbook Bell vector up to a phase.
        for e in &s.family {
            let hits = bell_vectors.iter().filter(|b| (b.inner(&e.xi).norm() - 1.0).abs() < 1e-12).count();
            assert_eq!(hits, 1, "{}", e.label);
        }
    }

    #[test]
    fn bell_family_n3() {
        let s = build_bell_family(3).unwrap();
        assert_eq!(s.family.len(), 9);
        assert!(gram_residual(&s.family.iter().map(|e| &e.xi).collect::<Vec<_>>()) < 1e-10);
        assert!((s.completeness - 1.0).abs() < 1e-10);
        let v = s.verify(5, 3, &[]).unwrap();
        assert!(v.passes(1e-10), "{v:?}");
    }

    #[test]
    fn bell_family_rejects_trivial_dimension() {
        assert!(build_bell_family(1).is_err());
    }

    #[test]
    fn singlet_scheme_reproduces_textbook_keys() {
        let c = C64::new(FRAC_1_SQRT_2, 0.0);
        let s = singlet_scheme(c, -c).unwrap();
        for (e, u) in s.family.iter().zip(textbook_qubit_keys()) {
            assert!((phase_overlap(&e.key, &u) - 1.0).abs() < 1e-10, "{}", e.label);
        }
    }

    #[test]
    fn symmetric_resource_permutes_textbook_keys() {
        let c = C64::new(FRAC_1_SQRT_2, 0.0);
        let s = singlet_scheme(c, c).unwrap();
        let keys = textbook_qubit_keys();
        let matched: Vec<usize> = s
            .family
            .iter()
            .map(|e| keys.iter().position(|u| (phase_overlap(&e.key, u) - 1.0).abs() < 1e-10).unwrap())
            .collect();
        assert_eq!(matched, vec![1, 0, 3, 2]);
    }
}
