use num_complex::Complex64 as C64;

use super::global_phase;
use crate::error::{Error, Result};
use crate::states::DensityOperator;
use crate::tensor::{spectral, CMatrix};
use crate::STRUCTURAL_TOL;

/// Relation between two keys `U`, `V` through `W = V U*`.
///
/// With a fixed state `ρ`, two keys that both recover `ρ` differ by a unitary
/// in the commutant of `ρ`: `W` splits into blocks `W_γ = P_γ W P_γ` over the
/// eigenspaces of `ρ`. Over all states, `W` must be a scalar.
#[derive(Clone, Debug)]
pub struct KeyComparison {
    pub w: CMatrix,
    pub block_projectors: Vec<CMatrix>,
    pub blocks: Vec<CMatrix>,
    /// `Some(e^{iθ})` when `V = e^{iθ} U` within tolerance.
    pub global_phase: Option<C64>,
    /// `‖Wρ − ρW‖_F`.
    pub commutator_residual: Option<f64>,
    /// `‖W − Σ W_γ‖_F`.
    pub block_sum_residual: Option<f64>,
    /// `max_{γ,γ'} ‖W_γ W_γ'* − δ_γγ' P_γ‖_F`.
    pub block_orthogonality_residual: Option<f64>,
    /// `‖Σ W_γ* W_γ − I‖_F`.
    pub block_completeness_residual: Option<f64>,
}

impl KeyComparison {
    /// All block identities hold within `tol` (vacuous without a state).
    pub fn block_identities_hold(&self, tol: f64) -> bool {
        [
            self.commutator_residual,
            self.block_sum_residual,
            self.block_orthogonality_residual,
            self.block_completeness_residual,
        ]
        .iter()
        .flatten()
        .all(|&r| r <= tol)
    }
}

pub fn key_uniqueness(u: &CMatrix, v: &CMatrix, rho: Option<&DensityOperator>) -> Result<KeyComparison> {
    for m in [u, v] {
        let r = m.unitarity_residual();
        if r > STRUCTURAL_TOL {
            return Err(Error::NotUnitary(r));
        }
    }
    if u.rows() != v.rows() {
        return Err(Error::DimensionMismatch("keys of different sizes".into()));
    }
    let n = u.rows();
    let w = v.dot(&u.adjoint());
    let identity = CMatrix::identity(n);
    let global_phase = global_phase(&identity, &w, STRUCTURAL_TOL);

    let Some(rho) = rho else {
        return Ok(KeyComparison {
            w,
            block_projectors: Vec::new(),
            blocks: Vec::new(),
            global_phase,
            commutator_residual: None,
            block_sum_residual: None,
            block_orthogonality_residual: None,
            block_completeness_residual: None,
        });
    };
    if rho.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} vs keys of size {n}",
            rho.dim()
        )));
    }

    let r = rho.matrix();
    let commutator = w.dot(r).distance(&r.dot(&w));
    let spec = spectral(r, STRUCTURAL_TOL)?;
    let blocks: Vec<CMatrix> = spec.projectors.iter().map(|p| p.dot(&w).dot(p)).collect();

    let block_sum = blocks
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, b| acc.add(b).expect("same shape"));
    let completeness = blocks.iter().fold(CMatrix::zeros(n, n), |acc, b| {
        acc.add(&b.adjoint().dot(b)).expect("same shape")
    });
    let mut orthogonality = 0.0f64;
    for (g, (bg, pg)) in blocks.iter().zip(&spec.projectors).enumerate() {
        for (h, bh) in blocks.iter().enumerate() {
            let prod = bg.dot(&bh.adjoint());
            let target = if g == h { pg.clone() } else { CMatrix::zeros(n, n) };
            orthogonality = orthogonality.max(prod.distance(&target));
        }
    }

    Ok(KeyComparison {
        block_sum_residual: Some(w.distance(&block_sum)),
        block_completeness_residual: Some(completeness.distance(&identity)),
        block_orthogonality_residual: Some(orthogonality),
        commutator_residual: Some(commutator),
        block_projectors: spec.projectors,
        blocks,
        w,
        global_phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::haar_random_unitary;

    #[test]
    fn scalar_multiple_is_detected() {
        let u = haar_random_unitary(3, 4);
        let phase = C64::from_polar(1.0, std::f64::consts::PI / 7.0);
        let cmp = key_uniqueness(&u, &u.scale(phase), None).unwrap();
        assert!((cmp.global_phase.unwrap() - phase).norm() < 1e-10);
        assert!(cmp.blocks.is_empty());
    }

    #[test]
    fn diagonal_state_blocks() {
        let rho = DensityOperator::from_matrix(CMatrix::from_real(2, 2, &[0.7, 0., 0., 0.3]).unwrap()).unwrap();
        let u = CMatrix::identity(2);
        let v = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]);
        let cmp = key_uniqueness(&u, &v, Some(&rho)).unwrap();
        assert_eq!(cmp.blocks.len(), 2);
        let w0 = CMatrix::from_real(2, 2, &[1., 0., 0., 0.]).unwrap();
        let w1 = CMatrix::diag(&[C64::new(0.0, 0.0), C64::new(0.0, 1.0)]);
        assert!(cmp.blocks[0].distance(&w0) < 1e-12);
        assert!(cmp.blocks[1].distance(&w1) < 1e-12);
        assert!(cmp.block_identities_hold(1e-10));
        assert!(cmp.global_phase.is_none());
    }

    #[test]
    fn degenerate_state_commutes_with_everything() {
        let rho = DensityOperator::maximally_mixed(2);
        let u = CMatrix::identity(2);
        let v = haar_random_unitary(2, 8);
        let cmp = key_uniqueness(&u, &v, Some(&rho)).unwrap();
        assert!(cmp.commutator_residual.unwrap() < 1e-12);
        assert!(cmp.block_identities_hold(1e-10));
        assert_eq!(cmp.blocks.len(), 1);
        assert!(cmp.global_phase.is_none());
        let scalar = CMatrix::identity(2).scale(C64::from_polar(1.0, 0.3));
        assert!(key_uniqueness(&u, &scalar, Some(&rho)).unwrap().global_phase.is_some());
    }

    #[test]
    fn non_commuting_keys_show_residual() {
        let rho = DensityOperator::from_matrix(CMatrix::from_real(2, 2, &[0.7, 0., 0., 0.3]).unwrap()).unwrap();
        let x = CMatrix::from_real(2, 2, &[0., 1., 1., 0.]).unwrap();
        let cmp = key_uniqueness(&CMatrix::identity(2), &x, Some(&rho)).unwrap();
        assert!(cmp.commutator_residual.unwrap() > 0.1);
        assert!(!cmp.block_identities_hold(1e-10));
    }

    #[test]
    fn rejects_non_unitary() {
        let bad = CMatrix::identity(2).scale_real(3.0);
        assert!(matches!(key_uniqueness(&bad, &CMatrix::identity(2), None), Err(Error::NotUnitary(_))));
    }
}
