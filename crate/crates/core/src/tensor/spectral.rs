use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::DEGENERACY_TOL;

/// `h = Σ eigenvalues[γ] · projectors[γ]`, eigenvalues descending, with
/// near-equal eigenvalues merged into one projector.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<CMatrix>,
    pub multiplicities: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.projectors[0].rows();
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(n, n), |acc, (&p, proj)| {
                acc.add(&proj.scale_real(p)).expect("projectors share a shape")
            })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }
}

/// Raw Hermitian eigen-solve: eigenvalues descending with matching unit
/// eigenvectors (as columns of the returned matrix, one per eigenvalue).
pub fn hermitian_eigen(h: &CMatrix, tol: f64) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let residual = h.hermitian_residual();
    if residual > tol {
        return Err(Error::NotHermitian(residual));
    }
    let n = h.rows();
    // Symmetrize so the solver sees an exactly Hermitian input.
    let m = DMatrix::<C64>::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    Ok((values, vectors))
}

/// Spectral decomposition with the default degeneracy threshold.
pub fn spectral(h: &CMatrix, tol: f64) -> Result<SpectralDecomposition> {
    spectral_with_threshold(h, tol, DEGENERACY_TOL)
}

/// Spectral decomposition; sorted eigenvalues whose gap to the previous one is
/// below `degeneracy` join the same eigenspace.
pub fn spectral_with_threshold(
    h: &CMatrix,
    tol: f64,
    degeneracy: f64,
) -> Result<SpectralDecomposition> {
    let (values, vectors) = hermitian_eigen(h, tol)?;
    let n = h.rows();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..values.len() {
        match groups.last_mut() {
            Some(g) if (values[*g.last().unwrap()] - values[k]).abs() < degeneracy => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    let mut out = SpectralDecomposition {
        eigenvalues: Vec::with_capacity(groups.len()),
        projectors: Vec::with_capacity(groups.len()),
        multiplicities: Vec::with_capacity(groups.len()),
    };
    for g in groups {
        let mean = g.iter().map(|&k| values[k]).sum::<f64>() / g.len() as f64;
        let mut proj = CMatrix::zeros(n, n);
        for &k in &g {
            let v = &vectors[k];
            for i in 0..n {
                for j in 0..n {
                    proj[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        out.eigenvalues.push(mean);
        out.projectors.push(proj);
        out.multiplicities.push(g.len());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::random_hermitian;

    #[test]
    fn degenerate_diagonal_merges() {
        let h = CMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        let s = spectral(&h, 1e-10).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!((s.eigenvalues[0] - 0.5).abs() < 1e-14);
        assert_eq!(s.multiplicities, vec![2]);
        assert!(s.projectors[0].distance(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn distinct_diagonal_splits() {
        let h = CMatrix::from_real(2, 2, &[0.3, 0.0, 0.0, 0.7]).unwrap();
        let s = spectral(&h, 1e-10).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0] - 0.7).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 0.3).abs() < 1e-14);
        let p0 = CMatrix::from_real(2, 2, &[0., 0., 0., 1.]).unwrap();
        let p1 = CMatrix::from_real(2, 2, &[1., 0., 0., 0.]).unwrap();
        assert!(s.projectors[0].distance(&p0) < 1e-14);
        assert!(s.projectors[1].distance(&p1) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = CMatrix::from_real(2, 2, &[0., 1., 0., 0.]).unwrap();
        assert!(matches!(spectral(&a, 1e-10), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn random_hermitian_reconstructs_with_orthogonal_projectors() {
        for seed in 0..10 {
            let h = random_hermitian(6, seed);
            let s = spectral(&h, 1e-10).unwrap();
            assert!(s.reconstruct().distance(&h) < 1e-10);
            let n = h.rows();
            let mut sum = CMatrix::zeros(n, n);
            for (a, pa) in s.projectors.iter().enumerate() {
                sum = sum.add(pa).unwrap();
                assert!(pa.projection_residual() < 1e-10);
                for pb in &s.projectors[a + 1..] {
                    assert!(pa.dot(pb).frobenius_norm() < 1e-10);
                }
            }
            assert!(sum.distance(&CMatrix::identity(n)) < 1e-10);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
