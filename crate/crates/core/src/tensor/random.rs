use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::CMatrix;
use crate::rng;
use crate::states::DensityOperator;

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// `rows x cols` matrix of independent standard complex Gaussians.
pub fn random_ginibre(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut rng = rng::stream(seed, 0);
    let data = (0..rows * cols).map(|_| gaussian(&mut rng)).collect();
    CMatrix::from_vec(rows, cols, data).expect("gaussian samples are finite")
}

/// Haar-distributed `n x n` unitary: QR of a Ginibre matrix with the
/// diagonal of R made positive.
pub fn haar_random_unitary(n: usize, seed: u64) -> CMatrix {
    assert!(n >= 1, "dimension must be positive");
    let g = random_ginibre(n, n, seed);
    let m = DMatrix::<C64>::from_fn(n, n, |i, j| g[(i, j)]);
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = CMatrix::zeros(n, n);
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    u
}

/// Random density operator `G G* / tr(G G*)` for a square Ginibre `G`.
pub fn random_density(n: usize, seed: u64) -> DensityOperator {
    assert!(n >= 1, "dimension must be positive");
    let g = random_ginibre(n, n, seed);
    let gg = g.dot(&g.adjoint());
    let tr = gg.trace().re;
    let mut m = gg.scale_real(1.0 / tr);
    // Exact Hermitian symmetry; the diagonal is real by construction.
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in 0..i {
            m[(i, j)] = m[(j, i)].conj();
        }
    }
    DensityOperator::from_matrix_unchecked(m)
}

/// Random Hermitian matrix `(G + G*)/2`.
pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let g = random_ginibre(n, n, seed);
    g.add(&g.adjoint()).expect("square").scale_real(0.5)
}

/// Random unit vector of length `n`.
pub fn random_unit_vector(n: usize, seed: u64) -> Vec<C64> {
    let g = random_ginibre(n, 1, seed);
    let norm = g.frobenius_norm();
    g.as_slice().iter().map(|z| z / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::spectral;

    #[test]
    fn scalar_unitary_has_unit_modulus() {
        for seed in 0..5 {
            let u = haar_random_unitary(1, seed);
            assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        for seed in [0u64, 1, 42, u64::MAX] {
            let u = haar_random_unitary(8, seed);
            assert!(u.unitarity_residual() < 1e-12);
            assert_eq!(u, haar_random_unitary(8, seed));
        }
        assert_ne!(haar_random_unitary(4, 1), haar_random_unitary(4, 2));
    }

    #[test]
    fn random_density_properties() {
        let one = random_density(1, 9);
        assert!(one.matrix().distance(&CMatrix::identity(1)) < 1e-15);
        for seed in 0..5 {
            let rho = random_density(8, seed);
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            let s = spectral(rho.matrix(), 1e-10).unwrap();
            assert!(s.min_eigenvalue() >= -1e-12);
            assert_eq!(rho, random_density(8, seed));
        }
    }
}
