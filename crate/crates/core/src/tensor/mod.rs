//! Dense complex linear algebra used by every channel formula.

mod dims;
mod matrix;
mod partial;
mod random;
mod spectral;

pub use dims::FactoredDims;
pub use matrix::CMatrix;
pub use partial::partial_trace;
pub(crate) use partial::sandwich_prefix;
pub use random::{
    haar_random_unitary, random_density, random_ginibre, random_hermitian, random_unit_vector,
};
pub use spectral::{
    hermitian_eigen, spectral, spectral_with_threshold, SpectralDecomposition,
};

use crate::error::Result;

pub fn matmul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.matmul(b)
}

pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// Kronecker product, left factor slowest.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}
