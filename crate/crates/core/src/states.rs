//! Kets, density operators, the entangled resource and measurement vectors.
//!
//! Amplitude ordering follows the repo-wide convention: for a vector on
//! `A ⊗ B` the index is `a * dim(B) + b`. The resource `ψ = Σ λ[h, α] |h⟩|α⟩`
//! lives on `H2 ⊗ H3`; a measurement vector `ξ = Σ T[a, b] |a⟩|b⟩` lives on
//! `H1 ⊗ H2`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::{spectral, CMatrix, FactoredDims};
use crate::STRUCTURAL_TOL;

/// Complex vector on a possibly composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    dims: FactoredDims,
    amplitudes: Vec<C64>,
    normalized: bool,
}

impl Ket {
    pub fn new(dims: FactoredDims, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                dims.total()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        let normalized = (norm_sqr.sqrt() - 1.0).abs() <= STRUCTURAL_TOL;
        Ok(Ket { dims, amplitudes, normalized })
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dims: FactoredDims, index: usize) -> Result<Self> {
        let n = dims.total();
        if index >= n {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {n}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[index] = C64::new(1.0, 0.0);
        Ket::new(dims, amps)
    }

    pub fn dims(&self) -> &FactoredDims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch("inner product of unequal lengths".into()));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ket {
            dims: self.dims.concat(&other.dims),
            amplitudes,
            normalized: self.normalized && other.normalized,
        }
    }

    /// `|self⟩⟨self|` as a matrix, no normalization required.
    pub fn projector_matrix(&self) -> CMatrix {
        CMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}

/// Positive, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    dims: FactoredDims,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validate and wrap. Positivity is checked through eigenvalues so pure
    /// (singular) states pass.
    pub fn new(dims: FactoredDims, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dimension {}",
                matrix.rows(),
                matrix.cols(),
                dims.total()
            )));
        }
        let herm = matrix.hermitian_residual();
        if herm > STRUCTURAL_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STRUCTURAL_TOL || tr.im.abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let min = spectral(&matrix, STRUCTURAL_TOL)?.min_eigenvalue();
        if min < -STRUCTURAL_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityOperator { dims, matrix })
    }

    /// Validate a state on a single-factor space.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let dims = FactoredDims::single(matrix.rows().max(1));
        Self::new(dims, matrix)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        DensityOperator { dims: FactoredDims::single(matrix.rows()), matrix }
    }

    pub(crate) fn from_parts_unchecked(dims: FactoredDims, matrix: CMatrix) -> Self {
        debug_assert_eq!(dims.total(), matrix.rows());
        DensityOperator { dims, matrix }
    }

    /// Maximally mixed state `I/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self::from_matrix_unchecked(CMatrix::identity(n).scale_real(1.0 / n as f64))
    }

    pub fn dims(&self) -> &FactoredDims {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.dot(&self.matrix).trace().re
    }
}

/// Rank-one projector `|k⟩⟨k|` of a normalized ket.
pub fn density_from_ket(k: &Ket) -> Result<DensityOperator> {
    if !k.is_normalized() {
        return Err(Error::NotNormalized(k.norm().powi(2)));
    }
    Ok(DensityOperator::from_parts_unchecked(k.dims().clone(), k.projector_matrix()))
}

/// Pure entangled state on `H2 ⊗ H3` defined by a coefficient matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EntangledResource {
    d2: usize,
    d3: usize,
    lambda: CMatrix,
    psi: Ket,
    scale: f64,
    lambda_unitary: bool,
}

impl EntangledResource {
    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn d3(&self) -> usize {
        self.d3
    }

    /// The coefficient matrix `λ` as given (unnormalized).
    pub fn lambda(&self) -> &CMatrix {
        &self.lambda
    }

    /// Normalized `ψ`.
    pub fn psi(&self) -> &Ket {
        &self.psi
    }

    /// `‖Σ λ[h, α] |h⟩|α⟩‖`, removed when normalizing `ψ`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn lambda_is_unitary(&self) -> bool {
        self.lambda_unitary
    }

    /// `|ψ⟩⟨ψ|` for the normalized `ψ`.
    pub fn sigma(&self) -> DensityOperator {
        DensityOperator::from_parts_unchecked(self.psi.dims().clone(), self.psi.projector_matrix())
    }
}

/// Build `ψ = Σ λ[h, α] |h⟩ ⊗ |α⟩`, stored normalized together with the scale.
///
/// Non-unitary `λ` is accepted; unitarity is recorded.
pub fn build_resource(lambda: &CMatrix) -> Result<EntangledResource> {
    let scale = lambda.frobenius_norm();
    if scale == 0.0 {
        return Err(Error::ZeroCoefficients);
    }
    let (d2, d3) = (lambda.rows(), lambda.cols());
    let dims = FactoredDims::new(vec![d2, d3])?;
    let amps = lambda.as_slice().iter().map(|z| z / scale).collect();
    let psi = Ket::new(dims, amps)?;
    Ok(EntangledResource {
        d2,
        d3,
        lambda: lambda.clone(),
        psi,
        scale,
        lambda_unitary: lambda.is_unitary(STRUCTURAL_TOL),
    })
}

/// Unit vector `ξ = Σ T[a, b] |a⟩ ⊗ |b⟩` on `H1 ⊗ H2` with an outcome label.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementVector {
    coefficients: CMatrix,
    label: String,
}

impl MeasurementVector {
    pub fn new(coefficients: CMatrix, label: impl Into<String>) -> Result<Self> {
        let norm_sqr = coefficients.frobenius_norm().powi(2);
        if (norm_sqr - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(MeasurementVector { coefficients, label: label.into() })
    }

    pub fn d1(&self) -> usize {
        self.coefficients.rows()
    }

    pub fn d2(&self) -> usize {
        self.coefficients.cols()
    }

    pub fn coefficients(&self) -> &CMatrix {
        &self.coefficients
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_diagonal(&self) -> bool {
        self.coefficients.is_square() && self.coefficients.off_diagonal_max() == 0.0
    }

    pub fn ket(&self) -> Ket {
        let dims = FactoredDims::new(vec![self.d1(), self.d2()]).expect("positive dims");
        Ket::new(dims, self.coefficients.as_slice().to_vec()).expect("length matches")
    }

    /// `F = |ξ⟩⟨ξ|` on `H1 ⊗ H2`.
    pub fn projector(&self) -> CMatrix {
        let a = self.coefficients.as_slice();
        CMatrix::outer(a, a)
    }

    /// `⟨self, other⟩ = tr(T_self* T_other)`.
    pub fn inner(&self, other: &MeasurementVector) -> C64 {
        self.coefficients
            .as_slice()
            .iter()
            .zip(other.coefficients.as_slice())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// `ξ = n^{-1/2} Σ_μ |μ⟩ ⊗ |μ⟩`.
pub fn maximal_xi(n: usize) -> MeasurementVector {
    assert!(n >= 1, "dimension must be positive");
    let t = CMatrix::identity(n).scale_real(1.0 / (n as f64).sqrt());
    MeasurementVector { coefficients: t, label: "maximal".into() }
}

/// `ξ = Σ_μ t_μ |μ⟩ ⊗ |μ⟩`.
pub fn diagonal_xi(t: &[C64]) -> Result<MeasurementVector> {
    if t.is_empty() {
        return Err(Error::InvalidArgument("empty coefficient vector".into()));
    }
    MeasurementVector::new(CMatrix::diag(t), "diagonal")
}
