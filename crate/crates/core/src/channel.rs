//! Channel calculus for the teleportation process.
//!
//! The teleportation channel for outcome `k` is the composition
//! `Λ_k = a ∘ π_k ∘ γ`: product lifting `ρ ↦ ρ ⊗ σ`, the filtering
//! measurement `Q ↦ (F ⊗ 1) Q (F ⊗ 1) / tr(...)`, and the partial trace over
//! `H1 ⊗ H2`. Because of the normalization in `π_k`, `Λ_k` is not linear in
//! general.
//!
//! Two evaluation routes exist. The explicit route materializes the
//! tripartite operator. The fast route uses the coefficient identity
//!
//! ```text
//! tr_12[(F ⊗ 1)(ρ ⊗ |ψ⟩⟨ψ|)(F ⊗ 1)] = M* ρ M,   M = T · conj(λ) / scale
//! ```
//!
//! with `ξ = Σ T[a, b] |a⟩|b⟩` and `ψ = Σ λ[h, α] |h⟩|α⟩ / scale`, so it costs a
//! few `N x N` products.

use crate::error::{Error, Result};
use crate::states::{DensityOperator, EntangledResource, MeasurementVector};
use crate::tensor::{partial_trace, sandwich_prefix, CMatrix, FactoredDims};
use crate::{EXPLICIT_PATH_MAX_DIM, NULL_PROBABILITY, STRUCTURAL_TOL};

/// Result of a filtering measurement. `post_state` is `None` for a null
/// outcome (probability at or below [`NULL_PROBABILITY`]).
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub probability: f64,
    pub post_state: Option<DensityOperator>,
    pub outcome_label: String,
}

impl MeasurementOutcome {
    pub fn is_null(&self) -> bool {
        self.post_state.is_none()
    }
}

#[derive(Clone, Debug)]
pub enum ChannelKind {
    /// `ρ ↦ ρ ⊗ σ`.
    Lifting { sigma: DensityOperator },
    /// Filtering by a projection acting on the leading factors.
    Measurement { projector: CMatrix, label: String },
    /// Keep the listed factors (0-based).
    PartialTrace { keep: Vec<usize> },
    /// `ρ ↦ U ρ U*`.
    Unitary { unitary: CMatrix },
    Composite(Vec<Channel>),
}

#[derive(Clone, Debug)]
pub struct Channel {
    kind: ChannelKind,
    in_dims: FactoredDims,
    out_dims: FactoredDims,
}

/// Number of leading factors whose product equals `dim`, if any.
fn prefix_len(dims: &FactoredDims, dim: usize) -> Option<usize> {
    let mut acc = 1;
    for (i, f) in dims.factors().iter().enumerate() {
        acc *= f;
        if acc == dim {
            return Some(i + 1);
        }
        if acc > dim {
            break;
        }
    }
    None
}

impl Channel {
    pub fn lifting(in_dims: FactoredDims, sigma: DensityOperator) -> Self {
        let out_dims = in_dims.concat(sigma.dims());
        Channel { kind: ChannelKind::Lifting { sigma }, in_dims, out_dims }
    }

    pub fn measurement(
        dims: FactoredDims,
        projector: CMatrix,
        label: impl Into<String>,
    ) -> Result<Self> {
        let residual = projector.projection_residual();
        if residual > STRUCTURAL_TOL {
            return Err(Error::NotProjection(residual));
        }
        if prefix_len(&dims, projector.rows()).is_none() {
            return Err(Error::DimensionMismatch(format!(
                "projection of dimension {} does not act on leading factors of {:?}",
                projector.rows(),
                dims.factors()
            )));
        }
        Ok(Channel {
            kind: ChannelKind::Measurement { projector, label: label.into() },
            in_dims: dims.clone(),
            out_dims: dims,
        })
    }

    pub fn partial_trace(in_dims: FactoredDims, keep: Vec<usize>) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut sorted = keep.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let out_dims = in_dims.select(&sorted)?;
        Ok(Channel { kind: ChannelKind::PartialTrace { keep: sorted }, in_dims, out_dims })
    }

    pub fn unitary(unitary: CMatrix) -> Result<Self> {
        let residual = unitary.unitarity_residual();
        if residual > STRUCTURAL_TOL {
            return Err(Error::NotUnitary(residual));
        }
        let dims = FactoredDims::single(unitary.rows());
        Ok(Channel { kind: ChannelKind::Unitary { unitary }, in_dims: dims.clone(), out_dims: dims })
    }

    /// Sequential composition; stage `i + 1` must accept stage `i`'s output.
    pub fn composite(stages: Vec<Channel>) -> Result<Self> {
        let first = stages
            .first()
            .ok_or_else(|| Error::InvalidArgument("composite channel needs a stage".into()))?;
        for pair in stages.windows(2) {
            if pair[0].out_dims.total() != pair[1].in_dims.total() {
                return Err(Error::DimensionMismatch(format!(
                    "stage output {:?} does not feed stage input {:?}",
                    pair[0].out_dims.factors(),
                    pair[1].in_dims.factors()
                )));
            }
        }
        let in_dims = first.in_dims.clone();
        let out_dims = stages.last().unwrap().out_dims.clone();
        Ok(Channel { kind: ChannelKind::Composite(stages), in_dims, out_dims })
    }

    /// `Λ = a ∘ π ∘ γ` for input dimension `d1`, resource state `σ` on
    /// `H2 ⊗ H3`, and projection `F` on `H1 ⊗ H2`.
    pub fn teleportation(
        d1: usize,
        sigma23: DensityOperator,
        projector: CMatrix,
        label: impl Into<String>,
    ) -> Result<Self> {
        let lift = Channel::lifting(FactoredDims::single(d1), sigma23);
        let tri = lift.out_dims.clone();
        if tri.len() != 3 {
            return Err(Error::DimensionMismatch("resource must be bipartite".into()));
        }
        let measure = Channel::measurement(tri.clone(), projector, label)?;
        if prefix_len(&tri, measure_dim(&measure)) != Some(2) {
            return Err(Error::DimensionMismatch("projection must act on H1 ⊗ H2".into()));
        }
        let reduce = Channel::partial_trace(tri, vec![2])?;
        Channel::composite(vec![lift, measure, reduce])
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn in_dims(&self) -> &FactoredDims {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &FactoredDims {
        &self.out_dims
    }

    /// Apply to a state. A null measurement outcome is reported as
    /// [`Error::ZeroProbability`].
    pub fn apply(&self, state: &DensityOperator) -> Result<DensityOperator> {
        if state.dim() != self.in_dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} into channel expecting {}",
                state.dim(),
                self.in_dims.total()
            )));
        }
        // Re-tag the input so composite stages see their declared factors.
        let state = DensityOperator::from_parts_unchecked(self.in_dims.clone(), state.matrix().clone());
        match &self.kind {
            ChannelKind::Lifting { sigma } => Ok(lift(&state, sigma)),
            ChannelKind::Measurement { projector, label } => {
                let outcome = measure(&state, projector, label.clone())?;
                outcome.post_state.ok_or_else(|| Error::ZeroProbability(label.clone()))
            }
            ChannelKind::PartialTrace { keep } => {
                let m = partial_trace(state.matrix(), &self.in_dims, keep)?;
                Ok(DensityOperator::from_parts_unchecked(self.out_dims.clone(), m))
            }
            ChannelKind::Unitary { unitary } => apply_key(&state, unitary),
            ChannelKind::Composite(stages) => {
                stages.iter().try_fold(state, |acc, stage| stage.apply(&acc))
            }
        }
    }
}

fn measure_dim(c: &Channel) -> usize {
    match &c.kind {
        ChannelKind::Measurement { projector, .. } => projector.rows(),
        _ => unreachable!("measurement stage"),
    }
}

/// Product lifting `ρ ⊗ σ` with concatenated factor dimensions.
pub fn lift(rho: &DensityOperator, sigma23: &DensityOperator) -> DensityOperator {
    DensityOperator::from_parts_unchecked(
        rho.dims().concat(sigma23.dims()),
        rho.matrix().kron(sigma23.matrix()),
    )
}

/// Filtering measurement by the projection `F` on the leading factors of
/// `state` (identity on the rest).
pub fn measure(
    state: &DensityOperator,
    projector: &CMatrix,
    label: impl Into<String>,
) -> Result<MeasurementOutcome> {
    let residual = projector.projection_residual();
    if residual > STRUCTURAL_TOL {
        return Err(Error::NotProjection(residual));
    }
    if prefix_len(state.dims(), projector.rows()).is_none() {
        return Err(Error::DimensionMismatch(format!(
            "projection of dimension {} does not act on leading factors of {:?}",
            projector.rows(),
            state.dims().factors()
        )));
    }
    let tail = state.dim() / projector.rows();
    let filtered = sandwich_prefix(projector, state.matrix(), tail);
    let probability = filtered.trace().re;
    let post_state = (probability > NULL_PROBABILITY).then(|| {
        DensityOperator::from_parts_unchecked(
            state.dims().clone(),
            filtered.scale_real(1.0 / probability),
        )
    });
    Ok(MeasurementOutcome { probability, post_state, outcome_label: label.into() })
}

/// Bob's key channel `ρ ↦ U ρ U*`.
pub fn apply_key(rho3: &DensityOperator, unitary: &CMatrix) -> Result<DensityOperator> {
    let residual = unitary.unitarity_residual();
    if residual > STRUCTURAL_TOL {
        return Err(Error::NotUnitary(residual));
    }
    if unitary.rows() != rho3.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} key on a state of dimension {}",
            unitary.rows(),
            unitary.cols(),
            rho3.dim()
        )));
    }
    let out = unitary.dot(rho3.matrix()).dot(&unitary.adjoint());
    Ok(DensityOperator::from_matrix_unchecked(out))
}

/// How [`teleportation_channel_via`] evaluates the channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelPath {
    /// Materialize `ρ ⊗ σ` on `H1 ⊗ H2 ⊗ H3`; limited to
    /// [`EXPLICIT_PATH_MAX_DIM`].
    Explicit,
    /// Coefficient-matrix identity.
    Fast,
    /// Explicit when within the size limit, otherwise fast.
    Auto,
}

/// `M = T · conj(λ) / scale` (a `d1 x d3` matrix); the unnormalized channel
/// output is `M* ρ M`.
pub fn coefficient_operator(xi: &MeasurementVector, resource: &EntangledResource) -> Result<CMatrix> {
    if xi.d2() != resource.d2() {
        return Err(Error::DimensionMismatch(format!(
            "measurement H2 dimension {} vs resource H2 dimension {}",
            xi.d2(),
            resource.d2()
        )));
    }
    Ok(xi.coefficients().dot(&resource.lambda().conj()).scale_real(1.0 / resource.scale()))
}

/// `tr_12[(F ⊗ 1)(ρ ⊗ σ)(F ⊗ 1)]` on the materialized tripartite operator,
/// for any (possibly unnormalized) operator `σ` on `H2 ⊗ H3`.
pub fn explicit_numerator(
    rho: &CMatrix,
    projector: &CMatrix,
    sigma23: &CMatrix,
    d2: usize,
) -> Result<CMatrix> {
    let d1 = rho.rows();
    if !rho.is_square() || !sigma23.is_square() || sigma23.rows() % d2 != 0 {
        return Err(Error::DimensionMismatch("explicit numerator operands".into()));
    }
    let d3 = sigma23.rows() / d2;
    if projector.rows() != d1 * d2 || !projector.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "projection dimension {} vs d1·d2 = {}",
            projector.rows(),
            d1 * d2
        )));
    }
    let total = d1 * d2 * d3;
    if total > EXPLICIT_PATH_MAX_DIM {
        return Err(Error::ExplicitPathTooLarge(total));
    }
    let lifted_state = rho.kron(sigma23);
    let post = sandwich_prefix(projector, &lifted_state, d3);
    let dims = FactoredDims::new(vec![d1, d2, d3])?;
    partial_trace(&post, &dims, &[2])
}

fn check_dims(rho: &DensityOperator, xi: &MeasurementVector, resource: &EntangledResource) -> Result<()> {
    if rho.dim() != xi.d1() {
        return Err(Error::DimensionMismatch(format!(
            "input state dimension {} vs measurement H1 dimension {}",
            rho.dim(),
            xi.d1()
        )));
    }
    if xi.d2() != resource.d2() {
        return Err(Error::DimensionMismatch(format!(
            "measurement H2 dimension {} vs resource H2 dimension {}",
            xi.d2(),
            resource.d2()
        )));
    }
    Ok(())
}

/// Unnormalized output `tr_12[(F ⊗ 1)(ρ ⊗ |ψ⟩⟨ψ|)(F ⊗ 1)]` for the
/// normalized resource; its trace is the outcome probability.
pub fn unnormalized_output(
    path: ChannelPath,
    rho: &DensityOperator,
    xi: &MeasurementVector,
    resource: &EntangledResource,
) -> Result<CMatrix> {
    check_dims(rho, xi, resource)?;
    let total = xi.d1() * xi.d2() * resource.d3();
    let explicit = match path {
        ChannelPath::Explicit => true,
        ChannelPath::Fast => false,
        ChannelPath::Auto => total <= EXPLICIT_PATH_MAX_DIM,
    };
    if explicit {
        explicit_numerator(rho.matrix(), &xi.projector(), resource.sigma().matrix(), resource.d2())
    } else {
        let m = coefficient_operator(xi, resource)?;
        Ok(m.adjoint().dot(rho.matrix()).dot(&m))
    }
}

/// `Λ_k ρ` and the outcome probability, using [`ChannelPath::Auto`].
pub fn teleportation_channel(
    rho: &DensityOperator,
    xi: &MeasurementVector,
    resource: &EntangledResource,
) -> Result<(DensityOperator, f64)> {
    teleportation_channel_via(ChannelPath::Auto, rho, xi, resource)
}

/// `Λ_k ρ` (state on `H3`) and the outcome probability under the
/// normalized-resource convention.
pub fn teleportation_channel_via(
    path: ChannelPath,
    rho: &DensityOperator,
    xi: &MeasurementVector,
    resource: &EntangledResource,
) -> Result<(DensityOperator, f64)> {
    let numerator = unnormalized_output(path, rho, xi, resource)?;
    let probability = numerator.trace().re;
    if probability <= NULL_PROBABILITY {
        return Err(Error::ZeroProbability(xi.label().to_string()));
    }
    let out = numerator.scale_real(1.0 / probability);
    Ok((DensityOperator::from_matrix_unchecked(out), probability))
}
