use crate::channel::{unnormalized_output, ChannelPath};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::states::{EntangledResource, MeasurementVector};
use crate::tensor::random_density;
use crate::STRUCTURAL_TOL;

/// Numeric and analytic verdicts on whether the outcome probability of a
/// diagonal measurement vector depends on the input state.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearityReport {
    pub is_linear: bool,
    /// `max − min` of the outcome probability over the sampled states.
    pub max_trace_spread: f64,
    /// `max_k ||t_k|² − 1/N|`; zero exactly when every `t_k` has modulus `N^{-1/2}`.
    pub analytic_deviation: f64,
    pub trials: usize,
}

impl LinearityReport {
    pub fn analytic_is_linear(&self) -> bool {
        self.analytic_deviation <= STRUCTURAL_TOL
    }
}

/// Sample `trials` random inputs and measure the spread of the outcome
/// probability `tr[(F ⊗ 1)(ρ ⊗ |ψ⟩⟨ψ|)(F ⊗ 1)]`.
pub fn linearity_check(
    xi: &MeasurementVector,
    resource: &EntangledResource,
    trials: usize,
    seed: u64,
) -> Result<LinearityReport> {
    if !xi.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    if !resource.lambda_is_unitary() {
        return Err(Error::NotUnitary(resource.lambda().unitarity_residual()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let n = xi.d1();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..trials as u64 {
        let rho = random_density(n, derive_seed(seed, i));
        let p = unnormalized_output(ChannelPath::Fast, &rho, xi, resource)?.trace().re;
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let spread = hi - lo;
    let inv_n = 1.0 / n as f64;
    let analytic_deviation = xi
        .coefficients()
        .diagonal()
        .iter()
        .map(|t| (t.norm_sqr() - inv_n).abs())
        .fold(0.0, f64::max);
    Ok(LinearityReport {
        is_linear: spread <= STRUCTURAL_TOL,
        max_trace_spread: spread,
        analytic_deviation,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::teleportation_channel_via;
    use crate::states::{build_resource, density_from_ket, diagonal_xi, Ket};
    use crate::tensor::{haar_random_unitary, CMatrix, FactoredDims};
    use crate::C64;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn balanced_coefficients_are_linear() {
        let resource = build_resource(&haar_random_unitary(2, 1)).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let rep = linearity_check(&diagonal_xi(&[h, h]).unwrap(), &resource, 20, 4).unwrap();
        assert!(rep.is_linear && rep.analytic_is_linear());
        assert!(rep.max_trace_spread <= 1e-12);

        let t = [C64::from_polar(FRAC_1_SQRT_2, 0.3), C64::from_polar(FRAC_1_SQRT_2, 1.1)];
        let rep = linearity_check(&diagonal_xi(&t).unwrap(), &resource, 20, 5).unwrap();
        assert!(rep.is_linear && rep.analytic_is_linear());
    }

    /// Closed-form outcome probability Σ_h |t_h|² ⟨h|ρ|h⟩ / N for unitary λ.
    fn closed_form(t: &[C64], rho: &CMatrix) -> f64 {
        let n = t.len() as f64;
        t.iter().enumerate().map(|(h, th)| th.norm_sqr() * rho[(h, h)].re).sum::<f64>() / n
    }

    #[test]
    fn unbalanced_coefficients_are_nonlinear() {
        let t = [C64::new(0.9f64.sqrt(), 0.0), C64::new(0.1f64.sqrt(), 0.0)];
        let xi = diagonal_xi(&t).unwrap();
        let resource = build_resource(&haar_random_unitary(2, 2)).unwrap();
        let rep = linearity_check(&xi, &resource, 20, 6).unwrap();
        assert!(!rep.is_linear && !rep.analytic_is_linear());
        assert!((rep.analytic_deviation - 0.4).abs() < 1e-12);

        let basis = |k| density_from_ket(&Ket::basis(FactoredDims::single(2), k).unwrap()).unwrap();
        let p = |k| unnormalized_output(ChannelPath::Explicit, &basis(k), &xi, &resource).unwrap().trace().re;
        let (p0, p1) = (p(0), p(1));
        assert!((p0 - closed_form(&t, basis(0).matrix())).abs() < 1e-12);
        assert!((p1 - closed_form(&t, basis(1).matrix())).abs() < 1e-12);
        assert!((p0 / p1 - 9.0).abs() < 1e-10);
    }

    #[test]
    fn nonlinearity_witness() {
        let t = [C64::new(0.9f64.sqrt(), 0.0), C64::new(0.1f64.sqrt(), 0.0)];
        let xi = diagonal_xi(&t).unwrap();
        let resource = build_resource(&CMatrix::identity(2)).unwrap();
        let lam = |rho: &crate::states::DensityOperator| {
            teleportation_channel_via(ChannelPath::Explicit, rho, &xi, &resource).unwrap().0.into_matrix()
        };
        let best = (0..20u64)
            .map(|i| {
                let a = random_density(2, 2 * i);
                let b = random_density(2, 2 * i + 1);
                let mid = crate::states::DensityOperator::from_matrix(
                    a.matrix().add(b.matrix()).unwrap().scale_real(0.5),
                )
                .unwrap();
                let avg = lam(&a).add(&lam(&b)).unwrap().scale_real(0.5);
                lam(&mid).distance(&avg)
            })
            .fold(0.0, f64::max);
        assert!(best > 1e-6, "largest deviation {best}");
    }

    #[test]
    fn rejects_non_diagonal_and_non_unitary() {
        let resource = build_resource(&CMatrix::identity(2)).unwrap();
        let x = CMatrix::from_real(2, 2, &[0., FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.]).unwrap();
        let xi = MeasurementVector::new(x, "offdiag").unwrap();
        assert_eq!(linearity_check(&xi, &resource, 3, 0), Err(Error::NotDiagonal));
        let bad = build_resource(&CMatrix::diag(&[C64::new(0.6, 0.0), C64::new(0.8, 0.0)])).unwrap();
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!(matches!(
            linearity_check(&diagonal_xi(&[h, h]).unwrap(), &bad, 3, 0),
            Err(Error::NotUnitary(_))
        ));
    }
}
