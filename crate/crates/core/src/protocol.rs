//! Monte-Carlo simulation of the teleportation protocol.
//!
//! Each trial draws Alice's outcome from the analytic distribution of the
//! scheme (outcome `k` with its `ρ`-independent success probability, the
//! residual mass as an "unmeasured" event). Only the label `k` reaches Bob, who
//! applies `U_k` to his reduced state. Trials use independent random streams
//! keyed by `(seed, trial index)`, so the report does not depend on how the
//! trials are scheduled.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_key, teleportation_channel};
use crate::error::{Error, Result};
use crate::rng;
use crate::scheme::TeleportationScheme;
use crate::states::DensityOperator;
use crate::tensor::{hermitian_eigen, CMatrix};
use crate::{NULL_PROBABILITY, STRUCTURAL_TOL};

#[derive(Clone, Debug)]
pub struct ProtocolRun<'a> {
    pub scheme: &'a TeleportationScheme,
    pub rho_in: DensityOperator,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeStats {
    pub label: String,
    pub count: u64,
    pub analytic_probability: f64,
    /// Fidelity of Bob's corrected state with the input; `None` for outcomes
    /// that cannot fire.
    pub fidelity_after_key: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub trials: u64,
    pub seed: u64,
    pub per_outcome: Vec<OutcomeStats>,
    pub unmeasured_count: u64,
    pub unmeasured_probability: f64,
    /// Count-weighted mean over realized family outcomes.
    pub mean_fidelity: Option<f64>,
    pub min_fidelity: Option<f64>,
}

impl ProtocolReport {
    pub fn unmeasured_fraction(&self) -> f64 {
        self.unmeasured_count as f64 / self.trials as f64
    }
}

fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(m, STRUCTURAL_TOL)?;
    let n = m.rows();
    let mut out = CMatrix::zeros(n, n);
    for (val, v) in values.iter().zip(&vectors) {
        let s = val.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[i] * v[j].conj() * s;
            }
        }
    }
    Ok(out)
}

/// Uhlmann fidelity `(tr √(√a b √a))²`.
pub fn fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let root = sqrt_psd(a.matrix())?;
    let inner = root.dot(b.matrix()).dot(&root);
    // Symmetrize away rounding before the eigen-solve.
    let inner = inner.add(&inner.adjoint())?.scale_real(0.5);
    let (values, _) = hermitian_eigen(&inner, STRUCTURAL_TOL)?;
    let tr: f64 = values.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok(tr * tr)
}

pub fn run_protocol(run: &ProtocolRun<'_>) -> Result<ProtocolReport> {
    let scheme = run.scheme;
    if run.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if run.rho_in.dim() != scheme.n {
        return Err(Error::DimensionMismatch(format!(
            "input of dimension {} for a scheme of dimension {}",
            run.rho_in.dim(),
            scheme.n
        )));
    }
    scheme.check_structure()?;
    let total: f64 = scheme.family.iter().map(|e| e.success_prob).sum();
    if total > 1.0 + STRUCTURAL_TOL {
        return Err(Error::InvalidScheme(format!("outcome probabilities sum to {total}")));
    }
    let unmeasured_probability = (1.0 - total).max(0.0);

    // Bob's corrected state per outcome: π_k, a, then U_k.
    let fidelities = scheme
        .family
        .iter()
        .map(|e| {
            if e.success_prob <= NULL_PROBABILITY {
                return Ok(None);
            }
            let (rho3, _) = teleportation_channel(&run.rho_in, &e.xi, &scheme.resource)?;
            let recovered = apply_key(&rho3, &e.key)?;
            fidelity(&run.rho_in, &recovered).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;

    let cumulative: Vec<f64> = scheme
        .family
        .iter()
        .scan(0.0, |acc, e| {
            *acc += e.success_prob;
            Some(*acc)
        })
        .collect();
    let outcomes = cumulative.len();

    let counts = (0..run.trials as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; outcomes + 1],
            |mut counts, trial| {
                let u: f64 = rng::stream(run.seed, trial).random();
                let k = cumulative.iter().position(|&c| u < c).unwrap_or(outcomes);
                counts[k] += 1;
                counts
            },
        )
        .reduce(
            || vec![0u64; outcomes + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let per_outcome: Vec<OutcomeStats> = scheme
        .family
        .iter()
        .zip(&fidelities)
        .zip(&counts)
        .map(|((e, f), &count)| OutcomeStats {
            label: e.label.clone(),
            count,
            analytic_probability: e.success_prob,
            fidelity_after_key: *f,
        })
        .collect();

    let realized: Vec<(u64, f64)> = per_outcome
        .iter()
        .filter(|o| o.count > 0)
        .filter_map(|o| o.fidelity_after_key.map(|f| (o.count, f)))
        .collect();
    let weight: u64 = realized.iter().map(|(c, _)| c).sum();
    let mean_fidelity =
        (weight > 0).then(|| realized.iter().map(|&(c, f)| c as f64 * f).sum::<f64>() / weight as f64);
    let min_fidelity = realized.iter().map(|&(_, f)| f).reduce(f64::min);

    Ok(ProtocolReport {
        trials: run.trials as u64,
        seed: run.seed,
        per_outcome,
        unmeasured_count: counts[outcomes],
        unmeasured_probability,
        mean_fidelity,
        min_fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{build_bell_family, build_sign_family};
    use crate::states::{density_from_ket, Ket};
    use crate::tensor::{haar_random_unitary, random_density, FactoredDims};

    fn basis(k: usize) -> DensityOperator {
        density_from_ket(&Ket::basis(FactoredDims::single(2), k).unwrap()).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let rho = random_density(3, 1);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        assert!(fidelity(&basis(0), &basis(1)).unwrap().abs() < 1e-12);
        let half = DensityOperator::maximally_mixed(2);
        assert!((fidelity(&basis(0), &half).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(fidelity(&rho, &half), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded() {
        for seed in 0..10 {
            let a = random_density(4, seed);
            let b = random_density(4, seed + 100);
            let ab = fidelity(&a, &b).unwrap();
            let ba = fidelity(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-10);
            assert!((0.0..=1.0 + 1e-10).contains(&ab));
        }
    }

    #[test]
    fn bell_family_statistics() {
        let scheme = build_bell_family(2).unwrap();
        let run = ProtocolRun { scheme: &scheme, rho_in: random_density(2, 5), trials: 10_000, seed: 42 };
        let rep = run_protocol(&run).unwrap();
        let sigma = (10_000.0f64 * 0.25 * 0.75).sqrt();
        for o in &rep.per_outcome {
            assert!((o.count as f64 - 2500.0).abs() < 5.0 * sigma, "{o:?}");
            assert!(o.fidelity_after_key.unwrap() >= 1.0 - 1e-10);
        }
        assert_eq!(rep.unmeasured_count, 0);
        assert!(rep.unmeasured_probability.abs() < 1e-10);
        assert!(rep.mean_fidelity.unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn sign_family_has_unmeasured_mass() {
        let scheme = build_sign_family(2, &haar_random_unitary(4, 3)).unwrap();
        let run = ProtocolRun { scheme: &scheme, rho_in: random_density(4, 8), trials: 4000, seed: 9 };
        let rep = run_protocol(&run).unwrap();
        assert!((rep.unmeasured_probability - 0.75).abs() < 1e-10);
        let mass: f64 = rep.per_outcome.iter().map(|o| o.analytic_probability).sum::<f64>()
            + rep.unmeasured_probability;
        assert!((mass - 1.0).abs() < 1e-10);
        assert!((rep.unmeasured_fraction() - 0.75).abs() < 0.05);
        assert!(rep.min_fidelity.unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn single_trial_is_deterministic() {
        let scheme = build_bell_family(3).unwrap();
        let rho = random_density(3, 2);
        let a = run_protocol(&ProtocolRun { scheme: &scheme, rho_in: rho.clone(), trials: 1, seed: 77 }).unwrap();
        let b = run_protocol(&ProtocolRun { scheme: &scheme, rho_in: rho, trials: 1, seed: 77 }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.per_outcome.iter().map(|o| o.count).sum::<u64>() + a.unmeasured_count, 1);
    }

    #[test]
    fn rejects_bad_runs() {
        let scheme = build_bell_family(2).unwrap();
        let zero = ProtocolRun { scheme: &scheme, rho_in: random_density(2, 0), trials: 0, seed: 0 };
        assert!(run_protocol(&zero).is_err());
        let wrong = ProtocolRun { scheme: &scheme, rho_in: random_density(3, 0), trials: 5, seed: 0 };
        assert!(matches!(run_protocol(&wrong), Err(Error::DimensionMismatch(_))));
        let mut broken = scheme.clone();
        broken.family[0].key = CMatrix::identity(2).scale_real(2.0);
        let bad = ProtocolRun { scheme: &broken, rho_in: random_density(2, 0), trials: 5, seed: 0 };
        assert!(matches!(run_protocol(&bad), Err(Error::InvalidScheme(_))));
    }
}
