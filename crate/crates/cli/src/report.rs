//! Evaluation of a scenario and the JSON report it produces.

use serde::{Deserialize, Serialize};
use teleport_core::protocol::{run_protocol, ProtocolReport, ProtocolRun};
use teleport_core::scheme::{
    build_bell_family, build_sign_family, gram_residual, linearity_check, solve_weak,
    SchemeEntry, SchemeVerification, TeleportationScheme, WeakSolution,
};
use teleport_core::states::{build_resource, maximal_xi, DensityOperator, MeasurementVector};
use teleport_core::tensor::{haar_random_unitary, random_density, CMatrix};

use crate::config::{
    matrix_from_rows, rows_from_matrix, FamilyKind, LambdaSpec, MatrixRows, RhoSpec, ScenarioConfig,
};

pub const REPORT_SCHEMA_VERSION: &str = "1";

/// Random probe states used on top of the scenario's own input state.
const VERIFY_SAMPLES: usize = 8;
const LINEARITY_TRIALS: usize = 20;
/// A protocol run fails when a realized outcome recovers the input worse than this.
pub const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntrySummary {
    pub label: String,
    pub success_prob: f64,
    pub key: MatrixRows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionSummary {
    pub label: String,
    pub residual: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub n: usize,
    pub family: FamilyKind,
    pub lambda_unitary: bool,
    pub completeness: f64,
    pub entries: Vec<EntrySummary>,
    pub rejections: Vec<RejectionSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledResidual {
    pub label: String,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearitySummary {
    pub label: String,
    pub is_linear: bool,
    pub max_trace_spread: f64,
    pub analytic_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharedKeyEntrySummary {
    pub label: String,
    pub phase_overlap: f64,
    pub matches_up_to_phase: bool,
    pub shared_residual: f64,
    pub verified_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharedKeySummary {
    pub shared_key: MatrixRows,
    pub probe_seed: u64,
    pub hypothesis_holds: bool,
    pub entries: Vec<SharedKeyEntrySummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub tolerance: f64,
    pub solvable: bool,
    pub gram_residual: f64,
    pub key_unitarity_residual: f64,
    pub identity_residuals: Vec<LabeledResidual>,
    pub probability_residual: f64,
    pub linearity: Vec<LinearitySummary>,
    pub shared_key: Option<SharedKeySummary>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: String,
    pub scenario: ScenarioConfig,
    pub scheme: SchemeSummary,
    pub verification: VerificationSummary,
    pub protocol: Option<ProtocolReport>,
    pub passed: bool,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

/// Everything computed for a scenario, before it is flattened into a report.
pub struct Evaluation {
    pub scheme: TeleportationScheme,
    pub rho: DensityOperator,
    pub rejections: Vec<RejectionSummary>,
    pub verification: VerificationSummary,
}

fn lambda_of(cfg: &ScenarioConfig) -> teleport_core::Result<CMatrix> {
    Ok(match &cfg.lambda {
        None | Some(LambdaSpec::Named(_)) => CMatrix::identity(cfg.n),
        Some(LambdaSpec::Haar { haar }) => haar_random_unitary(cfg.n, *haar),
        Some(LambdaSpec::Matrix(rows)) => {
            matrix_from_rows(rows).map_err(teleport_core::Error::InvalidArgument)?
        }
    })
}

fn rho_of(cfg: &ScenarioConfig) -> teleport_core::Result<DensityOperator> {
    match &cfg.rho {
        RhoSpec::Random { random } => Ok(random_density(cfg.n, *random)),
        RhoSpec::Matrix(rows) => DensityOperator::from_matrix(
            matrix_from_rows(rows).map_err(teleport_core::Error::InvalidArgument)?,
        ),
    }
}

/// Solve each vector on its own so that unsolvable ones are reported rather
/// than aborting the whole scheme.
fn solve_each(
    lambda: &CMatrix,
    xis: Vec<MeasurementVector>,
) -> teleport_core::Result<(TeleportationScheme, Vec<RejectionSummary>, f64)> {
    let resource = build_resource(lambda)?;
    let gram = gram_residual(&xis.iter().collect::<Vec<_>>());
    let mut family = Vec::new();
    let mut rejections = Vec::new();
    for xi in xis {
        match solve_weak(&xi, &resource)? {
            WeakSolution::Solved(k) => family.push(SchemeEntry {
                label: xi.label().to_string(),
                xi,
                key: k.key,
                success_prob: k.success_prob,
            }),
            WeakSolution::Rejected(r) => rejections.push(RejectionSummary {
                label: xi.label().to_string(),
                residual: r.residual,
                c: r.c,
            }),
        }
    }
    // Folded from +0.0: an empty f64 sum is −0.0.
    let completeness = family.iter().fold(0.0, |acc, e| acc + e.success_prob);
    let n = resource.d2();
    let scheme = TeleportationScheme { n, resource, family, completeness, shared_key: None };
    Ok((scheme, rejections, gram))
}

pub fn evaluate(cfg: &ScenarioConfig) -> teleport_core::Result<Evaluation> {
    let tol = cfg.tolerance();
    let n = cfg.n;
    let lambda = lambda_of(cfg)?;
    let rho = rho_of(cfg)?;

    let (scheme, rejections, family_gram, xis) = match cfg.family {
        FamilyKind::Sign => {
            let scheme = build_sign_family(n.trailing_zeros(), &lambda)?;
            let gram = scheme.gram_residual();
            let xis = scheme.family.iter().map(|e| e.xi.clone()).collect();
            (scheme, Vec::new(), gram, xis)
        }
        FamilyKind::Bell => {
            let scheme = build_bell_family(n)?;
            let gram = scheme.gram_residual();
            let xis = scheme.family.iter().map(|e| e.xi.clone()).collect();
            (scheme, Vec::new(), gram, xis)
        }
        FamilyKind::Maximal | FamilyKind::Custom => {
            let xis: Vec<MeasurementVector> = match &cfg.custom_xi {
                Some(list) if cfg.family == FamilyKind::Custom => list
                    .iter()
                    .map(|c| {
                        let t = matrix_from_rows(&c.coefficients)
                            .map_err(teleport_core::Error::InvalidArgument)?;
                        MeasurementVector::new(t, c.label.clone())
                    })
                    .collect::<teleport_core::Result<_>>()?,
                _ => vec![maximal_xi(n)],
            };
            let (scheme, rejections, gram) = solve_each(&lambda, xis.clone())?;
            (scheme, rejections, gram, xis)
        }
    };

    let linearity = if scheme.resource.lambda_is_unitary() {
        xis.iter()
            .filter(|xi| xi.is_diagonal())
            .map(|xi| {
                linearity_check(xi, &scheme.resource, LINEARITY_TRIALS, cfg.seed).map(|r| {
                    LinearitySummary {
                        label: xi.label().to_string(),
                        is_linear: r.is_linear,
                        max_trace_spread: r.max_trace_spread,
                        analytic_deviation: r.analytic_deviation,
                    }
                })
            })
            .collect::<teleport_core::Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let checked = if scheme.family.is_empty() {
        SchemeVerification {
            gram_residual: 0.0,
            key_unitarity_residual: 0.0,
            identity_residuals: Vec::new(),
            probability_residual: 0.0,
            completeness: 0.0,
        }
    } else {
        scheme.verify(VERIFY_SAMPLES, cfg.seed, &[&rho])?
    };
    let shared_key = scheme.shared_key.as_ref().map(|s| SharedKeySummary {
        shared_key: rows_from_matrix(&s.shared_key),
        probe_seed: s.probe_seed,
        hypothesis_holds: s.hypothesis_holds,
        entries: s
            .entries
            .iter()
            .map(|e| SharedKeyEntrySummary {
                label: e.label.clone(),
                phase_overlap: e.phase_overlap,
                matches_up_to_phase: e.matches_up_to_phase,
                shared_residual: e.shared_residual,
                verified_residual: e.verified_residual,
            })
            .collect(),
    });
    let solvable = rejections.is_empty() && !scheme.family.is_empty();
    let gram_residual = family_gram.max(checked.gram_residual);
    let passed = solvable
        && gram_residual <= tol
        && checked.key_unitarity_residual <= tol
        && checked.max_identity_residual() <= tol
        && checked.probability_residual <= tol
        && scheme.completeness <= 1.0 + tol;
    let verification = VerificationSummary {
        tolerance: tol,
        solvable,
        gram_residual,
        key_unitarity_residual: checked.key_unitarity_residual,
        identity_residuals: checked
            .identity_residuals
            .into_iter()
            .map(|(label, residual)| LabeledResidual { label, residual })
            .collect(),
        probability_residual: checked.probability_residual,
        linearity,
        shared_key,
        passed,
    };
    Ok(Evaluation { scheme, rho, rejections, verification })
}

impl Evaluation {
    pub fn simulate(&self, trials: u64, seed: u64) -> teleport_core::Result<ProtocolReport> {
        run_protocol(&ProtocolRun {
            scheme: &self.scheme,
            rho_in: self.rho.clone(),
            trials: trials as usize,
            seed,
        })
    }

    pub fn into_report(
        self,
        command: &str,
        scenario: ScenarioConfig,
        protocol: Option<ProtocolReport>,
    ) -> ReportDocument {
        let protocol_ok = protocol
            .as_ref()
            .is_none_or(|p| p.min_fidelity.is_none_or(|f| f >= FIDELITY_FLOOR));
        let passed = self.verification.passed && protocol_ok;
        ReportDocument {
            schema_version: REPORT_SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            scheme: SchemeSummary {
                n: self.scheme.n,
                family: scenario.family,
                lambda_unitary: self.scheme.resource.lambda_is_unitary(),
                completeness: self.scheme.completeness,
                entries: self
                    .scheme
                    .family
                    .iter()
                    .map(|e| EntrySummary {
                        label: e.label.clone(),
                        success_prob: e.success_prob,
                        key: rows_from_matrix(&e.key),
                    })
                    .collect(),
                rejections: self.rejections,
            },
            scenario,
            verification: self.verification,
            protocol,
            passed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(src: &str) -> ScenarioConfig {
        ScenarioConfig::from_str(src, "test").unwrap()
    }

    #[test]
    fn bell_two_is_complete() {
        let c = cfg(r#"{"n": 2, "family": "bell", "rho": {"random": 1}}"#);
        let ev = evaluate(&c).unwrap();
        assert!(ev.verification.passed);
        assert!((ev.scheme.completeness - 1.0).abs() < 1e-12);
        assert_eq!(ev.scheme.family.len(), 4);
    }

    #[test]
    fn unbalanced_custom_vector_is_rejected() {
        let a = 0.9f64.sqrt();
        let b = 0.1f64.sqrt();
        let src = format!(
            r#"{{"n": 2, "family": "custom", "rho": {{"random": 2}},
                "custom_xi": [{{"label": "t", "coefficients": [[[{a},0],[0,0]],[[0,0],[{b},0]]]}}]}}"#
        );
        let ev = evaluate(&cfg(&src)).unwrap();
        assert!(!ev.verification.solvable && !ev.verification.passed);
        assert_eq!(ev.rejections.len(), 1);
        assert_eq!(ev.verification.linearity.len(), 1);
        assert!(!ev.verification.linearity[0].is_linear);
    }

    #[test]
    fn report_round_trips_bit_exactly() {
        let c = cfg(r#"{"n": 4, "family": "sign", "lambda": {"haar": 5}, "rho": {"random": 3}, "trials": 200, "seed": 11}"#);
        let ev = evaluate(&c).unwrap();
        let proto = ev.simulate(c.trials, c.seed).unwrap();
        let report = ev.into_report("run", c, Some(proto));
        let json = report.to_json();
        let back: ReportDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_json(), json);
        assert!(report.verification.shared_key.is_some());
    }
}
