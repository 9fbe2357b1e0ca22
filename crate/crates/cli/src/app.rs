//! The `verify`, `run` and `keys` commands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use teleport_core::scheme::{textbook_qubit_keys, phase_overlap};
use teleport_core::tensor::CMatrix;
use thiserror::Error;

use crate::config::{matrix_from_rows, ConfigError, FamilyKind, MatrixRows, ScenarioConfig};
use crate::report::{evaluate, ReportDocument};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Verify,
    Run,
    Keys,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Run => "run",
            Command::Keys => "keys",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub quiet: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
    #[error("computation failed: {0}")]
    Compute(#[from] teleport_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            _ => 2,
        }
    }
}

/// What a command produced: the report, the text for stdout, and the text for
/// stderr (suppressed by `--quiet`).
#[derive(Debug)]
pub struct Outcome {
    pub report: ReportDocument,
    pub stdout: String,
    pub summary: String,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.report.passed {
            0
        } else {
            1
        }
    }
}

/// 17 significant digits.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_matrix(rows: &MatrixRows, indent: &str) -> String {
    let mut s = String::new();
    for row in rows {
        let cells: Vec<String> =
            row.iter().map(|[re, im]| format!("[{}, {}]", real(*re), real(*im))).collect();
        let _ = writeln!(s, "{indent}{}", cells.join("  "));
    }
    s
}

fn summary_text(r: &ReportDocument) -> String {
    let v = &r.verification;
    let mut s = String::new();
    let family = format!("{:?}", r.scheme.family).to_lowercase();
    let _ = writeln!(s, "{} n={} family={family}", r.command, r.scheme.n);
    let _ = writeln!(s, "  outcomes solved: {}", r.scheme.entries.len());
    for e in &r.scheme.rejections {
        let _ = writeln!(s, "  no key for '{}' (residual {}, c {})", e.label, real(e.residual), real(e.c));
    }
    let _ = writeln!(s, "  completeness: {}", real(r.scheme.completeness));
    let max_id = v.identity_residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
    let _ = writeln!(s, "  max recovery residual: {}", real(max_id));
    let _ = writeln!(s, "  gram residual: {}", real(v.gram_residual));
    let _ = writeln!(s, "  probability residual: {}", real(v.probability_residual));
    for l in &v.linearity {
        let _ = writeln!(
            s,
            "  linearity '{}': {} (spread {}, deviation {})",
            l.label,
            l.is_linear,
            real(l.max_trace_spread),
            real(l.analytic_deviation)
        );
    }
    if let Some(sk) = &v.shared_key {
        let _ = writeln!(s, "  single shared key works for every outcome: {}", sk.hypothesis_holds);
    }
    if let Some(p) = &r.protocol {
        let _ = writeln!(s, "  trials: {} (seed {})", p.trials, p.seed);
        for o in &p.per_outcome {
            let _ = writeln!(s, "    {}: {} (p = {})", o.label, o.count, real(o.analytic_probability));
        }
        let _ = writeln!(
            s,
            "    unmeasured: {} (p = {})",
            p.unmeasured_count,
            real(p.unmeasured_probability)
        );
        if let Some(f) = p.mean_fidelity {
            let _ = writeln!(s, "  mean fidelity: {}", real(f));
        }
        if let Some(f) = p.min_fidelity {
            let _ = writeln!(s, "  min fidelity: {}", real(f));
        }
    }
    let _ = writeln!(s, "  result: {}", if r.passed { "PASS" } else { "FAIL" });
    s
}

/// For two-dimensional Bell keys, name the textbook key each one equals up to
/// a global phase.
fn textbook_match(key: &CMatrix) -> Option<usize> {
    textbook_qubit_keys()
        .iter()
        .position(|u| (phase_overlap(u, key) - 1.0).abs() <= teleport_core::STRUCTURAL_TOL)
}

fn keys_text(r: &ReportDocument) -> String {
    let mut s = String::new();
    for e in &r.scheme.entries {
        let _ = writeln!(s, "key {} (success probability {})", e.label, real(e.success_prob));
        s.push_str(&format_matrix(&e.key, "  "));
        if r.scheme.family == FamilyKind::Bell && r.scheme.n == 2 {
            if let Ok(m) = matrix_from_rows(&e.key) {
                match textbook_match(&m) {
                    Some(j) => {
                        let _ = writeln!(s, "  matches U{} up to a global phase", j + 1);
                    }
                    None => s.push_str("  matches none of U1..U4\n"),
                }
            }
        }
    }
    for e in &r.scheme.rejections {
        let _ = writeln!(s, "no key for {} (residual {})", e.label, real(e.residual));
    }
    if let Some(sk) = &r.verification.shared_key {
        s.push_str("shared key conj(lambda)\n");
        s.push_str(&format_matrix(&sk.shared_key, "  "));
        for e in &sk.entries {
            let _ = writeln!(
                s,
                "  {}: overlap {} matches {} shared residual {} verified residual {}",
                e.label,
                real(e.phase_overlap),
                e.matches_up_to_phase,
                real(e.shared_residual),
                real(e.verified_residual)
            );
        }
        let _ = writeln!(s, "  shared key recovers every outcome: {}", sk.hypothesis_holds);
    }
    s
}

pub fn execute(command: Command, config: &Path, opts: &Options) -> Result<Outcome, CliError> {
    let mut cfg = ScenarioConfig::load(config)?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = opts.tolerance {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Usage(format!("--tolerance must be a positive real, got {tol}")));
        }
        cfg.tolerance = Some(tol);
    }
    if command == Command::Run && cfg.trials == 0 {
        return Err(CliError::Usage("run needs \"trials\" ≥ 1 in the scenario".into()));
    }

    let eval = evaluate(&cfg)?;
    // A failed verification still gets a report; the protocol only runs on a
    // verified scheme.
    let protocol = if command == Command::Run && eval.verification.passed {
        Some(eval.simulate(cfg.trials, cfg.seed)?)
    } else {
        None
    };
    let report = eval.into_report(command.name(), cfg, protocol);

    let json = report.to_json();
    if let Some(path) = &opts.out {
        std::fs::write(path, &json).map_err(|e| CliError::Output {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    }
    let stdout = match command {
        Command::Keys => keys_text(&report),
        _ if opts.out.is_none() => json,
        _ => String::new(),
    };
    let summary = summary_text(&report);
    Ok(Outcome { report, stdout, summary })
}
