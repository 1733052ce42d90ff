//! Manifest and CSV plumbing shared by the subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use lzcqed::fock::{redfield_propagate, RedfieldOptions, REDFIELD_MAX_N};
use lzcqed::params::{parse_config, to_config_string};
use lzcqed::{validate, Params, Sweep};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Read, parse and validate a configuration file; warnings go to standard error.
pub fn load_config(path: &Path) -> Result<Params, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let p: Params = parse_config(&text).map_err(|e| Failure::config(e.to_string()))?;
    let checked = validate(&p).map_err(|e| Failure::config(e.to_string()))?;
    for w in checked.warnings.messages() {
        eprintln!("warning: {w}");
    }
    Ok(p)
}

pub fn prepare_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::solver(format!("{}: {e}", dir.display())))
}

/// Stable identifier of a configuration under this code version.
pub fn run_id(config: &str) -> String {
    let digest = Sha256::new().chain_update(VERSION).chain_update(config).finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Config snapshot on one line, for CSV headers.
pub fn config_line(p: &Params) -> String {
    to_config_string(p).lines().collect::<Vec<_>>().join("; ")
}

/// Artifact record: what ran, with which code, how long, and how well it converged.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub run_id: String,
    pub config: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_flip_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<Analytic>,
    pub wall_time_s: f64,
    pub runs: Vec<RunDiagnostics>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Failure::solver(e.to_string()))?;
        fs::write(path, text + "\n").map_err(|e| Failure::solver(format!("{}: {e}", path.display())))
    }
}

/// Closed-form reference values at one parameter point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Analytic {
    pub lz_generalized: f64,
    #[serde(rename = "pud_finite_T")]
    pub pud_finite_t: f64,
    #[serde(rename = "pud_zero_T_dissipative")]
    pub pud_zero_t_dissipative: f64,
}

impl Analytic {
    /// NaN marks a value outside the formula's domain.
    pub fn at(p: &Params) -> Self {
        use lzcqed::analytic::{lz_generalized, pud_finite_t, pud_zero_t_dissipative};
        Analytic {
            lz_generalized: lz_generalized(p.g, p.v).unwrap_or(f64::NAN),
            pud_finite_t: pud_finite_t(p.g, p.v, p.temperature).unwrap_or(f64::NAN),
            pud_zero_t_dissipative: pud_zero_t_dissipative(p.g, p.v, p.gamma).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleDiagnostics {
    pub p_flip_final: f64,
    pub sup_p_up_deviation: f64,
    pub trace_residual: f64,
    pub hermiticity_residual: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunDiagnostics {
    pub label: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_flip_final: Option<f64>,
    pub trace_residual: Option<f64>,
    pub hermiticity_residual: Option<f64>,
    pub spill: Option<f64>,
    pub spill_within_tolerance: Option<bool>,
    pub min_qubit_eigenvalue: Option<f64>,
    pub steps_accepted: Option<usize>,
    pub steps_rejected: Option<usize>,
    pub rhs_evals: Option<usize>,
    pub dxp_converged: Option<bool>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDiagnostics>,
}

impl RunDiagnostics {
    pub fn from_sweep(label: String, r: &Sweep) -> Self {
        RunDiagnostics {
            label,
            ok: true,
            error: None,
            p_flip_final: Some(r.p_flip_final),
            trace_residual: Some(r.trace_residual),
            hermiticity_residual: Some(r.hermiticity_residual),
            spill: Some(r.spill),
            spill_within_tolerance: Some(r.spill_within_tolerance()),
            min_qubit_eigenvalue: Some(r.min_qubit_eigenvalue),
            steps_accepted: Some(r.stats.accepted),
            steps_rejected: Some(r.stats.rejected),
            rhs_evals: Some(r.stats.rhs_evals),
            dxp_converged: Some(r.dxp_converged),
            warnings: r.warnings.messages().iter().map(|s| s.to_string()).collect(),
            oracle: None,
        }
    }

    pub fn failed(label: String, error: String) -> Self {
        RunDiagnostics {
            label,
            error: Some(error),
            ..Default::default()
        }
    }
}

/// Fock-basis run on the same sample grid as `phase`, or `None` when `n_trunc` is too large.
pub fn oracle_run(p: &Params, phase: &Sweep) -> Result<Option<(OracleDiagnostics, Vec<f64>, Vec<f64>)>, Failure> {
    if p.n_trunc > REDFIELD_MAX_N {
        return Ok(None);
    }
    let opts = RedfieldOptions {
        samples: phase.times.len(),
        ..RedfieldOptions::default()
    };
    let r = redfield_propagate(p, &opts).map_err(|e| Failure::solver(format!("oracle: {e}")))?;
    let sup = phase.p_up.iter().zip(&r.p_up).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let diag = OracleDiagnostics {
        p_flip_final: 1.0 - r.p_up.last().copied().unwrap_or(f64::NAN),
        sup_p_up_deviation: sup,
        trace_residual: r.trace_residual,
        hermiticity_residual: r.hermiticity_residual,
    };
    Ok(Some((diag, r.p_up, r.p_down)))
}

/// CSV writer whose file starts with `#`-prefixed metadata lines.
pub fn csv_with_header(path: &Path, header: &[String]) -> Result<csv::Writer<BufWriter<File>>, Failure> {
    let io = |e: std::io::Error| Failure::solver(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for line in header {
        writeln!(w, "# {line}").map_err(io)?;
    }
    Ok(csv::Writer::from_writer(w))
}

pub fn csv_error(e: csv::Error) -> Failure {
    Failure::solver(format!("writing CSV: {e}"))
}
