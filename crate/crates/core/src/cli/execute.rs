//! Command execution and the exit-code contract.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{divergence_s, frac_gradient, ibp_residual, lambda1};
use crate::error::{Error, Result};
use crate::graph::{validate_graph, WeightedGraph};
use crate::kernel::{
    frac_laplacian_apply, kernel_diagnostics, max_rel_deviation, ws_quadrature, ws_spectral,
    FracKernel, KernelDiagnostics, KernelMethod,
};
use crate::schrodinger::{
    check_hypotheses_at, ground_state_solve, mountain_pass_solve, verify_solution, Branch,
    HypothesisReport, VerificationReport,
};
use crate::spectral::{eigendecompose, logspace, mass_check, Spectrum};

use super::config::{RunConfig, SolveMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Kernel,
    Solve,
    Check,
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "validate" => Ok(Command::Validate),
            "kernel" => Ok(Command::Kernel),
            "solve" => Ok(Command::Solve),
            "check" => Ok(Command::Check),
            other => Err(Error::Schema(format!("unknown command `{other}`"))),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Validate => "validate",
            Command::Kernel => "kernel",
            Command::Solve => "solve",
            Command::Check => "check",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    ValidationFailure = 1,
    NonConvergence = 2,
    ConfigOrIo = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn worst(self, other: ExitStatus) -> ExitStatus {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

/// Exit status for an error that aborted a command.
pub fn exit_status_for(err: &Error) -> ExitStatus {
    use Error::*;
    match err {
        EmptyGraph
        | DuplicateVertex(_)
        | NonPositiveMeasure { .. }
        | NonPositiveWeight { .. }
        | UnknownEndpoint(_)
        | DuplicateEdge { .. }
        | SelfLoop(_)
        | UnknownVertex(_)
        | Disconnected => ExitStatus::ValidationFailure,
        NotConverged { .. } | QuadratureNotConverged { .. } | BracketFailure(_) | EigenFailure(_) => {
            ExitStatus::NonConvergence
        }
        _ => ExitStatus::ConfigOrIo,
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::from_json(&e))
}

fn prepare_outputs(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs a command and maps every error to its exit status; messages go to
/// standard error.
pub fn execute(command: Command, cfg: &RunConfig) -> ExitStatus {
    match run(command, cfg) {
        Ok(status) => status,
        Err(err) => {
            eprintln!("fracgraph {command}: {err}");
            exit_status_for(&err)
        }
    }
}

/// Runs a command, writing the effective configuration, a metadata file and
/// the command's artifacts to `cfg.outputs`.
pub fn run(command: Command, cfg: &RunConfig) -> Result<ExitStatus> {
    let out = cfg.outputs.clone();
    prepare_outputs(&out)?;
    write_file(&out, "effective_config.json", &cfg.echo())?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let metadata = serde_json::json!({
        "command": command.to_string(),
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": timestamp,
    });
    write_file(&out, "metadata.json", &to_json(&metadata)?)?;

    match command {
        Command::Validate => run_validate(cfg, &out),
        Command::Kernel => run_kernel(cfg, &out),
        Command::Solve => run_solve(cfg, &out),
        Command::Check => run_check(cfg, &out),
    }
}

fn run_validate(cfg: &RunConfig, out: &Path) -> Result<ExitStatus> {
    let g = cfg.build_graph()?;
    let report = validate_graph(&g);
    write_file(out, "validation.json", &to_json(&report)?)?;
    Ok(if report.connected && report.issues.is_empty() {
        ExitStatus::Ok
    } else {
        ExitStatus::ValidationFailure
    })
}

fn build_kernel(cfg: &RunConfig, sp: &Spectrum, s: f64, method: KernelMethod) -> Result<FracKernel> {
    match method {
        KernelMethod::Spectral => ws_spectral(sp, s),
        KernelMethod::Quadrature => ws_quadrature(sp, s, &cfg.kernel.quadrature),
    }
}

fn other(method: KernelMethod) -> KernelMethod {
    match method {
        KernelMethod::Spectral => KernelMethod::Quadrature,
        KernelMethod::Quadrature => KernelMethod::Spectral,
    }
}

fn diagnostics_pass(d: &KernelDiagnostics, compare_tol: f64) -> bool {
    d.max_symmetry_defect == 0.0
        && d.min_off_diagonal > 0.0
        && d.max_diagonal == 0.0
        && d.bounds_hold()
        && d.max_rel_deviation.is_none_or(|dev| dev <= compare_tol)
}

fn run_kernel(cfg: &RunConfig, out: &Path) -> Result<ExitStatus> {
    let g = cfg.build_graph()?;
    let sp = eigendecompose(&g)?;
    let method = cfg.kernel.method;
    let results: Vec<Result<(f64, FracKernel, KernelDiagnostics)>> = cfg
        .s_values()
        .par_iter()
        .map(|&s| {
            let k = build_kernel(cfg, &sp, s, method)?;
            let reference = if cfg.kernel.compare {
                Some(build_kernel(cfg, &sp, s, other(method))?)
            } else {
                None
            };
            let d = kernel_diagnostics(&k, &g, &sp, reference.as_ref());
            Ok((s, k, d))
        })
        .collect();
    let mut status = ExitStatus::Ok;
    for result in results {
        let (s, k, d) = result?;
        write_file(out, &format!("kernel_s{s}.csv"), &k.to_csv())?;
        write_file(out, &format!("bounds_s{s}.csv"), &d.bounds_csv())?;
        write_file(out, &format!("diagnostics_s{s}.json"), &to_json(&d)?)?;
        if !diagnostics_pass(&d, cfg.kernel.compare_tol) {
            eprintln!("kernel diagnostics failed at s = {s}");
            status = status.worst(ExitStatus::ValidationFailure);
        }
    }
    Ok(status)
}

#[derive(Serialize)]
struct SolveSummary {
    s: f64,
    lambda1: f64,
    hypotheses: HypothesisReport,
    runs: Vec<RunSummary>,
}

#[derive(Serialize)]
struct RunSummary {
    branch: Branch,
    converged: bool,
    energy: f64,
    residual_inf: f64,
    verification: VerificationReport,
}

fn run_solve(cfg: &RunConfig, out: &Path) -> Result<ExitStatus> {
    let g = cfg.build_graph()?;
    let h = cfg.build_potential(&g)?;
    let nl = cfg.build_nonlinearity()?;
    let sp = eigendecompose(&g)?;
    let branches: Vec<Branch> = match cfg.solve.branch {
        Some(b) => vec![b],
        None => Branch::BOTH.to_vec(),
    };
    let mut status = ExitStatus::Ok;
    let mut summaries = Vec::new();
    for s in cfg.s_values() {
        let k = build_kernel(cfg, &sp, s, cfg.kernel.method)?;
        let l1 = lambda1(&k, &h)?.value;
        let m = 2.0 * (1.0 / (g.min_measure() * l1).sqrt()).max(1.0);
        let vertices: Vec<usize> = (0..g.len()).collect();
        let hypotheses = check_hypotheses_at(&nl, l1, m, 400, &vertices);
        if !hypotheses.mountain_pass_ready() {
            log::warn!("hypothesis check failed at s = {s}: {:?}", hypotheses.findings);
        }
        let mut runs = Vec::new();
        for &branch in &branches {
            let sol = match cfg.solve.method {
                SolveMethod::GroundState => ground_state_solve(&k, &h, &nl, branch, &cfg.solver)?,
                SolveMethod::MountainPass => {
                    mountain_pass_solve(&k, &h, &nl, branch, &cfg.solver, cfg.solve.path_nodes)?
                }
            };
            let verification = verify_solution(&k, &h, &nl, &sol)?;
            write_file(out, &format!("solution_{branch}_s{s}.json"), &sol.to_json(g.ids(), s)?)?;
            if !sol.converged {
                eprintln!(
                    "{branch} branch at s = {s} did not converge (residual {:e})",
                    sol.residual_inf
                );
                status = status.worst(ExitStatus::NonConvergence);
            } else if !verification.passed() {
                eprintln!("{branch} branch at s = {s} failed verification");
                status = status.worst(ExitStatus::ValidationFailure);
            }
            runs.push(RunSummary {
                branch,
                converged: sol.converged,
                energy: sol.energy,
                residual_inf: sol.residual_inf,
                verification,
            });
        }
        summaries.push(SolveSummary {
            s,
            lambda1: l1,
            hypotheses,
            runs,
        });
    }
    write_file(out, "solve_summary.json", &to_json(&summaries)?)?;
    Ok(status)
}

/// One invariant suite outcome in `check.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub s: Option<f64>,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl SuiteResult {
    fn at_most(suite: &str, s: Option<f64>, value: f64, threshold: f64) -> Self {
        SuiteResult {
            suite: suite.to_string(),
            s,
            value,
            threshold,
            passed: value <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn kernel_suites(
    g: &WeightedGraph,
    sp: &Spectrum,
    s: f64,
    cfg: &RunConfig,
) -> Result<Vec<SuiteResult>> {
    let opts = &cfg.check;
    let k = ws_spectral(sp, s)?;
    let q = ws_quadrature(sp, s, &cfg.kernel.quadrature)?;
    let d = kernel_diagnostics(&k, g, sp, None);
    let structure_defect = d
        .max_symmetry_defect
        .max(d.max_diagonal)
        .max(if d.min_off_diagonal > 0.0 { 0.0 } else { 1.0 });
    let worst_slack = d
        .vertices
        .iter()
        .map(|v| -v.slack)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ s.to_bits());
    let (mut divergence, mut ibp) = (0.0_f64, 0.0_f64);
    for _ in 0..opts.samples {
        let u = random_vector(&mut rng, g.len());
        let phi = random_vector(&mut rng, g.len());
        let lap = frac_laplacian_apply(&k, &u)?;
        let div = divergence_s(&k, &frac_gradient(&k, &u)?)?;
        divergence = divergence.max(lap.iter().zip(&div).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max));
        ibp = ibp.max(ibp_residual(&k, &u, &phi)?);
    }
    Ok(vec![
        SuiteResult::at_most("kernel_structure", Some(s), structure_defect, 0.0),
        SuiteResult::at_most("row_sum_bound", Some(s), worst_slack, 0.0),
        SuiteResult::at_most("quadrature_agreement", Some(s), max_rel_deviation(&q, &k), cfg.kernel.compare_tol),
        SuiteResult::at_most("divergence_identity", Some(s), divergence, opts.identity_tol),
        SuiteResult::at_most("integration_by_parts", Some(s), ibp, opts.identity_tol),
    ])
}

fn run_check(cfg: &RunConfig, out: &Path) -> Result<ExitStatus> {
    let g = cfg.build_graph()?;
    let sp = eigendecompose(&g)?;
    let mut suites = vec![SuiteResult::at_most(
        "mass_conservation",
        None,
        mass_check(&sp, &logspace(1e-3, 1e3, 20))?,
        cfg.check.mass_tol,
    )];
    let per_s: Vec<Result<Vec<SuiteResult>>> = cfg
        .s_values()
        .par_iter()
        .map(|&s| kernel_suites(&g, &sp, s, cfg))
        .collect();
    for r in per_s {
        suites.extend(r?);
    }
    let report = CheckReport {
        passed: suites.iter().all(|s| s.passed),
        suites,
    };
    for failed in report.suites.iter().filter(|s| !s.passed) {
        eprintln!(
            "suite {} failed: {:e} > {:e}",
            failed.suite, failed.value, failed.threshold
        );
    }
    write_file(out, "check.json", &to_json(&report)?)?;
    Ok(if report.passed {
        ExitStatus::Ok
    } else {
        ExitStatus::ValidationFailure
    })
}

/// Sizes the global worker pool from `FRACGRAPH_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("FRACGRAPH_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// `cfg.outputs` replaced by `dir`.
pub fn with_outputs(mut cfg: RunConfig, dir: Option<PathBuf>) -> RunConfig {
    if let Some(dir) = dir {
        cfg.outputs = dir;
    }
    cfg
}
