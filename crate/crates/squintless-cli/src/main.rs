//! Command-line front end: scenario synthesis, solving, certificate
//! verification, oracle checks and report emission.
//!
//! Exit codes: 0 success, 2 input error, 3 non-convergence, 4 certificate
//! failure.

use clap::{Parser, Subcommand};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use squintless::certificate::{certificate_for_scenario, certify_scenario, dual_matrices};
use squintless::model::{synthesize, MultiFreqTensor, Scenario, Source};
use squintless::oracle::duality_gap;
use squintless::recovery::{dual_polynomial_norm, recover_from_solve, AnglePairing};
use squintless::solver::{admm_solve, SolveResult, SolverConfig};
use squintless::{C64, CMat};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "squintless", version, about = "Gridless 2D angle estimation for multi-frequency array signals")]
struct Cli {
    /// Seed for randomized scenario amplitudes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on worker threads (0 uses all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the observation tensor for a scenario config.
    Synth {
        /// Scenario JSON.
        #[arg(long)]
        config: PathBuf,
        /// Output tensor file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a tensor file and recover angle pairs.
    Solve {
        /// Tensor file produced by `synth`.
        #[arg(long)]
        tensor: PathBuf,
        /// Optional solver config JSON ({"rho","tol","max_iter","adaptive_rho","pin_offdiag"}).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Result JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// When set, also write a ‖χ‖₂ heatmap CSV of this resolution
        /// (rows: ω^r index, cols: ω^t index) next to the result.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Construct and verify the dual certificate for a scenario.
    Certify {
        /// Scenario JSON.
        #[arg(long)]
        config: PathBuf,
        /// Verification grid resolution per axis.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Report JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Duality bracket for a scenario against its certificate dual.
    Oracle {
        /// Scenario JSON.
        #[arg(long)]
        config: PathBuf,
        /// Dual-norm grid resolution.
        #[arg(long, default_value_t = 128)]
        grid: usize,
        /// Report JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the toolkit version.
    Version,
}

/// Scenario config: the published schema plus an optional `coeff_moduli`
/// alternative per source (phases drawn from --seed).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioConfig {
    n_rx: usize,
    n_tx: usize,
    n_freq: usize,
    sources: Vec<SourceConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceConfig {
    omega_r: f64,
    omega_t: f64,
    #[serde(default)]
    coeffs: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    coeff_moduli: Option<Vec<f64>>,
}

impl ScenarioConfig {
    fn into_scenario(self, seed: u64) -> Result<Scenario, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sources = Vec::with_capacity(self.sources.len());
        for (l, src) in self.sources.into_iter().enumerate() {
            let coeffs: Vec<C64> = match (src.coeffs, src.coeff_moduli) {
                (Some(c), None) => c.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
                (None, Some(m)) => m
                    .into_iter()
                    .map(|modulus| C64::from_polar(modulus, TAU * rng.random::<f64>()))
                    .collect(),
                (Some(_), Some(_)) => {
                    return Err(format!(
                        "sources[{l}]: give either `coeffs` or `coeff_moduli`, not both"
                    ))
                }
                (None, None) => {
                    return Err(format!("sources[{l}]: missing field `coeffs` (or `coeff_moduli`)"))
                }
            };
            sources.push(Source::new(src.omega_r, src.omega_t, coeffs));
        }
        Scenario::new(self.n_rx, self.n_tx, self.n_freq, sources).map_err(|e| e.to_string())
    }
}

/// Tensor container: header plus row-major complex slices.
#[derive(Debug, Serialize, Deserialize)]
struct TensorFile {
    header: TensorHeader,
    /// slices[p][i][j] = [re, im].
    slices: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorHeader {
    n_rx: usize,
    n_tx: usize,
    n_freq: usize,
    format_version: u32,
}

impl TensorFile {
    fn from_tensor(y: &MultiFreqTensor) -> Self {
        Self {
            header: TensorHeader {
                n_rx: y.n_rx(),
                n_tx: y.n_tx(),
                n_freq: y.n_freq(),
                format_version: 1,
            },
            slices: y
                .slices
                .iter()
                .map(|s| {
                    (0..s.nrows())
                        .map(|i| (0..s.ncols()).map(|j| [s[(i, j)].re, s[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    fn into_tensor(self) -> Result<MultiFreqTensor, String> {
        if self.header.format_version != 1 {
            return Err(format!("unsupported format_version {}", self.header.format_version));
        }
        let h = &self.header;
        if self.slices.len() != h.n_freq {
            return Err(format!(
                "header says n_freq = {} but payload has {} slices",
                h.n_freq,
                self.slices.len()
            ));
        }
        let mut slices = Vec::with_capacity(h.n_freq);
        for (p, s) in self.slices.iter().enumerate() {
            if s.len() != h.n_rx || s.iter().any(|row| row.len() != h.n_tx) {
                return Err(format!(
                    "slice {p} does not match header dimensions {}x{}",
                    h.n_rx, h.n_tx
                ));
            }
            slices.push(CMat::from_fn(h.n_rx, h.n_tx, |i, j| {
                C64::new(s[i][j][0], s[i][j][1])
            }));
        }
        MultiFreqTensor::new(slices).map_err(|e| e.to_string())
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    converged: bool,
    iterations: usize,
    objective: f64,
    primal_residual: f64,
    dual_residual: f64,
    /// Absent when the solve did not converge and the iterate defied recovery.
    pairs: Option<&'a AnglePairing>,
    t_r_first_row: Vec<[f64; 2]>,
    t_t_first_row: Vec<[f64; 2]>,
    residual_history: &'a [(f64, f64)],
}

enum CliError {
    /// Exit 2: unreadable, unparseable or inconsistent inputs.
    Input(String),
    /// Exit 3: the solver hit max_iter.
    NonConvergence(String),
    /// Exit 4: certificate verification failed.
    Certificate(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Certificate(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::NonConvergence(m) | CliError::Certificate(m) => m,
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Input(format!("serialization: {e}")))?;
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_scenario(path: &Path, seed: u64) -> Result<Scenario, CliError> {
    let config: ScenarioConfig = read_json(path)?;
    config.into_scenario(seed).map_err(CliError::Input)
}

fn cmd_synth(config: &Path, out: &Path, seed: u64) -> Result<(), CliError> {
    let scenario = load_scenario(config, seed)?;
    let tensor = synthesize(&scenario);
    let file = TensorFile::from_tensor(&tensor);
    // compact, stable formatting keeps repeated runs byte-identical
    let text = serde_json::to_string(&file)
        .map_err(|e| CliError::Input(format!("serialization: {e}")))?;
    std::fs::write(out, text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
    log::info!("wrote {} ({}x{}x{})", out.display(), tensor.n_rx(), tensor.n_tx(), tensor.n_freq());
    Ok(())
}

fn heatmap_csv(q: &[CMat], resolution: usize) -> String {
    let mut out = String::new();
    for ir in 0..resolution {
        let wr = ir as f64 / resolution as f64;
        let row: Vec<String> = (0..resolution)
            .map(|it| {
                let wt = it as f64 / resolution as f64;
                format!("{:.12e}", dual_polynomial_norm(q, wr, wt))
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn cmd_solve(
    tensor_path: &Path,
    config: Option<&Path>,
    out: Option<&Path>,
    grid: Option<usize>,
    rho: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
) -> Result<(), CliError> {
    let file: TensorFile = read_json(tensor_path)?;
    let tensor = file.into_tensor().map_err(CliError::Input)?;
    let mut cfg: SolverConfig = match config {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    if let Some(v) = rho {
        cfg.rho = v;
    }
    if let Some(v) = tol {
        cfg.tol = v;
    }
    if let Some(v) = max_iter {
        cfg.max_iter = v;
    }
    let result: SolveResult = admm_solve(&tensor, &cfg).map_err(|e| CliError::Input(e.to_string()))?;
    let pairing = match recover_from_solve(&result, &tensor, 1e-7) {
        Ok(p) => Some(p),
        Err(e) if !result.converged => {
            log::warn!("recovery skipped on unconverged iterate: {e}");
            None
        }
        Err(e) => return Err(CliError::Input(format!("recovery: {e}"))),
    };
    let to_pairs = |v: &[C64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    let report = SolveReport {
        converged: result.converged,
        iterations: result.iterations,
        objective: result.objective,
        primal_residual: result.primal_residual,
        dual_residual: result.dual_residual,
        pairs: pairing.as_ref(),
        t_r_first_row: to_pairs(result.t_r.first_row()),
        t_t_first_row: to_pairs(result.t_t.first_row()),
        residual_history: &result.residual_history,
    };
    write_json(out, &report)?;
    if let Some(res) = grid {
        let csv = heatmap_csv(&result.dual_q, res.max(32));
        let path = match out {
            Some(p) => p.with_extension("heatmap.csv"),
            None => PathBuf::from("heatmap.csv"),
        };
        std::fs::write(&path, csv)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    if !result.converged {
        return Err(CliError::NonConvergence(format!(
            "max_iter {} reached with residuals ({:.3e}, {:.3e})",
            result.iterations, result.primal_residual, result.dual_residual
        )));
    }
    Ok(())
}

fn cmd_certify(config: &Path, grid: usize, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let scenario = load_scenario(config, seed)?;
    let report = match certify_scenario(&scenario, grid) {
        Ok(r) => r,
        Err(e) => return Err(CliError::Certificate(format!("certificate construction: {e}"))),
    };
    write_json(out, &report)?;
    if report.passes() {
        Ok(())
    } else {
        let mut reasons = Vec::new();
        if !report.hypotheses.separation_ok {
            reasons.push(format!(
                "separation hypothesis violated: min_p Δ^p = {:.3e} ≤ {:.3e}",
                report
                    .hypotheses
                    .separations
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min),
                report.hypotheses.separation_threshold
            ));
        }
        if !report.hypotheses.g_ok {
            reasons.push(format!(
                "array-size hypothesis violated: G = {} < 512",
                report.hypotheses.g_value
            ));
        }
        if !report.hypotheses.sign_ok {
            reasons.push(format!(
                "sign-magnitude hypothesis violated: max |sign| = {:.4} > {:.4}",
                report.hypotheses.sign_max, report.hypotheses.sign_bound
            ));
        }
        if !report.support_ok {
            reasons.push(format!(
                "support interpolation residual {:.3e} > 1e-8",
                report.interpolation_residual
            ));
        }
        if report.far_grid_max >= 1.0 {
            reasons.push(format!("far-grid max {:.9} ≥ 1", report.far_grid_max));
        }
        if !report.near_hessian_ok {
            reasons.push("near-region Hessian not negative definite".into());
        }
        Err(CliError::Certificate(reasons.join("; ")))
    }
}

fn cmd_oracle(config: &Path, grid: usize, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let scenario = load_scenario(config, seed)?;
    let tensor = synthesize(&scenario);
    let cert = certificate_for_scenario(&scenario)
        .map_err(|e| CliError::Input(format!("certificate construction: {e}")))?;
    let q = dual_matrices(&cert);
    let gap = duality_gap(&tensor, &scenario.sources, &q, grid)
        .map_err(|e| CliError::Input(e.to_string()))?;
    write_json(out, &gap)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads > 0 {
        // ignore failure when a pool was already installed
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match &cli.command {
        Command::Synth { config, out } => cmd_synth(config, out, cli.seed),
        Command::Solve {
            tensor,
            config,
            out,
            grid,
            rho,
            tol,
            max_iter,
        } => cmd_solve(
            tensor,
            config.as_deref(),
            out.as_deref(),
            *grid,
            *rho,
            *tol,
            *max_iter,
        ),
        Command::Certify { config, grid, out } => cmd_certify(config, *grid, out.as_deref(), cli.seed),
        Command::Oracle { config, grid, out } => cmd_oracle(config, *grid, out.as_deref(), cli.seed),
        Command::Version => {
            println!("squintless {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SQUINTLESS_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
