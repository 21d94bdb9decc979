use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use hyperdiff::acceptance::{self, CriterionReport, DEFAULT_SEED};
use hyperdiff::diffusion::{self, IntegratorConfig, Method};
use hyperdiff::hypergraph::{brute_force_phi_h, load_hypergraph, DEFAULT_ENUM_CAP};
use hyperdiff::operator::{derivative_tower, OperatorConfig};
use hyperdiff::quadratic::quadratic_form;
use hyperdiff::spectral::{estimate_gamma2, SpectralConfig};
use hyperdiff::sssl::{self, LabelProblem, SolveMode, SolveParams};
use hyperdiff::{random, DirectedHypergraph, Error};

#[derive(Parser, Debug)]
#[command(name = "hyperdiff", version, about = "Diffusion on directed hypergraphs with stationary vertices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Directed expansion φ_H: exact by enumeration, or a sweep-cut upper bound.
    Expansion(ExpansionArgs),
    /// Integrate the diffusion and write a `t,Q,D,grad_norm` CSV trajectory.
    Diffuse(DiffuseArgs),
    /// Estimate γ₂ and report the sweep cut.
    Spectral(SpectralArgs),
    /// Semi-supervised label prediction.
    Sssl(SsslArgs),
    /// Run the invariant suites and print a pass/fail table.
    Verify(VerifyArgs),
    /// Dump the derivative tower up to a given order.
    Derivatives(DerivativesArgs),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for restarts and trials (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct ExpansionArgs {
    #[arg(long)]
    input: PathBuf,
    /// Enumerate every subset (n ≤ 20).
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Euler,
    Rk4,
}

#[derive(Args, Debug)]
struct DiffuseArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSON array with the start vector; seeded standard normal otherwise.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Step size (default 1e-3 ω_min / w_max).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    max_time: f64,
    #[arg(long, default_value_t = 1e-9)]
    grad_tol: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Euler)]
    method: MethodArg,
    /// Halve the step whenever Q (or D when there are no stationary vertices) would rise.
    #[arg(long)]
    adaptive: bool,
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Also write `{"t", "f"}` JSON lines here.
    #[arg(long)]
    densities: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SpectralArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long, default_value_t = 200.0)]
    max_time: f64,
    /// Eigen-residual at which a restart stops.
    #[arg(long, default_value_t = 1e-8)]
    grad_tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Diffusion,
    Subgradient,
}

#[derive(Args, Debug)]
struct SsslArgs {
    #[arg(long)]
    input: PathBuf,
    /// `{"labels": {vertex: value}, "init": {vertex: value}}`.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Diffusion)]
    mode: ModeArg,
    /// Euler step in diffusion mode.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Initial step in subgradient mode; derived from the edge weights when absent.
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long, default_value_t = 500.0)]
    max_time: f64,
    #[arg(long, default_value_t = 1e-9)]
    grad_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Check one hypergraph instead of the generated corpora.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Random vectors per check with --input.
    #[arg(long, default_value_t = 20)]
    vectors: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct DerivativesArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSON array with f; seeded random otherwise.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    order: usize,
    #[command(flatten)]
    common: Common,
}

enum Failure {
    Input(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(3),
    }
}

fn run(command: Command) -> Outcome {
    let threads = match &command {
        Command::Expansion(a) => a.common.threads,
        Command::Diffuse(a) => a.common.threads,
        Command::Spectral(a) => a.common.threads,
        Command::Sssl(a) => a.common.threads,
        Command::Verify(a) => a.threads,
        Command::Derivatives(a) => a.common.threads,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match command {
        Command::Expansion(a) => expansion(a),
        Command::Diffuse(a) => diffuse(a),
        Command::Spectral(a) => spectral(a),
        Command::Sssl(a) => sssl_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Derivatives(a) => derivatives(a),
    }
}

fn emit(output: Option<&Path>, text: &str) -> io::Result<()> {
    match output {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn emit_json(output: Option<&Path>, value: &Value) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::Parse)?;
    text.push('\n');
    Ok(emit(output, &text)?)
}

fn read_vector(path: &Path, h: &DirectedHypergraph) -> Result<Vec<f64>, Error> {
    let f: Vec<f64> = serde_json::from_str(&fs::read_to_string(path)?)?;
    h.check_dimension(&f)?;
    Ok(f)
}

fn start_vector(init: Option<&Path>, h: &DirectedHypergraph, seed: u64) -> Result<Vec<f64>, Error> {
    match init {
        Some(path) => read_vector(path, h),
        None => Ok(random::normal_vector(&mut random::rng(seed), h.n())),
    }
}

fn expansion(a: ExpansionArgs) -> Outcome {
    let h = load_hypergraph(&a.input)?;
    let (report, exact) = if a.exact {
        (brute_force_phi_h(&h, DEFAULT_ENUM_CAP)?, true)
    } else {
        let cfg = SpectralConfig { restarts: a.restarts, seed: a.common.seed, ..SpectralConfig::default() };
        (estimate_gamma2(&h, &cfg)?.sweep, false)
    };
    let value = json!({
        "phi_H": report.phi,
        "exact": exact,
        "S": report.set,
        "phi_plus": report.phi_plus,
        "phi_minus": report.phi_minus,
    });
    emit_json(a.common.output.as_deref(), &value)
}

fn diffuse(a: DiffuseArgs) -> Outcome {
    let h = load_hypergraph(&a.input)?;
    let f0 = start_vector(a.init.as_deref(), &h, a.common.seed)?;
    let mut cfg = IntegratorConfig::default_for(&h);
    cfg.method = match a.method {
        MethodArg::Euler => Method::Euler,
        MethodArg::Rk4 => Method::Rk4,
    };
    cfg.step = a.step.unwrap_or(cfg.step);
    cfg.adaptive = a.adaptive;
    cfg.max_time = a.max_time;
    cfg.stop_grad_tol = a.grad_tol;
    cfg.record_every = a.record_every;
    let records = diffusion::run(&h, &f0, &cfg)?;
    let mut csv = Vec::new();
    diffusion::write_csv(&records, &mut csv)?;
    emit(a.common.output.as_deref(), &String::from_utf8_lossy(&csv))?;
    if let Some(path) = a.densities {
        let file = io::BufWriter::new(fs::File::create(path)?);
        diffusion::write_densities(&records, file)?;
    }
    Ok(())
}

fn spectral(a: SpectralArgs) -> Outcome {
    let h = load_hypergraph(&a.input)?;
    let cfg = SpectralConfig {
        restarts: a.restarts,
        step: a.step,
        max_time: a.max_time,
        residual_tol: a.grad_tol,
        seed: a.common.seed,
        operator: OperatorConfig::default(),
    };
    let res = estimate_gamma2(&h, &cfg)?;
    let value = json!({
        "gamma2": res.gamma2,
        "residual": res.residual,
        "phi_sweep": res.sweep.phi,
        "S": res.sweep.set,
        "f": res.minimizer,
        "restart_values": res.restart_values,
    });
    emit_json(a.common.output.as_deref(), &value)
}

fn sssl_cmd(a: SsslArgs) -> Outcome {
    let h = load_hypergraph(&a.input)?;
    let problem = LabelProblem::from_json(h, &fs::read_to_string(&a.labels)?)?;
    let params = SolveParams {
        mode: match a.mode {
            ModeArg::Diffusion => SolveMode::Diffusion,
            ModeArg::Subgradient => SolveMode::Subgradient,
        },
        step: a.step,
        eta0: a.eta0,
        max_time: a.max_time,
        max_iters: a.max_iters,
        grad_tol: a.grad_tol,
        operator: OperatorConfig::default(),
    };
    let report = sssl::solve(&problem, &params)?;
    let value = json!({
        "f": report.f_star,
        "Q": report.q_star,
        "iterations": report.iterations,
        "grad_norm": report.grad_norm_final,
    });
    emit_json(a.common.output.as_deref(), &value)
}

fn verify(a: VerifyArgs) -> Outcome {
    let reports: Vec<CriterionReport> = match &a.input {
        Some(path) => acceptance::check_instance(&load_hypergraph(path)?, a.seed, a.vectors),
        None => acceptance::CRITERIA
            .par_iter()
            .map(|&(id, _)| acceptance::run_criterion(id, a.seed))
            .collect(),
    };
    let passed = reports.iter().filter(|r| r.passed).count();
    let mut text = String::new();
    for r in &reports {
        text.push_str(&format!("{r}\n"));
    }
    text.push_str(&format!("{passed}/{} passed\n", reports.len()));
    let summary = json!({ "seed": a.seed, "passed": passed, "total": reports.len(), "criteria": reports });
    text.push_str(&serde_json::to_string(&summary).map_err(Error::Parse)?);
    text.push('\n');
    emit(a.output.as_deref(), &text)?;
    if passed == reports.len() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn derivatives(a: DerivativesArgs) -> Outcome {
    let h = load_hypergraph(&a.input)?;
    let f = start_vector(a.init.as_deref(), &h, a.common.seed)?;
    let tower = derivative_tower(&h, &f, a.order, &OperatorConfig::default())?;
    let levels: Vec<Value> = tower
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            json!({
                "order": i,
                "f": l.derivative,
                "partition": l.partition.classes(),
                "status": l.status,
                "discrepancy": l.discrepancy,
            })
        })
        .collect();
    let value = json!({ "Q": quadratic_form(&h, &f), "levels": levels });
    emit_json(a.common.output.as_deref(), &value)
}
