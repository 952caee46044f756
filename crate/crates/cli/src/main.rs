//! `scatter1d` command-line driver.
//!
//! Exit codes: 0 when every gate passes, 2 on solver failure, 3 when a gate fails, 4 on bad input.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{EquationName, ExperimentConfig};
use scatter1d::ScatterError;

#[derive(Debug)]
pub enum Failure {
    Solver(ScatterError),
    Regression(String),
    Input(String),
    Io(String),
}

impl From<ScatterError> for Failure {
    fn from(e: ScatterError) -> Self {
        if e.is_input() {
            Failure::Input(e.to_string())
        } else {
            Failure::Solver(e)
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Solver(_) | Failure::Io(_) => 2,
            Failure::Regression(_) => 3,
            Failure::Input(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Solver(e) => write!(f, "solver failure: {e}"),
            Failure::Regression(g) => write!(f, "failed gates: {g}"),
            Failure::Input(m) => write!(f, "bad input: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "scatter1d", version, about = "Scattering, wave operators and dispersive decay in one dimension")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML file with any of the settings below; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// zero | poschl-teller | well | path to an `x,V` CSV.
    #[arg(long, global = true)]
    potential: Option<String>,
    /// Depth of the square well.
    #[arg(long, global = true)]
    depth: Option<f64>,
    /// Half width of the square well.
    #[arg(long, global = true)]
    half_width: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid_max: Option<f64>,
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[arg(long, global = true)]
    lambda_max: Option<f64>,
    #[arg(long, global = true)]
    lambda_points: Option<usize>,
    /// Low/high energy split; defaults to the L¹ norm of V.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Defect tolerance of the Jost solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for λ sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Jost solutions, Wronskian and resonance test.
    Jost,
    /// Marchenko kernels and their growth exponents.
    Kernels {
        #[arg(long)]
        no_refine: bool,
    },
    /// Wave operator checks and the endpoint probe.
    Waveop {
        #[arg(long)]
        probes: Option<usize>,
    },
    /// Dispersive decay fit.
    Decay(DecayArgs),
    /// Variable-coefficient reduction.
    Liouville {
        #[arg(long)]
        preset: Option<String>,
        /// Three-column CSV `x, a, b`.
        #[arg(long)]
        coefficients: Option<PathBuf>,
        /// Also fit the decay of the variable-coefficient flow.
        #[arg(long)]
        decay: bool,
        #[command(flatten)]
        fit: DecayArgs,
    },
}

#[derive(Args)]
struct DecayArgs {
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_enum)]
    equation: Option<EquationName>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    times: Option<usize>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn resolve(cli: Cli) -> Result<(ExperimentConfig, Command), Failure> {
    let c = cli.common;
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    set(&mut cfg.potential, c.potential);
    set(&mut cfg.depth, c.depth);
    set(&mut cfg.half_width, c.half_width);
    set(&mut cfg.grid_min, c.grid_min);
    set(&mut cfg.grid_max, c.grid_max);
    set(&mut cfg.grid_points, c.grid_points);
    set(&mut cfg.lambda_max, c.lambda_max);
    set(&mut cfg.lambda_points, c.lambda_points);
    set(&mut cfg.tol, c.tol);
    set(&mut cfg.seed, c.seed);
    set(&mut cfg.out, c.out);
    if c.cutoff.is_some() {
        cfg.cutoff = c.cutoff;
    }
    if c.jobs.is_some() {
        cfg.jobs = c.jobs;
    }
    let fit = |d: &DecayArgs, cfg: &mut ExperimentConfig| {
        set(&mut cfg.decay.q, d.q);
        set(&mut cfg.decay.equation, d.equation);
        set(&mut cfg.decay.t_min, d.t_min);
        set(&mut cfg.decay.t_max, d.t_max);
        set(&mut cfg.decay.times, d.times);
    };
    match &cli.command {
        Command::Kernels { no_refine } if *no_refine => cfg.kernels.refine = false,
        Command::Waveop { probes } => set(&mut cfg.waveop.probes, *probes),
        Command::Decay(d) => fit(d, &mut cfg),
        Command::Liouville { preset, coefficients, decay, fit: d } => {
            if preset.is_some() {
                cfg.liouville.preset = preset.clone();
            }
            if coefficients.is_some() {
                cfg.liouville.coefficients = coefficients.clone();
            }
            cfg.liouville.decay |= *decay;
            fit(d, &mut cfg);
        }
        _ => {}
    }
    Ok((cfg, cli.command))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (cfg, command) = resolve(cli)?;
    if let Some(n) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Failure::Input(format!("--jobs: {e}")))?;
    }
    match command {
        Command::Jost => commands::jost(&cfg),
        Command::Kernels { .. } => commands::kernels(&cfg),
        Command::Waveop { .. } => commands::waveop(&cfg),
        Command::Decay(_) => commands::decay(&cfg),
        Command::Liouville { .. } => commands::liouville(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("scatter1d: {f}");
            ExitCode::from(f.code())
        }
    }
}
