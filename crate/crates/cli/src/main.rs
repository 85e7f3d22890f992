//! `va`: InterVA and InSilicoVA cause assignment, simulation and comparison.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use va_core::io::CellMode;
use va_core::simgen::Scenario;
use va_core::ErrorKind;

/// Exit status contract.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const FINDINGS: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const DIMENSION: u8 = 3;
    pub const RUNTIME: u8 = 4;
}

#[derive(Parser, Debug)]
#[command(
    name = "va",
    version,
    about = "Verbal-autopsy cause assignment with InterVA and InSilicoVA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct Common {
    /// Master seed for every random stream in the run
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (0 = one per core); results do not depend on it
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("va-out"))
    }
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Deterministic InterVA assignment
    Interva(IntervaArgs),
    /// Bayesian InSilicoVA assignment by Gibbs sampling
    Insilico(InsilicoArgs),
    /// Generate a synthetic dataset for one scenario
    Simulate(SimulateArgs),
    /// Run both methods over many simulated replicates
    Compare(CompareArgs),
    /// Exact posterior by enumeration, for small instances
    Oracle(OracleArgs),
    /// Check a conditional-probability matrix against logical constraints
    ValidateP(ValidateArgs),
    /// Re-run the command recorded in a manifest
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Interva(_) => "interva",
            Command::Insilico(_) => "insilico",
            Command::Simulate(_) => "simulate",
            Command::Compare(_) => "compare",
            Command::Oracle(_) => "oracle",
            Command::ValidateP(_) => "validate-p",
            Command::Replay(_) => "replay",
        }
    }

    /// Rewrites input paths as absolute paths so a manifest replays from anywhere.
    pub fn absolutize(&mut self) {
        let fix = |p: &mut PathBuf| {
            if let Ok(abs) = std::path::absolute(&*p) {
                *p = abs;
            }
        };
        let fix_opt = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                fix(p)
            }
        };
        match self {
            Command::Interva(a) => {
                fix(&mut a.data.symptoms);
                fix(&mut a.data.probs);
                fix_opt(&mut a.prior);
            }
            Command::Insilico(a) => {
                fix(&mut a.data.symptoms);
                fix(&mut a.data.probs);
                fix_opt(&mut a.gibbs.gibbs_config);
            }
            Command::Simulate(a) => fix_opt(&mut a.scenario.scenario_config),
            Command::Compare(a) => {
                fix_opt(&mut a.scenario.scenario_config);
                fix_opt(&mut a.gibbs.gibbs_config);
            }
            Command::Oracle(a) => {
                fix(&mut a.data.symptoms);
                fix(&mut a.data.probs);
            }
            Command::ValidateP(a) => {
                fix(&mut a.probs);
                fix_opt(&mut a.constraints);
            }
            Command::Replay(a) => fix(&mut a.manifest),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DataArgs {
    /// Symptom file: death_id column then one column per symptom (1, 0 or .)
    #[arg(long)]
    pub symptoms: PathBuf,

    /// Conditional-probability matrix: symptom column then one column per cause
    #[arg(long)]
    pub probs: PathBuf,

    /// Cell format of the matrix
    #[arg(long, value_enum, default_value_t = Mode::Numeric)]
    pub p_format: Mode,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Numeric,
    Letters,
}

impl From<Mode> for CellMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Numeric => CellMode::Numeric,
            Mode::Letters => CellMode::Letters,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct IntervaArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Prior CSMF file (cause,fraction); uniform when omitted
    #[arg(long)]
    pub prior: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct GibbsArgs {
    /// Sampler settings as JSON; flags below override it
    #[arg(long)]
    pub gibbs_config: Option<PathBuf>,

    #[arg(long)]
    pub chains: Option<usize>,

    #[arg(long)]
    pub iterations: Option<usize>,

    #[arg(long)]
    pub burn_in: Option<usize>,

    #[arg(long)]
    pub thin: Option<usize>,

    /// Symmetric Dirichlet prior weight
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Clamp matrix entries into [ε, 1 − ε] for the likelihood
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct InsilicoArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub gibbs: GibbsArgs,

    /// Credible interval level
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    /// Also write every retained draw
    #[arg(long)]
    pub raw_draws: bool,

    /// Compare against the exact posterior (small instances only)
    #[arg(long)]
    pub oracle_check: bool,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct ScenarioArgs {
    /// Scenario file: `key = value` lines or JSON
    #[arg(long = "config")]
    pub scenario_config: Option<PathBuf>,

    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<Scenario>,

    #[arg(long)]
    pub deaths: Option<usize>,

    #[arg(long)]
    pub causes: Option<usize>,

    #[arg(long = "n-symptoms")]
    pub n_symptoms: Option<usize>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: va_core::Error| e.to_string())
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorChoice {
    Uniform,
    Truth,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    #[command(flatten)]
    pub gibbs: GibbsArgs,

    #[arg(long, default_value_t = 100)]
    pub replicates: usize,

    /// Histogram bins over [0, 1]
    #[arg(long, default_value_t = 20)]
    pub bins: usize,

    /// Prior guess handed to InterVA
    #[arg(long, value_enum, default_value_t = PriorChoice::Uniform)]
    pub interva_prior: PriorChoice,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Symmetric Dirichlet prior weight
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub probs: PathBuf,

    /// Cell format of the matrix
    #[arg(long, value_enum, default_value_t = Mode::Letters)]
    pub mode: Mode,

    /// Constraint file with `SUM a b = d` and `LEQ a d` lines
    #[arg(long)]
    pub constraints: Option<PathBuf>,

    #[arg(long, default_value_t = va_core::validate::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run
    pub manifest: PathBuf,
}

/// Error carrying its own exit status.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

pub fn input_error(message: impl Into<String>) -> anyhow::Error {
    Exit {
        code: exit::INPUT,
        message: message.into(),
    }
    .into()
}

pub fn read_input(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Exit>() {
            return e.code;
        }
        if let Some(e) = cause.downcast_ref::<va_core::Error>() {
            return match e.kind() {
                ErrorKind::Input => exit::INPUT,
                ErrorKind::Dimension => exit::DIMENSION,
                ErrorKind::Numeric => exit::RUNTIME,
            };
        }
    }
    exit::RUNTIME
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.common.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.common.threads)
            .build_global()
        {
            eprintln!("va: cannot start thread pool: {e}");
            return ExitCode::from(exit::RUNTIME);
        }
    }
    let result = match cli.command {
        Command::Replay(args) => manifest::replay(&args.manifest, &cli.common),
        command => commands::run(command, cli.common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("va: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
