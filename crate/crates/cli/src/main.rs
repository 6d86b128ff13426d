//! `entlearn`: dataset generation, training, prediction and evaluation.
//!
//! Exit codes: 0 on success, 1 on usage or validation failure, 2 on I/O
//! failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entlearn::datagen::SweepModel;
use entlearn::neural::{Activation, ArchKind};

#[derive(Debug, Parser)]
#[command(name = "entlearn", version, about = "Learn entanglement quantities from local measurements")]
struct Cli {
    /// Pipeline config file (JSON); flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ground states of random two-local Hamiltonians.
    GenStatic(GenStaticArgs),
    /// Ising quench trajectories.
    GenDynamic(GenDynamicArgs),
    /// Ground-state sweep of the XXZ or XX chain.
    GenSweep(GenSweepArgs),
    /// Train a network on a dataset.
    Train(TrainArgs),
    /// Run a trained network over a dataset.
    Predict(PredictArgs),
    /// Score predictions and emit figure CSVs.
    Evaluate(EvaluateArgs),
    /// Recompute every sample of a dataset from its meta.
    Oracle(OracleArgs),
    /// Compare backpropagation with finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub(crate) struct GenStaticArgs {
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    #[arg(long)]
    pub(crate) n_qubits: Option<usize>,
    #[arg(long)]
    pub(crate) samples: Option<usize>,
    #[arg(long)]
    pub(crate) seed: Option<u64>,
    /// Comma-separated metric labels, e.g. `S2[12],P3[1|2]`.
    #[arg(long)]
    pub(crate) metrics: Option<String>,
}

#[derive(Debug, Args)]
pub(crate) struct GenDynamicArgs {
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    #[arg(long)]
    pub(crate) n_qubits: Option<usize>,
    #[arg(long)]
    pub(crate) samples: Option<usize>,
    #[arg(long)]
    pub(crate) seed: Option<u64>,
    #[arg(long)]
    pub(crate) metrics: Option<String>,
    /// Number of measured steps S.
    #[arg(long)]
    pub(crate) steps: Option<usize>,
    #[arg(long)]
    pub(crate) t_tra: Option<f64>,
    #[arg(long)]
    pub(crate) t_tot: Option<f64>,
    #[arg(long)]
    pub(crate) k_out: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub(crate) theta_y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub(crate) theta_z: Option<f64>,
    /// Use `J = -0.5` and this many evenly spaced `g` in [-1, 0].
    #[arg(long)]
    pub(crate) test_grid: Option<usize>,
}

#[derive(Debug, Args)]
pub(crate) struct GenSweepArgs {
    #[arg(long, value_enum)]
    pub(crate) model: Option<ModelArg>,
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    /// Summary CSV; defaults to the dataset path with a `.csv` extension.
    #[arg(long)]
    pub(crate) csv: Option<PathBuf>,
    #[arg(long)]
    pub(crate) n_qubits: Option<usize>,
    #[arg(long = "coupling", allow_hyphen_values = true)]
    pub(crate) coupling: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub(crate) start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub(crate) stop: Option<f64>,
    #[arg(long)]
    pub(crate) step: Option<f64>,
    #[arg(long)]
    pub(crate) metrics: Option<String>,
}

#[derive(Debug, Args)]
pub(crate) struct TrainArgs {
    #[arg(long)]
    pub(crate) data: Option<PathBuf>,
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
    /// Training curve CSV; defaults to the checkpoint path with `.log.csv`.
    #[arg(long)]
    pub(crate) log: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub(crate) arch: Option<ArchArg>,
    /// Hidden dense widths, e.g. `512,512,256`.
    #[arg(long, value_delimiter = ',')]
    pub(crate) hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub(crate) lstm_hidden: Option<usize>,
    #[arg(long, value_enum)]
    pub(crate) activation: Option<ActivationArg>,
    #[arg(long)]
    pub(crate) lr: Option<f64>,
    #[arg(long)]
    pub(crate) batch_size: Option<usize>,
    #[arg(long)]
    pub(crate) epochs: Option<usize>,
    #[arg(long)]
    pub(crate) val_fraction: Option<f64>,
    #[arg(long)]
    pub(crate) patience: Option<usize>,
    #[arg(long)]
    pub(crate) seed: Option<u64>,
    /// Print one line per epoch to stderr.
    #[arg(long)]
    pub(crate) progress: bool,
}

#[derive(Debug, Args)]
pub(crate) struct PredictArgs {
    #[arg(long)]
    pub(crate) model: Option<PathBuf>,
    #[arg(long)]
    pub(crate) data: Option<PathBuf>,
    #[arg(long)]
    pub(crate) out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub(crate) struct EvaluateArgs {
    #[arg(long)]
    pub(crate) predictions: Option<PathBuf>,
    /// Dataset holding the reference targets.
    #[arg(long, conflicts_with = "oracle")]
    pub(crate) reference: Option<PathBuf>,
    /// Recompute reference targets from the sample meta.
    #[arg(long)]
    pub(crate) oracle: bool,
    #[arg(long)]
    pub(crate) out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub(crate) struct OracleArgs {
    #[arg(long)]
    pub(crate) data: Option<PathBuf>,
    #[arg(long)]
    pub(crate) tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub(crate) struct GradcheckArgs {
    #[arg(long, value_enum)]
    pub(crate) arch: Option<ArchArg>,
    #[arg(long)]
    pub(crate) seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub(crate) enum ArchArg {
    #[value(alias = "static_fcnn")]
    Static,
    #[value(alias = "dynamic_lstm")]
    Dynamic,
}

impl From<ArchArg> for ArchKind {
    fn from(a: ArchArg) -> Self {
        match a {
            ArchArg::Static => ArchKind::StaticFcnn,
            ArchArg::Dynamic => ArchKind::DynamicLstm,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub(crate) enum ModelArg {
    Xxz,
    Xx,
}

impl From<ModelArg> for SweepModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Xxz => SweepModel::Xxz,
            ModelArg::Xx => SweepModel::Xx,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub(crate) enum ActivationArg {
    Relu,
    Tanh,
    Linear,
}

impl From<ActivationArg> for Activation {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::Tanh => Activation::Tanh,
            ActivationArg::Linear => Activation::Linear,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or inputs; exit code 1.
    Usage(String),
    Core(entlearn::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_io() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<entlearn::Error> for CliError {
    fn from(e: entlearn::Error) -> Self {
        CliError::Core(e)
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let cfg = config::load(cli.config.as_deref())?;
    match cli.command {
        Command::GenStatic(a) => commands::gen_static(a, cfg.gen_static),
        Command::GenDynamic(a) => commands::gen_dynamic(a, cfg.gen_dynamic),
        Command::GenSweep(a) => commands::gen_sweep(a, cfg.gen_sweep),
        Command::Train(a) => commands::train(a, cfg.train),
        Command::Predict(a) => commands::predict(a, cfg.predict),
        Command::Evaluate(a) => commands::evaluate(a, cfg.evaluate),
        Command::Oracle(a) => commands::oracle(a, cfg.oracle),
        Command::Gradcheck(a) => commands::gradcheck(a, cfg.gradcheck),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
