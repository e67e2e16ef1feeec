//! `fpee`: floating-point error estimation from the command line.

mod commands;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "fpee", version, about = "Adjoint-based floating-point error estimation for FPL programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Directory for report files; reports go to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for generated inputs; overrides the seed inside `--sample`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the rounding error of every input row.
    Analyze(Common),
    /// Per-variable sensitivities, optionally per loop iteration.
    Sensitivity(SensitivityArgs),
    /// Choose variables to demote under an error budget.
    Tune(TuneArgs),
    /// Estimate and measure the error of fast math approximations.
    Approx(Common),
    /// Compare estimated and actual error for a precision configuration.
    Validate(Common),
    /// Print the generated adjoint.
    DumpAdjoint(DumpArgs),
    /// The shipped benchmark kernels.
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// An FPL file, or `corpus:<kernel>` for a shipped kernel.
    pub file: String,
    /// Function to analyze; defaults to the last one in the file.
    #[arg(long)]
    pub entry: Option<String>,
    /// taylor-default, shadow-cast, approx-func or user:<file>.
    #[arg(long)]
    pub model: Option<String>,
    /// Storage precisions, as a file or inline (`default=double,x=single`).
    #[arg(long)]
    pub precision_spec: Option<String>,
    /// CSV of input rows; the header names parameters.
    #[arg(long, conflicts_with = "sample")]
    pub inputs: Option<PathBuf>,
    /// Sampled inputs as `dist,n,seed`, e.g. `uniform(-1:1),100,7`.
    #[arg(long)]
    pub sample: Option<String>,
    /// Fixes a parameter for every row, e.g. `--set n=1000`.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
    /// Rows drawn for `corpus:` sources.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Problem size for `corpus:` sources.
    #[arg(long)]
    pub size: Option<i64>,
    /// Approximation map, as a file or inline (`d=log,s=sqrt`).
    #[arg(long)]
    pub map: Option<String>,
    /// Writes the adjoint text to this file.
    #[arg(long, value_name = "FILE")]
    pub dump_adjoint: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub common: Common,
    /// Index variable of the loop to profile per iteration.
    #[arg(long, value_name = "LOOPVAR")]
    pub per_iteration: Option<String>,
    /// Comma-separated variables kept in the per-iteration matrix.
    #[arg(long, value_delimiter = ',')]
    pub track: Vec<String>,
    /// Cutoff threshold for the per-iteration profile.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Divide by the maximum (per iteration for profiles).
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[command(flatten)]
    pub common: Common,
    /// Error budget; defaults to the kernel's for `corpus:` sources.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Precision to demote to.
    #[arg(long, default_value = "single")]
    pub to: String,
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    pub file: String,
    #[arg(long)]
    pub entry: Option<String>,
    #[arg(long, default_value = "taylor-default")]
    pub model: String,
}

#[derive(Subcommand, Debug)]
pub enum CorpusCommand {
    /// List the kernels.
    List,
    /// Run a kernel's default workflow (`all` runs every kernel).
    Run {
        name: String,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        size: Option<i64>,
    },
}

/// Exit status for a failure, by the first recognizable cause.
fn exit_code(err: &anyhow::Error) -> u8 {
    use fpee::analysis::AnalysisError;
    use fpee::runtime::RuntimeError;
    for cause in err.chain() {
        if cause.is::<fpee::frontend::FrontendError>() {
            return 1;
        }
        if cause.is::<fpee::transform::TransformError>() {
            return 2;
        }
        if let Some(RuntimeError::Fault { .. }) = cause.downcast_ref::<RuntimeError>() {
            return 3;
        }
        if let Some(AnalysisError::Runtime(RuntimeError::Fault { .. })) = cause.downcast_ref::<AnalysisError>() {
            return 3;
        }
        if let Some(AnalysisError::Transform(_)) = cause.downcast_ref::<AnalysisError>() {
            return 2;
        }
    }
    4
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CHEF_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
