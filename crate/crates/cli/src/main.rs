//! `binsense` command-line tool.
//!
//! Every subcommand writes CSV (first line `# schema=1`) to stdout or to
//! `--output`. Exit status: 0 on success, 2 on invalid input, 1 when a run
//! fails.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "binsense", version, about = "Sparse binary compressed sensing experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file; its entries act as flags placed before the
    /// command line, so explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample an LDPC sensing matrix and write it as an edge list.
    GenMatrix(GenMatrixArgs),
    /// Decode one random instance.
    Decode(DecodeArgs),
    /// Average BER over trials for every (decoder, k, Eb/N0).
    BerSweep(BerSweepArgs),
    /// Record energy and BER along one Glauber run.
    Trajectory(TrajectoryArgs),
    /// Minimise the total energy of the random access scheme per k.
    E2e(E2eArgs),
}

#[derive(Args, Debug, Clone)]
pub struct MatrixArgs {
    /// Number of variables (signal length).
    #[arg(long = "M", value_name = "M", default_value_t = 1 << 14)]
    pub num_vars: usize,
    /// Number of factors (measurements).
    #[arg(long = "n", value_name = "N", default_value_t = 1 << 11)]
    pub num_factors: usize,
    /// Variable degree.
    #[arg(long, default_value_t = 16)]
    pub nu: usize,
}

#[derive(Args, Debug, Clone)]
pub struct DecoderArgs {
    /// Glauber steps [default: 10·M·lg₂M].
    #[arg(long)]
    pub steps: Option<u64>,
    /// Anneal from this multiple of the noise variance over the first half of the run.
    #[arg(long, value_name = "FACTOR")]
    pub anneal: Option<f64>,
    #[arg(long, default_value_t = 25)]
    pub amp_iters: usize,
    #[arg(long, default_value_t = 2000)]
    pub nnls_iters: usize,
}

#[derive(Args, Debug)]
pub struct GenMatrixArgs {
    #[arg(long = "M", value_name = "M")]
    pub num_vars: usize,
    #[arg(long = "n", value_name = "N")]
    pub num_factors: usize,
    #[arg(long)]
    pub nu: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    /// Read the sensing matrix from an edge-list file instead of sampling it.
    #[arg(long, value_name = "FILE")]
    pub matrix_file: Option<PathBuf>,
    #[arg(long, default_value = "glauber-zero")]
    pub decoder: String,
    /// Expected sparsity k (the signal is Bernoulli(k/M)).
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub ebn0: f64,
    #[command(flatten)]
    pub decoder_args: DecoderArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BerSweepArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200, 300])]
    pub k: Vec<usize>,
    /// Eb/N0 grid in dB.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_values_t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    )]
    pub ebn0: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = ["glauber-zero".to_string(), "glauber-nnls".to_string(), "nnls".to_string(), "amp".to_string()]
    )]
    pub decoders: Vec<String>,
    #[command(flatten)]
    pub decoder_args: DecoderArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub ebn0: f64,
    /// Steps between recorded points [default: M].
    #[arg(long)]
    pub stride: Option<u64>,
    /// Start from the rounded NNLS solution instead of zero.
    #[arg(long)]
    pub warm_start: bool,
    /// Also write the support of every recorded state to this file.
    #[arg(long, value_name = "FILE")]
    pub dump_states: Option<PathBuf>,
    #[command(flatten)]
    pub decoder_args: DecoderArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct E2eArgs {
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = [25, 50, 100, 150, 200, 250, 300]
    )]
    pub k: Vec<usize>,
    /// Message bits B.
    #[arg(long = "B", value_name = "B")]
    pub message_bits: usize,
    /// Prefix bits J (phase one has 2^J columns).
    #[arg(long = "J", value_name = "J")]
    pub prefix_bits: usize,
    /// Total channel uses n.
    #[arg(long = "n", value_name = "N")]
    pub blocklength: usize,
    /// Phase-one channel uses n₁.
    #[arg(long = "n1", value_name = "N1")]
    pub phase1_len: usize,
    /// Phase-one column amplitude α.
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 16)]
    pub nu: usize,
    #[arg(long, default_value_t = 0.05)]
    pub target: f64,
    #[arg(long, default_value = "glauber-zero")]
    pub decoder: String,
    /// Phase-one Eb/N0 grid start (dB).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_start: f64,
    /// Phase-one Eb/N0 grid end (dB, inclusive).
    #[arg(long, allow_negative_numbers = true)]
    pub grid_stop: f64,
    #[arg(long, default_value_t = 0.25)]
    pub grid_step: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Emit every grid row instead of only the best row per k.
    #[arg(long)]
    pub grid_rows: bool,
    #[command(flatten)]
    pub decoder_args: DecoderArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Run(String),
}

impl From<binsense::Error> for CliError {
    fn from(e: binsense::Error) -> Self {
        if e.is_validation() {
            CliError::Invalid(e.to_string())
        } else {
            CliError::Run(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::inject(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
