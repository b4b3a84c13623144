//! `owl`: solve OWL-regularized regression problems, evaluate the prox,
//! generate replicated Gaussian designs and run bound experiments.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "owl", version, about = "Ordered weighted l1 regression tools")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Base seed for data generation, random initialization and experiments.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Solver tolerance on the convergence residual.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    /// Magnitude tolerance used when grouping coefficients into clusters.
    #[arg(long, global = true)]
    pub cluster_tol: Option<f64>,
    /// Worker threads for experiments (1 runs sequentially).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the OWL proximal operator on a vector.
    Prox {
        /// Vector file (any CSV layout); `-` reads stdin.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        weights: String,
    },
    /// Solve a problem read from CSV files.
    Solve(SolveArgs),
    /// Sample a dataset from the replication model.
    Generate(GenerateArgs),
    /// Check the clustering conditions for every column pair of a solution.
    CheckClusters(CheckArgs),
    /// Run a Monte-Carlo experiment described by a config file.
    Experiment {
        config: PathBuf,
        /// Report path; overrides the config's `output` key.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LossArg {
    Squared,
    Absolute,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormulationArg {
    Lagrangian,
    Constrained,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StepRuleArg {
    Fixed,
    Backtracking,
}

#[derive(Args, Debug)]
pub struct ProblemArgs {
    /// Design matrix, one row per sample.
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long)]
    pub observations: PathBuf,
    /// `uniform[:λ]`, `oscar:λ1,λ2`, `slope:q` or `file:PATH`.
    #[arg(long)]
    pub weights: String,
    #[arg(long, value_enum, default_value = "squared")]
    pub loss: LossArg,
    #[arg(long, value_enum, default_value = "lagrangian")]
    pub formulation: FormulationArg,
    /// Noise level for the constrained formulation.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "fixed")]
    pub step_rule: StepRuleArg,
    /// Where to write the solution; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// `balanced:q,p`, `random:q,p`, or explicit 1-based groups such as
    /// `1,2;3;4` where a leading `-` flips that column's sign.
    #[arg(long)]
    pub groups: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Draw an independent random sign for every column.
    #[arg(long)]
    pub random_signs: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub solution: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prox { input, weights } => commands::prox(&input, &weights),
        Command::Solve(args) => commands::solve(&cli.global, &args),
        Command::Generate(args) => commands::generate(&cli.global, &args),
        Command::CheckClusters(args) => commands::check_clusters(&cli.global, &args),
        Command::Experiment { config, output } => {
            commands::experiment(&cli.global, &config, output.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("owl: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
