//! `lmc` — command-line harness for the lifted multicut toolkit.
//!
//! Subcommands: `gen` (planted benchmark instances), `lift` (add lifted
//! edges), `solve` (minimize the objective), `eval` (partition metrics) and
//! `resolve` (re-solve objects flagged by path evidence).
//!
//! All reports go to stdout as `key=value` lines; errors are a single
//! `error: ...` line on stderr. Exit codes: 0 success, 1 usage error,
//! 2 data error. Output files are written atomically (no partial files).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "lmc", version, about = "Lifted multicut graph partitioning toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-partition benchmark instance
    Gen(GenArgs),
    /// Construct lifted edges and merge them into a problem file
    Lift(LiftArgs),
    /// Minimize the lifted multicut objective of a problem file
    Solve(SolveArgs),
    /// Compare a segmentation against ground truth
    Eval(EvalArgs),
    /// Re-solve objects flagged as false merges by path evidence
    Resolve(ResolveArgs),
}

#[derive(Args)]
struct GenArgs {
    /// TOML file with the instance parameters
    #[arg(long)]
    config: PathBuf,
    /// Output problem file
    #[arg(long)]
    out: PathBuf,
    /// Output ground-truth labeling file
    #[arg(long)]
    gt: PathBuf,
    /// Output attribution file (optional)
    #[arg(long)]
    attribution: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LiftMode {
    Class,
    Components,
    Paths,
    Dense,
}

#[derive(Args)]
struct LiftArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum)]
    mode: LiftMode,
    #[arg(long)]
    out: PathBuf,
    /// Attribution file (modes: class, components)
    #[arg(long)]
    attribution: Option<PathBuf>,
    /// Repulsion strength (mode: class) or constant candidate weight (mode:
    /// dense)
    #[arg(long)]
    weight: Option<f64>,
    /// Attraction strength (mode: components)
    #[arg(long)]
    attractive: Option<f64>,
    /// Repulsion strength (mode: components)
    #[arg(long)]
    repulsive: Option<f64>,
    /// Per-node cap on emitted edges (modes: class, components)
    #[arg(long, default_value_t = 16)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Path evidence file (mode: paths)
    #[arg(long)]
    paths: Option<PathBuf>,
    /// Flagging threshold on the merge probability (mode: paths)
    #[arg(long)]
    threshold: Option<f64>,
    /// Current segmentation giving the object of each node (mode: paths)
    #[arg(long)]
    labeling: Option<PathBuf>,
    /// Largest graph distance for candidate pairs (mode: dense)
    #[arg(long)]
    max_distance: Option<usize>,
    /// File with one weight per candidate pair (mode: dense)
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Exact,
    Gaec,
    GaecLs,
    Hier,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InnerArg {
    Gaec,
    GaecLs,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverArg,
    /// Output labeling file
    #[arg(long)]
    out: PathBuf,
    /// Reduction levels (solver: hier)
    #[arg(long, default_value_t = 2)]
    levels: usize,
    /// Initial block shape "z,y,x" (solver: hier; default covers a quarter
    /// of the bounding box per axis)
    #[arg(long, value_parser = parse_block_shape)]
    block: Option<[i64; 3]>,
    /// Worker threads for block solving (solver: hier)
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Reserved for randomized solvers; accepted for reproducible pipelines
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sweep cap for local-search polishing
    #[arg(long, default_value_t = 100)]
    max_sweeps: usize,
    /// Node cap for exact enumeration (solver: exact)
    #[arg(long, default_value_t = 12)]
    exact_max_nodes: usize,
    /// Solver for block sub-problems (solver: hier)
    #[arg(long, value_enum, default_value_t = InnerArg::GaecLs)]
    inner_solver: InnerArg,
    /// Solver for the final reduced problem (solver: hier; defaults to
    /// --inner-solver)
    #[arg(long, value_enum)]
    final_solver: Option<InnerArg>,
    /// Only contract block-interior merges, deferring block-boundary nodes
    /// to later levels (solver: hier)
    #[arg(long, default_value_t = false)]
    exclude_boundary: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogBaseArg {
    E,
    #[value(name = "2")]
    Two,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth labeling file
    #[arg(long)]
    gt: PathBuf,
    /// Segmentation labeling file
    #[arg(long)]
    seg: PathBuf,
    #[arg(long, value_enum, default_value_t = LogBaseArg::E)]
    log_base: LogBaseArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScopeArg {
    /// Extract and re-solve each flagged object separately
    Object,
    /// Merge the evidence edges into the problem and re-solve globally
    Global,
}

#[derive(Args)]
struct ResolveArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Current segmentation to improve
    #[arg(long)]
    labeling: PathBuf,
    /// Path evidence file
    #[arg(long)]
    paths: PathBuf,
    /// Flagging threshold on the merge probability
    #[arg(long)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = ScopeArg::Object)]
    scope: ScopeArg,
    #[arg(long, value_enum, default_value_t = SolverArg::GaecLs)]
    solver: SolverArg,
    #[arg(long, default_value_t = 100)]
    max_sweeps: usize,
    /// Output labeling file
    #[arg(long)]
    out: PathBuf,
}

fn parse_block_shape(raw: &str) -> Result<[i64; 3], String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 3 {
        return Err("expected \"z,y,x\"".into());
    }
    let mut shape = [0i64; 3];
    for (slot, part) in shape.iter_mut().zip(parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("invalid block edge length {part:?}"))?;
        if *slot < 1 {
            return Err("block edge lengths must be at least 1".into());
        }
    }
    Ok(shape)
}

/// Command failure with the exit code it maps to.
pub enum AppError {
    /// Bad invocation: exit code 1.
    Usage(String),
    /// Bad input data or an infeasible request: exit code 2.
    Data(String),
}

impl AppError {
    fn report(self) -> ExitCode {
        let (message, code) = match self {
            AppError::Usage(m) => (m, 1),
            AppError::Data(m) => (m, 2),
        };
        let one_line = message.replace('\n', " ");
        eprintln!("error: {one_line}");
        ExitCode::from(code)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            return AppError::Usage(first.to_string()).report();
        }
    };
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Lift(args) => commands::lift(args),
        Command::Solve(args) => commands::solve(args),
        Command::Eval(args) => commands::eval(args),
        Command::Resolve(args) => commands::resolve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
