//! `acd`: approximate convex decomposition pipeline on files.
//!
//! Subcommands: `decompose` (mesh/cloud to convex components), `label`
//! (propagate component labels to surface samples), `eval` (NMI and pair
//! precision/recall against reference labels, with optional clustering
//! baselines), `pairs` (sample contrastive pairs) and `loss` (contrastive /
//! joint loss and gradients over embedding files).
//!
//! Exit codes: 0 success, 2 input error, 3 computation error.

mod commands;
mod config;
mod manifest;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "acd",
    version,
    about = "Approximate convex decomposition pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Key=value config file; flags override config entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose a mesh (.obj) or point cloud (.xyz/.ply) into approximately
    /// convex components.
    Decompose {
        input: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Grid resolution per axis.
        #[arg(long)]
        resolution: Option<usize>,
        /// Concavity tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_components: Option<usize>,
        /// Balance-term weight.
        #[arg(long)]
        alpha: Option<f64>,
        /// Symmetry-term weight.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        planes_per_axis: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample a mesh surface and label the samples from a decomposition.
    Label {
        mesh: PathBuf,
        decomposition: PathBuf,
        /// Output file; format chosen by --format.
        #[arg(long)]
        out: PathBuf,
        /// Surface samples on the shape.
        #[arg(long)]
        n: Option<usize>,
        /// Samples per component hull.
        #[arg(long)]
        per_component: Option<usize>,
        /// Output format: ply (with a "component" property) or txt ("x y z label").
        #[arg(long, default_value = "ply")]
        format: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compare predicted labels against reference labels; optionally run
    /// clustering baselines on the coordinates.
    Eval {
        pred: PathBuf,
        truth: PathBuf,
        /// Report CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Baselines to run: kmeans, hac, spectral (repeatable).
        #[arg(long)]
        baseline: Vec<String>,
        /// Histogram summary JSON path.
        #[arg(long)]
        hist: Option<PathBuf>,
        /// Neighbors for the spectral baseline graph.
        #[arg(long, default_value_t = 10)]
        n_neighbors: usize,
        /// Shape id recorded in the report (default: pred file stem).
        #[arg(long)]
        shape_id: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample same/different-label pairs from a labels file.
    Pairs {
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n_same: Option<usize>,
        #[arg(long)]
        n_diff: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Pairwise contrastive loss (and optional cross-entropy / joint loss)
    /// over an embedding file.
    Loss {
        embeddings: PathBuf,
        /// Pair batch CSV ("i,j,same").
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Labels file for pair sampling and/or cross-entropy.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        n_same: Option<usize>,
        #[arg(long)]
        n_diff: Option<usize>,
        /// Margin m for different-label pairs.
        #[arg(long)]
        margin: Option<f64>,
        /// Joint-loss weight on the pairwise term.
        #[arg(long)]
        lambda: Option<f64>,
        /// Logits file (embedding binary format) for cross-entropy.
        #[arg(long)]
        logits: Option<PathBuf>,
        /// Write the pairwise-loss gradient here (embedding binary format).
        #[arg(long)]
        grad_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// Errors carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable/unparseable input or inconsistent arguments: exit 2.
    Input(String),
    /// A computation failed on valid inputs: exit 3.
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Compute(m) => m,
        }
    }
}

pub fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn compute_err(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

/// Configures the global worker pool; `None` (or 0) keeps the default of one
/// thread per core.
fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose {
            input,
            out,
            resolution,
            tol,
            max_components,
            alpha,
            beta,
            planes_per_axis,
            common,
        } => commands::decompose::run(commands::decompose::Opts {
            input,
            out,
            resolution,
            tol,
            max_components,
            alpha,
            beta,
            planes_per_axis,
            common,
        }),
        Command::Label {
            mesh,
            decomposition,
            out,
            n,
            per_component,
            format,
            common,
        } => commands::label::run(commands::label::Opts {
            mesh,
            decomposition,
            out,
            n,
            per_component,
            format,
            common,
        }),
        Command::Eval {
            pred,
            truth,
            out,
            baseline,
            hist,
            n_neighbors,
            shape_id,
            common,
        } => commands::eval::run(commands::eval::Opts {
            pred,
            truth,
            out,
            baseline,
            hist,
            n_neighbors,
            shape_id,
            common,
        }),
        Command::Pairs {
            labels,
            out,
            n_same,
            n_diff,
            common,
        } => commands::pairs::run(commands::pairs::Opts {
            labels,
            out,
            n_same,
            n_diff,
            common,
        }),
        Command::Loss {
            embeddings,
            pairs,
            labels,
            n_same,
            n_diff,
            margin,
            lambda,
            logits,
            grad_out,
            common,
        } => commands::loss::run(commands::loss::Opts {
            embeddings,
            pairs,
            labels,
            n_same,
            n_diff,
            margin,
            lambda,
            logits,
            grad_out,
            common,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
