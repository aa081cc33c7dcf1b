//! `graphset`: build graph-collection embeddings from structural node
//! features and run classification, feature selection or sampling sweeps
//! from a JSON config.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{RunConfig, Task};
use run::{execute, CliError, Command};

#[derive(Parser)]
#[command(name = "graphset", version, about = "Wasserstein embeddings of graph collections")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "GRAPHSET_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Greedy,
    Fast,
    Unsupervised,
    Random,
    Worst,
}

impl From<Method> for Task {
    fn from(m: Method) -> Task {
        match m {
            Method::Greedy => Task::SelectGreedy,
            Method::Fast => Task::SelectFast,
            Method::Unsupervised => Task::SelectUnsupervised,
            Method::Random => Task::SelectRandom,
            Method::Worst => Task::SelectWorst,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute node features and write features.csv.
    Features(Common),
    /// Embed the collection and write embedding.csv.
    Embed(Common),
    /// Embed, then evaluate the forest over repeated splits.
    Classify(Common),
    /// Order the configured features.
    Select {
        #[command(flatten)]
        common: Common,
        /// Selection algorithm; defaults to the config's select:* task.
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Node-sampling sweep against the full-node embedding.
    Similarity(Common),
    /// Time the pipeline stages.
    Bench(Common),
    /// Run whatever task the config declares.
    Run(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, common, method) = match cli.command {
        Cmd::Features(c) => (Command::Features, c, None),
        Cmd::Embed(c) => (Command::Embed, c, None),
        Cmd::Classify(c) => (Command::Classify, c, None),
        Cmd::Select { common, method } => (Command::Select, common, method.map(Task::from)),
        Cmd::Similarity(c) => (Command::Similarity, c, None),
        Cmd::Bench(c) => (Command::Bench, c, None),
        Cmd::Run(c) => (Command::Run, c, None),
    };
    match run(command, common, method) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("graphset: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command, common: Common, method: Option<Task>) -> Result<(), CliError> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = common.out {
        config.output_dir = out;
    }
    let threads = match common.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))?;
    let summary = execute(command, config, method, threads)?;
    for path in summary.written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}
