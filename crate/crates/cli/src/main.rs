//! Command-line surface: index building and querying, the scaling
//! benchmark against the linear-scan oracle, and the synthetic tracking
//! runs with metric reports.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Shared index configuration flags. Precedence: flags > config file >
/// defaults.
#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// key=value config file (keys: dimension, metric, beta, zeta, c_max)
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Embedding dimensionality
    #[arg(long)]
    dim: Option<usize>,
    /// Distance function: cosine | euclidean
    #[arg(long)]
    metric: Option<String>,
    /// Match threshold: queries closer than this to a representative
    /// reuse its label
    #[arg(long)]
    beta: Option<f64>,
    /// Placement threshold separating down- from up-insertion
    #[arg(long)]
    zeta: Option<f64>,
    /// Leaf container capacity
    #[arg(long)]
    c_max: Option<usize>,
}

#[derive(Parser, Debug)]
#[command(name = "labelidx", version, about = "Profile-label index and tracking harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Index operations
    Index {
        #[command(subcommand)]
        command: IndexCommand,
    },
    /// Benchmarks
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// Tracking harness
    Track {
        #[command(subcommand)]
        command: TrackCommand,
    },
}

#[derive(Subcommand, Debug)]
enum IndexCommand {
    /// Build an index from a feature CSV (f0..f{D-1}[,label]) or a
    /// detection-stream CSV; writes build stats and a tree snapshot.
    Build {
        /// Input CSV
        #[arg(long)]
        input: std::path::PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Seed for split clustering
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Stats CSV output path
        #[arg(long)]
        out_stats: Option<std::path::PathBuf>,
        /// Preorder snapshot output path
        #[arg(long)]
        out_snapshot: Option<std::path::PathBuf>,
    },
    /// Rebuild an index from its corpus, then run a query file against
    /// it: offline queries are read-only, online queries may insert.
    Query {
        /// Corpus CSV the index is (re)built from
        #[arg(long)]
        corpus: std::path::PathBuf,
        /// Query CSV (f0..f{D-1})
        #[arg(long)]
        input: std::path::PathBuf,
        /// online (mutating misses) or offline (read-only)
        #[arg(long, default_value = "offline")]
        mode: String,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Per-query results CSV (plus a summary row)
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum BenchCommand {
    /// Build synthetic clustered corpora at each size and measure mean
    /// search cost of the tree vs the exhaustive linear scan.
    Scaling {
        /// Comma-separated corpus sizes, e.g. 1k,4k,16k,64k
        #[arg(long, default_value = "1k,4k,16k,64k")]
        sizes: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of synthetic clusters
        #[arg(long, default_value_t = 256)]
        clusters: usize,
        /// Queries per size
        #[arg(long, default_value_t = 200)]
        queries: usize,
        /// Feature noise radius around each cluster center
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
        /// Minimum pairwise cosine distance between cluster centers
        #[arg(long, default_value_t = 0.8)]
        separation: f64,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output CSV (two rows per size: tree and oracle)
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum TrackCommand {
    /// Run the tracker over a scene (generated or from a detection CSV)
    /// and report tracking metrics.
    Run {
        /// Scene spec file (key=value: objects, cyclers, appear, gap,
        /// frames, noise, separation, dim, seed)
        #[arg(long)]
        scene: Option<std::path::PathBuf>,
        /// Detection-stream CSV to track instead of a generated scene
        #[arg(long)]
        stream: Option<std::path::PathBuf>,
        /// Labeling backend: engine | naive
        #[arg(long, default_value = "engine")]
        baseline: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Tracker: frames a track survives unmatched
        #[arg(long, default_value_t = 30)]
        max_missed: u32,
        /// Tracker: detections skipped before the label search
        #[arg(long, default_value_t = 0)]
        confirm_after: u32,
        #[command(flatten)]
        config: ConfigArgs,
        /// Metric report CSV
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        /// Per-track assignments CSV
        #[arg(long)]
        tracks: Option<std::path::PathBuf>,
        /// Write the generated detection stream to this CSV
        #[arg(long)]
        dump_stream: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index { command } => match command {
            IndexCommand::Build {
                input,
                config,
                seed,
                out_stats,
                out_snapshot,
            } => commands::index_build(&input, &config, seed, out_stats, out_snapshot),
            IndexCommand::Query {
                corpus,
                input,
                mode,
                config,
                seed,
                out,
            } => commands::index_query(&corpus, &input, &mode, &config, seed, out),
        },
        Command::Bench { command } => match command {
            BenchCommand::Scaling {
                sizes,
                seed,
                clusters,
                queries,
                noise,
                separation,
                config,
                out,
            } => commands::bench_scaling(
                &sizes, seed, clusters, queries, noise, separation, &config, out,
            ),
        },
        Command::Track { command } => match command {
            TrackCommand::Run {
                scene,
                stream,
                baseline,
                seed,
                max_missed,
                confirm_after,
                config,
                out,
                tracks,
                dump_stream,
            } => commands::track_run(
                scene.as_deref(),
                stream.as_deref(),
                &baseline,
                seed,
                max_missed,
                confirm_after,
                &config,
                out,
                tracks,
                dump_stream,
            ),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.downcast_ref::<labelidx::Error>() {
                Some(err) if !err.is_input_error() => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
