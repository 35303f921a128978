mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{Config, Overrides, DATA_DIR_ENV};
use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "triptrie",
    version,
    about = "Cluster taxi trips with a trip trie"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// key = value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for default input and output files.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,

    /// Grid bounding box as x_min,y_min,x_max,y_max (longitude, latitude).
    #[arg(long, global = true, allow_hyphen_values = true)]
    bbox: Option<String>,

    #[arg(long, global = true)]
    rows: Option<u32>,

    #[arg(long, global = true)]
    cols: Option<u32>,

    /// Temporal resolution in seconds.
    #[arg(long = "t-r", global = true)]
    t_r: Option<u32>,

    /// Longest trip kept, in minutes.
    #[arg(long, global = true)]
    max_minutes: Option<f64>,

    /// Window for the first-levels statistics.
    #[arg(long, global = true)]
    first_levels: Option<usize>,

    /// Local time offset from UTC in hours, for trip categories.
    #[arg(long, global = true, allow_hyphen_values = true)]
    utc_offset: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split raw traces into occupied trips and write a trip table.
    Extract {
        /// Directory of per-taxi trace files.
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn raw traces into an encoded trip corpus.
    Encode {
        #[arg(long)]
        traces: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a trie snapshot from an encoded corpus.
    Build {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// all, day-peak, night-peak, weekdays or weekends.
        #[arg(long, default_value = "all")]
        category: String,
    },
    /// Add the trips of a corpus to an existing snapshot.
    Insert {
        #[arg(long)]
        trie: Option<PathBuf>,
        #[arg(long)]
        corpus: PathBuf,
        /// Defaults to overwriting the input snapshot.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare trie levels with brute-force single linkage on random samples.
    Verify {
        /// Sample from this corpus; without it a synthetic corpus is used.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 1000)]
        size: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Read the levels off the full dendrogram instead of sweeping the
        /// level thresholds only.
        #[arg(long)]
        full_sweep: bool,
        /// Memory budget for one distance matrix.
        #[arg(long, default_value_t = 2048)]
        max_matrix_mib: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Branching factors, clusters per region and trips per cluster.
    Stats {
        #[arg(long)]
        trie: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trips per grid cell at one trie level (level k is time step k - 1).
    Heatmap {
        #[arg(long)]
        trie: Option<PathBuf>,
        #[arg(long)]
        level: usize,
        /// Corpus whose header names the grid; otherwise --bbox is used.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Shallowest level at which each region appears.
    Occurrence {
        #[arg(long)]
        trie: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Where trips starting in a region are at a later level.
    Subtree {
        #[arg(long)]
        trie: Option<PathBuf>,
        #[arg(long)]
        start: u32,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Next-region distribution after a route prefix.
    Predict {
        #[arg(long)]
        trie: Option<PathBuf>,
        /// Comma-separated region ids; empty for the first step.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        prefix: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Number of distinct trip types from one region to another.
    Diversity {
        #[arg(long)]
        trie: Option<PathBuf>,
        #[arg(long)]
        start: u32,
        #[arg(long)]
        end: u32,
    },
    /// Group the clusters of one level into bounded-diameter macro-clusters.
    Macro {
        #[arg(long)]
        trie: Option<PathBuf>,
        #[arg(long)]
        level: usize,
        /// Largest edit distance allowed inside a macro-cluster.
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value_t = Method::Complete)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regions ranked from rarest to most common.
    Outliers {
        #[arg(long)]
        trie: Option<PathBuf>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Method {
    Complete,
    Greedy,
}

fn config_for(global: &GlobalArgs, seed: Option<u64>) -> Result<Config, CliError> {
    let flags = Overrides {
        data_dir: global.data_dir.clone(),
        bbox: global.bbox.clone(),
        rows: global.rows,
        cols: global.cols,
        t_r: global.t_r,
        max_minutes: global.max_minutes,
        first_levels: global.first_levels,
        utc_offset_hours: global.utc_offset,
        seed,
    };
    let env_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
    Config::resolve(global.config.as_deref(), env_dir, &flags)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let seed = match &cli.command {
        Command::Verify { seed, .. } => *seed,
        _ => None,
    };
    let cfg = config_for(&cli.global, seed)?;
    let trie_or = |p: Option<PathBuf>| p.unwrap_or_else(|| cfg.path(commands::TRIE_FILE));
    match cli.command {
        Command::Extract { traces, out } => commands::extract(&cfg, traces, out),
        Command::Encode { traces, out } => commands::encode(&cfg, traces, out),
        Command::Build {
            corpus,
            out,
            category,
        } => commands::build(&cfg, corpus, out, &category),
        Command::Insert { trie, corpus, out } => commands::insert(trie_or(trie), &corpus, out),
        Command::Verify {
            corpus,
            samples,
            size,
            full_sweep,
            max_matrix_mib,
            out,
            ..
        } => {
            let options = commands::VerifyRun {
                samples,
                size,
                full_sweep,
                max_matrix_mib,
            };
            commands::verify(&cfg, corpus, &options, out)
        }
        Command::Stats { trie, out } => commands::stats(&cfg, &trie_or(trie), out),
        Command::Heatmap {
            trie,
            level,
            corpus,
            out_dir,
        } => commands::heatmap(&cfg, &trie_or(trie), level, corpus, out_dir),
        Command::Occurrence { trie, corpus, out } => {
            commands::occurrence(&cfg, &trie_or(trie), corpus, out)
        }
        Command::Subtree {
            trie,
            start,
            level,
            top,
            out,
        } => commands::subtree(&trie_or(trie), start, level, top, out),
        Command::Predict { trie, prefix, out } => commands::predict(&trie_or(trie), &prefix, out),
        Command::Diversity { trie, start, end } => commands::diversity(&trie_or(trie), start, end),
        Command::Macro {
            trie,
            level,
            q,
            method,
            out,
        } => {
            let method = match method {
                Method::Complete => triptrie::macro_cluster::MacroMethod::CompleteLinkage,
                Method::Greedy => triptrie::macro_cluster::MacroMethod::Greedy,
            };
            commands::macro_clusters(&trie_or(trie), level, q, method, out)
        }
        Command::Outliers { trie, top, out } => commands::outliers(&trie_or(trie), top, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("error\tkind=usage\tmessage={}", first.replace('\t', "\\t"));
            eprint!("{message}");
            return ExitCode::from(2);
        }
        Err(e) => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
