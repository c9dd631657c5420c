//! `vivi` command line: simulate benchmark data, fit models, compute VIVI
//! matrices, and compile the displays to SVG/JSON.
//!
//! Exit codes: 0 success, 2 usage error, 1 runtime error. Every command
//! honors `--seed`; repeated invocations write byte-identical files.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "vivi",
    version,
    about = "Variable importance and interaction displays for any supervised fit",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark dataset (five signal variables, the rest noise).
    Simulate(SimulateArgs),
    /// Fit a model (kNN, random forest, or external command) and save it.
    Fit(FitArgs),
    /// Compute the importance/interaction matrix for a fitted model.
    Vivi(ViviArgs),
    /// Compile a display (heatmap, network, gpdp, zpdp) to SVG + JSON.
    Plot(PlotArgs),
}

#[derive(Args)]
#[command(args_override_self = true)]
struct SimulateArgs {
    /// Rows to generate.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Predictors (at least 5).
    #[arg(long, default_value_t = 10)]
    p: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sd: f64,
    /// Couple x5 to x4 (correlation about 0.92).
    #[arg(long)]
    correlated: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: std::path::PathBuf,
    /// key=value file merged under explicit flags.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct FitArgs {
    /// Training CSV.
    #[arg(long)]
    data: std::path::PathBuf,
    /// Response column name.
    #[arg(long)]
    response: String,
    /// Model family.
    #[arg(long, value_parser = ["knn", "forest", "external"])]
    model: String,
    /// Neighbours for kNN.
    #[arg(long, default_value_t = 7)]
    k: usize,
    /// Trees in the forest.
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Minimum rows per leaf.
    #[arg(long = "min-node", default_value_t = 5)]
    min_node: usize,
    /// Candidate features per split; 0 = automatic.
    #[arg(long, default_value_t = 0)]
    mtry: usize,
    /// External model command (whitespace-separated argv).
    #[arg(long)]
    command: Option<String>,
    /// Hold out a test fraction and print test metrics.
    #[arg(long)]
    split: Option<f64>,
    /// Columns to log-transform before fitting (comma separated).
    #[arg(long = "log-columns")]
    log_columns: Option<String>,
    /// Offset inside the log: ln(x + offset), 0 or 1.
    #[arg(long = "log-offset", default_value_t = 1.0)]
    log_offset: f64,
    /// Type overrides: col=numeric or col=categorical, comma separated.
    #[arg(long)]
    schema: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model dump path (JSON).
    #[arg(long)]
    out: std::path::PathBuf,
    #[arg(long)]
    config: Option<std::path::PathBuf>,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct ViviArgs {
    /// Fitted model dump from `vivi fit`.
    #[arg(long)]
    model: Option<std::path::PathBuf>,
    /// External model command, as an alternative to --model.
    #[arg(long)]
    command: Option<String>,
    #[arg(long)]
    data: std::path::PathBuf,
    /// Response column (needed for permutation importance).
    #[arg(long)]
    response: Option<String>,
    /// Importance source: embedded, permutation, or file=PATH (JSON array).
    #[arg(long, default_value = "permutation")]
    importance: String,
    /// Metric for permutation importance (defaults to the task's metric).
    #[arg(long, value_parser = ["rmse", "logloss"])]
    metric: Option<String>,
    /// Permutations per variable.
    #[arg(long = "n-perm", default_value_t = 4)]
    n_perm: usize,
    /// Interaction statistic: h (un-normalized) or h2 (normalized).
    #[arg(long, default_value = "h", value_parser = ["h", "h2"])]
    interaction: String,
    /// Row sample size for the interaction statistic.
    #[arg(long, default_value_t = 50)]
    sample: usize,
    /// Designated class label for classification links.
    #[arg(long)]
    class: Option<String>,
    /// Worker threads for pair computation (0 = all cores); the output does
    /// not depend on this. Falls back to VIVI_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix: writes `<out>.json` and `<out>.csv`.
    #[arg(long)]
    out: std::path::PathBuf,
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Columns to log-transform before evaluation (must match the fit).
    #[arg(long = "log-columns")]
    log_columns: Option<String>,
    #[arg(long = "log-offset", default_value_t = 1.0)]
    log_offset: f64,
    #[arg(long)]
    schema: Option<String>,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct PlotArgs {
    #[arg(long, value_parser = ["heatmap", "network", "gpdp", "zpdp"])]
    kind: String,
    /// Matrix JSON from `vivi vivi` (heatmap, network, zpdp; gpdp with --top).
    #[arg(long)]
    matrix: Option<std::path::PathBuf>,
    /// Model dump (gpdp, zpdp).
    #[arg(long)]
    model: Option<std::path::PathBuf>,
    /// Data CSV (gpdp, zpdp).
    #[arg(long)]
    data: Option<std::path::PathBuf>,
    #[arg(long)]
    response: Option<String>,
    /// Keep only the leading variables of the seriation ordering.
    #[arg(long)]
    top: Option<usize>,
    /// Second matrix whose value range is pooled into the color scales, so
    /// two heatmaps of different fits are directly comparable.
    #[arg(long = "share-limits-with")]
    share_limits_with: Option<std::path::PathBuf>,
    /// Importance weight in the seriation score.
    #[arg(long, default_value_t = 1.0)]
    lambda1: f64,
    /// Interaction weight in the seriation score.
    #[arg(long, default_value_t = 1.0)]
    lambda2: f64,
    /// Clustering linkage for seriation.
    #[arg(long, default_value = "average", value_parser = ["average", "complete", "single"])]
    linkage: String,
    /// Keep edges with interaction above this (network, zpdp).
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    /// Cluster network nodes and draw hulls.
    #[arg(long)]
    cluster: bool,
    /// Network layout.
    #[arg(long, default_value = "radial", value_parser = ["radial", "force"])]
    layout: String,
    /// Variables for the pairs display (comma separated); alternative to
    /// --matrix + --top.
    #[arg(long)]
    vars: Option<String>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 20)]
    grid: usize,
    /// ICE curves per diagonal panel (regression).
    #[arg(long = "max-ice", default_value_t = 30)]
    max_ice: usize,
    /// ICE curves per response class (classification).
    #[arg(long = "per-class", default_value_t = 25)]
    per_class: usize,
    /// Concatenate trail components into one zigzag.
    #[arg(long = "join-components", default_value_t = true, action = clap::ArgAction::Set)]
    join_components: bool,
    #[arg(long)]
    class: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the seriation ordering as a JSON name list.
    #[arg(long = "order-out")]
    order_out: Option<std::path::PathBuf>,
    /// Output prefix: writes `<out>.svg` and `<out>.json` (zpdp also
    /// `<out>.trail.json`).
    #[arg(long)]
    out: std::path::PathBuf,
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    #[arg(long = "log-columns")]
    log_columns: Option<String>,
    #[arg(long = "log-offset", default_value_t = 1.0)]
    log_offset: f64,
    #[arg(long)]
    schema: Option<String>,
}

fn main() -> std::process::ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let expanded = match config::expand_config_args(raw) {
        Ok(args) => args,
        Err(msg) => {
            eprintln!("vivi: {msg}");
            return std::process::ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(expanded) {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses 2 for usage errors and 0 for --help/--version.
            e.exit();
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Fit(args) => commands::fit(args),
        Command::Vivi(args) => commands::vivi_matrix(args),
        Command::Plot(args) => commands::plot(args),
    };
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vivi: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
