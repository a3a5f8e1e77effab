//! `mtd`: run truth-discovery methods on claim files, evaluate them against
//! ground truth, generate synthetic datasets and dump diagnostics.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mtd_core::{ClaimFormat, EngineConfig};

use manifest::Method;

#[derive(Parser, Debug)]
#[command(
    name = "mtd",
    version,
    about = "Multi-truth discovery over conflicting source claims"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one method and write truths, profile, report and manifest.
    Run(RunArgs),
    /// Score predictions against ground truth.
    Eval(EvalArgs),
    /// Generate a synthetic dataset with planted truths.
    Synth(SynthArgs),
    /// Write per-object popularity as TSV.
    DumpPopularity(DumpPopularityArgs),
    /// Run the full engine and write the final per-object dependence scores.
    DumpDependence(DumpDependenceArgs),
}

/// Claim-file layout.
#[derive(Args, Debug, Clone)]
struct FormatArgs {
    /// Field delimiter: `tab`, `comma` or a single character.
    #[arg(long, default_value = "tab", value_parser = parse_delimiter)]
    delimiter: char,
    /// Input files start with a column header line.
    #[arg(long)]
    header: bool,
}

impl FormatArgs {
    fn format(&self) -> ClaimFormat {
        ClaimFormat {
            delimiter: self.delimiter,
            has_header: self.header,
        }
    }
}

fn parse_delimiter(s: &str) -> Result<char, String> {
    match s {
        "tab" | "\\t" => Ok('\t'),
        "comma" => Ok(','),
        _ => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(format!("expected tab, comma or a single character, got {s:?}")),
            }
        }
    }
}

/// Engine parameters; unset flags keep the defaults.
#[derive(Args, Debug, Clone, Default)]
struct EngineArgs {
    /// Edge smoothing weight [default: 0.1]
    #[arg(long)]
    beta: Option<f64>,
    /// Convergence threshold on the cosine difference [default: 1e-4]
    #[arg(long)]
    delta: Option<f64>,
    /// Positive precision anchor [default: 1.0]
    #[arg(long)]
    pp_max: Option<f64>,
    /// Negative precision anchor [default: 0.9]
    #[arg(long)]
    np_max: Option<f64>,
    /// Positive dependence anchor [default: 1.0]
    #[arg(long)]
    pc_max: Option<f64>,
    /// Negative dependence anchor [default: 0.8]
    #[arg(long)]
    nc_max: Option<f64>,
    /// Outer iteration budget [default: 100]
    #[arg(long)]
    max_iters: Option<usize>,
}

impl EngineArgs {
    fn any(&self) -> bool {
        [
            self.beta,
            self.delta,
            self.pp_max,
            self.np_max,
            self.pc_max,
            self.nc_max,
        ]
        .iter()
        .any(Option::is_some)
            || self.max_iters.is_some()
    }

    fn apply(&self, mut c: EngineConfig) -> EngineConfig {
        c.beta = self.beta.unwrap_or(c.beta);
        c.delta = self.delta.unwrap_or(c.delta);
        c.pp_max = self.pp_max.unwrap_or(c.pp_max);
        c.np_max = self.np_max.unwrap_or(c.np_max);
        c.pc_max = self.pc_max.unwrap_or(c.pc_max);
        c.nc_max = self.nc_max.unwrap_or(c.nc_max);
        c.max_outer_iters = self.max_iters.unwrap_or(c.max_outer_iters);
        c
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum, required_unless_present = "manifest", conflicts_with = "manifest")]
    method: Option<Method>,
    /// Claim file: source, object, value per line.
    #[arg(long, required_unless_present = "manifest", conflicts_with = "manifest")]
    claims: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, required_unless_present = "manifest")]
    out: Option<PathBuf>,
    /// Ground-truth file, recorded in the manifest.
    #[arg(long, conflicts_with = "manifest")]
    gold: Option<PathBuf>,
    /// Re-run from a manifest written by an earlier run.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Also write graphs, dependence and popularity tables.
    #[arg(long)]
    dump_graphs: bool,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    format: FormatArgs,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Claim file; defines the evaluated objects and popularity weights.
    #[arg(long)]
    claims: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Prediction files, one per run.
    #[arg(long, required_unless_present = "method", conflicts_with = "method")]
    pred: Vec<PathBuf>,
    /// Run this method instead of reading predictions.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Number of timed runs with `--method`.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    /// Print `key=value` lines instead of a table.
    #[arg(long)]
    kv: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    format: FormatArgs,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory for claims.tsv, gold.tsv and spec.txt.
    #[arg(long)]
    out: PathBuf,
    /// `key=value` spec file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_objects: Option<usize>,
    /// Total sources, copiers included.
    #[arg(long)]
    n_sources: Option<usize>,
    /// `k` or `lo..hi`.
    #[arg(long)]
    truths_per_object: Option<String>,
    #[arg(long)]
    false_pool_size: Option<usize>,
    #[arg(long)]
    honest_positive_precision: Option<f64>,
    #[arg(long)]
    honest_negative_precision: Option<f64>,
    #[arg(long)]
    n_copiers: Option<usize>,
    #[arg(long)]
    copy_fidelity: Option<f64>,
    #[arg(long)]
    victim_positive_precision: Option<f64>,
    #[arg(long)]
    coverage_skew: Option<f64>,
    #[arg(long)]
    mean_coverage: Option<f64>,
    #[arg(long)]
    quality_popularity_correlation: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl SynthArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        fn s<T: ToString>(v: &Option<T>) -> Option<String> {
            v.as_ref().map(ToString::to_string)
        }
        [
            ("n_objects", s(&self.n_objects)),
            ("n_sources", s(&self.n_sources)),
            ("truths_per_object", self.truths_per_object.clone()),
            ("false_pool_size", s(&self.false_pool_size)),
            ("honest_positive_precision", s(&self.honest_positive_precision)),
            ("honest_negative_precision", s(&self.honest_negative_precision)),
            ("n_copiers", s(&self.n_copiers)),
            ("copy_fidelity", s(&self.copy_fidelity)),
            ("victim_positive_precision", s(&self.victim_positive_precision)),
            ("coverage_skew", s(&self.coverage_skew)),
            ("mean_coverage", s(&self.mean_coverage)),
            (
                "quality_popularity_correlation",
                s(&self.quality_popularity_correlation),
            ),
            ("rng_seed", s(&self.seed)),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

#[derive(Args, Debug)]
struct DumpPopularityArgs {
    #[arg(long)]
    claims: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args, Debug)]
struct DumpDependenceArgs {
    #[arg(long)]
    claims: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    format: FormatArgs,
    #[command(flatten)]
    engine: EngineArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::Eval(args) => commands::eval(args),
        Command::Synth(args) => commands::synth(args),
        Command::DumpPopularity(args) => commands::dump_popularity(args),
        Command::DumpDependence(args) => commands::dump_dependence(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("mtd: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
