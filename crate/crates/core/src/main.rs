//! Command line front end: decode single instances from CSV files, run
//! sweeps described by TOML configs, reproduce the built-in figure catalog,
//! and self-check an installation.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lgga::adaptive::algga_decode;
use lgga::decode::{lga_decode, lgga_decode, DecodeOutcome, GreedyParams};
use lgga::harness::config::load_sweep_config;
use lgga::harness::figures::{reproduce_figure_with, FigureOverrides, Scale};
use lgga::harness::{selftest, sweep_curve};
use lgga::io::{read_matrix_csv, read_signal_csv, write_signal_csv, write_sweep_csv};
use lgga::model::{BlockPartition, BlockRole, SensingMatrix};
use lgga::solver::{SolverKind, SolverParams};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "lgga", version, about = "Greedy weighted-l1 sparse decoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decode one measurement vector against a matrix from CSV files.
    Decode(DecodeArgs),
    /// Run a success-rate sweep described by a TOML config.
    Sweep(SweepArgs),
    /// Re-run a figure from the built-in experiment catalog.
    Reproduce(ReproduceArgs),
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Algorithm {
    /// Plain greedy reweighting with unit base weights.
    Lga,
    /// Greedy reweighting with fixed per-block base weights.
    Lgga,
    /// Greedy reweighting with an adaptive two-block weight.
    Algga,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Route {
    FirstOrder,
    ReferenceLp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScaleArg {
    /// 200 trials per point, every axis value.
    Full,
    /// 50 trials per point, every fourth axis value.
    Desk,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// System matrix CSV: one comma-separated row per line.
    #[arg(long)]
    matrix: PathBuf,
    /// Measurement vector CSV (the sparse `index,value` signal format).
    #[arg(long)]
    measurements: PathBuf,
    /// Where to write the estimate (sparse `index,value` CSV).
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON report of the decode (rounds, thresholds, selections).
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Algorithm::Lga)]
    algorithm: Algorithm,
    /// Weight of a trailing error block of one column per row
    /// (lgga only; the matrix layout is data columns, then error columns).
    #[arg(long, conflicts_with = "block_weights")]
    lambda: Option<f64>,
    /// Comma-separated base weights over equally sized column blocks
    /// (lgga only; the block count must divide the column count).
    #[arg(long, value_delimiter = ',')]
    block_weights: Option<Vec<f64>>,
    /// Per-round decay of the selection threshold.
    #[arg(long, default_value_t = 0.85)]
    decay: f64,
    /// Base weight of coordinates above the threshold.
    #[arg(long, default_value_t = 1e-3)]
    selected_weight: f64,
    /// Reweighting rounds before giving up.
    #[arg(long, default_value_t = 30)]
    max_rounds: usize,
    #[arg(long, value_enum, default_value_t = Route::FirstOrder)]
    solver: Route,
    /// Record per-round thresholds and selections in the report.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// TOML sweep description; see the README for the schema.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the `<label>.csv` result.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// Catalog entry, 1 through 7.
    #[arg(long)]
    figure: u8,
    #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
    scale: ScaleArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Directory for the `fig<N>_<curve>.csv` results.
    #[arg(long)]
    out: PathBuf,
    /// Override the trials per grid point.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the stride through the sparsity axis.
    #[arg(long)]
    step: Option<usize>,
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Decode(args) => run_decode(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Reproduce(args) => run_reproduce(args),
        Command::Selftest => run_selftest(),
    }
}

fn write_report<T: serde::Serialize>(path: &PathBuf, outcome: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), outcome)?;
    Ok(())
}

fn run_decode(args: DecodeArgs) -> Result<()> {
    let entries = read_matrix_csv(&args.matrix)?;
    let (rows, cols) = (entries.nrows(), entries.ncols());
    let matrix = SensingMatrix::from_dense(entries)?;
    let y = read_signal_csv(&args.measurements)?;
    if y.len() != rows {
        bail!(
            "matrix has {rows} rows but the measurement vector has {} entries",
            y.len()
        );
    }
    let greedy = GreedyParams {
        decay: args.decay,
        selected_weight: args.selected_weight,
        max_rounds: args.max_rounds,
        record_trace: args.trace,
        ..GreedyParams::default()
    };
    let solver = SolverParams {
        kind: match args.solver {
            Route::FirstOrder => SolverKind::FirstOrder,
            Route::ReferenceLp => SolverKind::ReferenceLp,
        },
        ..SolverParams::default()
    };
    if args.algorithm != Algorithm::Lgga && (args.lambda.is_some() || args.block_weights.is_some())
    {
        bail!("--lambda and --block-weights only apply to --algorithm lgga");
    }
    let outcome: DecodeOutcome = match args.algorithm {
        Algorithm::Lga => lga_decode(&matrix, &y.view(), &greedy, &solver)?,
        Algorithm::Lgga => {
            let (partition, weights) = match (args.lambda, args.block_weights) {
                (Some(lambda), None) => {
                    if cols <= rows {
                        bail!(
                            "--lambda expects a matrix with a trailing error block: \
                             {cols} columns do not leave room for {rows} error columns"
                        );
                    }
                    let partition = BlockPartition::from_lens(&[
                        (cols - rows, BlockRole::Data),
                        (rows, BlockRole::Error),
                    ])?;
                    (partition, vec![1.0, lambda])
                }
                (None, Some(weights)) => {
                    let partition =
                        BlockPartition::equal_sources(cols, weights.len()).map_err(|_| {
                            anyhow::anyhow!(
                                "{} block weights do not divide {cols} columns evenly",
                                weights.len()
                            )
                        })?;
                    (partition, weights)
                }
                _ => bail!("--algorithm lgga needs either --lambda or --block-weights"),
            };
            lgga_decode(&matrix, &y.view(), &partition, &weights, &greedy, &solver)?
        }
        Algorithm::Algga => {
            let outcome = algga_decode(&matrix, &y.view(), &greedy, &solver)?;
            if let Some(report) = &args.report {
                write_report(report, &outcome)?;
            }
            let final_weight = outcome.states.last().map(|s| s.block2_weight);
            if let Some(weight) = final_weight {
                println!("final adaptive second-block weight {weight:.4}");
            }
            outcome.decode
        }
    };
    if args.algorithm != Algorithm::Algga {
        if let Some(report) = &args.report {
            write_report(report, &outcome)?;
        }
    }
    write_signal_csv(&args.out, &outcome.estimate.view())?;
    let nonzeros = outcome.estimate.iter().filter(|v| **v != 0.0).count();
    println!(
        "decoded {cols} coordinates in {} rounds ({:?}); {nonzeros} nonzero entries -> {}",
        outcome.rounds_completed,
        outcome.termination,
        args.out.display()
    );
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let config = load_sweep_config(&args.config)?;
    let points = config.validated_points()?;
    let curve = sweep_curve(&config.template, &points)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let path = args.out.join(format!("{}.csv", config.label));
    write_sweep_csv(&path, &config.label, &curve)?;
    for point in &curve {
        println!(
            "k={:<4} rate={:.3} ({}/{} ok, mean err {:.2e}, {:.2}s/trial)",
            point.k,
            point.rate,
            point.successes,
            point.trials,
            point.mean_relative_error,
            point.mean_runtime_seconds
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn run_reproduce(args: ReproduceArgs) -> Result<()> {
    let scale = match args.scale {
        ScaleArg::Full => Scale::Full,
        ScaleArg::Desk => Scale::Desk,
    };
    let overrides = FigureOverrides {
        trials: args.trials,
        step: args.step,
    };
    let paths = reproduce_figure_with(args.figure, scale, args.seed, &args.out, &overrides)?;
    for path in &paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_selftest() -> Result<()> {
    let results = selftest::run();
    let mut failures = 0usize;
    for result in &results {
        let tag = if result.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<22} {}", result.name, result.detail);
        failures += usize::from(!result.passed);
    }
    if failures > 0 {
        bail!("{failures} self-test check(s) failed");
    }
    println!("all {} checks passed", results.len());
    Ok(())
}
