use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use flowsieve::flowdata::SyntheticSpec;
use flowsieve::selectors::BinStrategy;
use flowsieve::trees::Family;
use flowsieve_cli::{cmd_benchmark, cmd_report, cmd_select, cmd_synth, CliResult, PartialConfig};

/// Rank network-flow features and benchmark tree ensembles on the top-k set.
#[derive(Debug, Parser)]
#[command(name = "flowsieve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset with planted informative features.
    Synth(SynthArgs),
    /// Score, normalize and combine features; write the ranking and top-k set.
    Select(RunArgs),
    /// Select, then compare models trained on all features and on the top-k set.
    Benchmark(BenchArgs),
    /// Re-render the table stored in a report.json.
    Report {
        /// Path to a report.json written by `select` or `benchmark`.
        report: PathBuf,
    },
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    informative: usize,
    #[arg(long)]
    noise: usize,
    /// Fraction of malicious rows.
    #[arg(long, default_value_t = 0.5)]
    balance: f64,
    /// Mean shift of informative features on malicious rows, in standard deviations.
    #[arg(long, default_value_t = 4.0)]
    separation: f64,
    /// Seed for class assignment, informative positions and draws.
    #[arg(long)]
    seed: u64,
    /// Output file.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Dataset file (comma- or tab-delimited, header row).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Built-in adapter id (bot-iot, iot-23, ton-iot, custom) or an adapter TOML file.
    #[arg(long)]
    adapter: Option<String>,
    /// Number of top features to keep.
    #[arg(long, short)]
    k: Option<usize>,
    /// Bins for continuous features in information gain and chi-squared.
    #[arg(long)]
    bins: Option<usize>,
    /// equal-frequency or equal-width.
    #[arg(long)]
    disc_strategy: Option<BinStrategy>,
    /// Features with at most this many distinct values are not binned.
    #[arg(long)]
    continuous_threshold: Option<usize>,
    /// Trees in the forest refit by recursive feature elimination.
    #[arg(long)]
    rfe_estimators: Option<usize>,
    /// Seed for RFE, the benchmark split and model fits (required).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// TOML file with any of the above; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Skip the grid search and use each family's default configuration.
    #[arg(long)]
    no_grid: bool,
    /// Timed fits per benchmark row.
    #[arg(long)]
    repeats: Option<usize>,
    /// Held-out fraction for the benchmark split.
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Stratified folds used by the grid search.
    #[arg(long)]
    cv_folds: Option<usize>,
    /// Comma-separated model families.
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<Family>>,
}

impl RunArgs {
    fn layer(&self) -> CliResult<PartialConfig> {
        let flags = PartialConfig {
            dataset: self.data.clone(),
            adapter: self.adapter.clone(),
            bins: self.bins,
            disc_strategy: self.disc_strategy,
            continuous_threshold: self.continuous_threshold,
            k: self.k,
            rfe_estimators: self.rfe_estimators,
            seed: self.seed,
            output_dir: self.out.clone(),
            ..Default::default()
        };
        let file = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        Ok(flags.or(file))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth(a) => {
            let spec = SyntheticSpec {
                separation: a.separation,
                ..SyntheticSpec::new(a.rows, a.informative, a.noise, a.balance, a.seed)
            };
            let path = cmd_synth(&spec, &a.out)?;
            println!("wrote {}", path.display());
        }
        Command::Select(a) => {
            let cfg = a.layer()?.resolve()?;
            let report = cmd_select(&cfg)?;
            print!("{}", report.ranking.to_csv());
            println!("top {}: {}", cfg.k, report.feature_set.names.join(", "));
        }
        Command::Benchmark(a) => {
            let flags = PartialConfig {
                grid: a.no_grid.then_some(false),
                repeats: a.repeats,
                test_fraction: a.test_fraction,
                cv_folds: a.cv_folds,
                families: a.families.clone(),
                ..Default::default()
            };
            let cfg = flags.or(a.run.layer()?).resolve()?;
            let report = cmd_benchmark(&cfg)?;
            print!("{}", report.render_benchmark()?);
        }
        Command::Report { report } => print!("{}", cmd_report(&report)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
