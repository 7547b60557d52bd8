use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lerpa::experiments::config::{parse_grid, parse_switch, Rates};
use lerpa::experiments::selftest::{run_selftest, selftest_csv, SelftestOptions};
use lerpa::experiments::{self, Experiment, ExperimentConfig, Overrides, Report, Smoothing};

#[derive(Parser)]
#[command(name = "lerpa", version, about = "Lerpa agents and seeded experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One TD agent against three random agents.
    Learn(RunArgs),
    /// A TD agent with no forced early play: fold rate over time.
    Coward(RunArgs),
    /// Four rate combinations compete; ranked by chips.
    Tune(RunArgs),
    /// Returns of a TD agent among random agents vs four TD agents.
    Mas(RunArgs),
    /// Stage-one decisions over repeats of a fixed deal.
    Adapt(RunArgs),
    /// Repeat a fixed deal until play and payouts stop changing.
    Solve(RunArgs),
    /// Look for bluffs in repeats of a fixed deal.
    Bluff(RunArgs),
    /// Print the observation bit layout.
    Layout,
    /// Run the built-in consistency checks.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F64,
    F32,
}

#[derive(Args)]
struct RunArgs {
    /// Hands per session, or repeats of a fixed deal.
    #[arg(long)]
    hands: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Hands of forced knocking at the start of each TD agent's life.
    #[arg(long)]
    courage: Option<u64>,
    /// Smoothing block; final-hands window for mas; equilibrium window for solve.
    #[arg(long)]
    window: Option<usize>,
    /// Fixed deal file for adapt, solve and bluff.
    #[arg(long)]
    predealt: Option<PathBuf>,
    /// Bluff re-entry window.
    #[arg(long)]
    k: Option<usize>,
    /// Primary CSV output; other outputs go next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value settings; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_name = "on|off", value_parser = switch)]
    fold_update: Option<bool>,
    #[arg(long, value_name = "block|sliding", value_parser = smoothing)]
    smoothing: Option<Smoothing>,
    /// Self-play hands before a fixed-deal experiment.
    #[arg(long)]
    warmup: Option<usize>,
    /// Rate combinations for tune: alpha:lambda:epsilon,...
    #[arg(long, value_parser = grid)]
    grid: Option<Vec<Rates>>,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fewer cases per check.
    #[arg(long)]
    quick: bool,
    /// Negative control: perturb the analytic gradient.
    #[arg(long, hide = true)]
    corrupt_gradient: bool,
}

fn switch(s: &str) -> Result<bool, String> {
    parse_switch(s).map_err(|e| e.to_string())
}

fn smoothing(s: &str) -> Result<Smoothing, String> {
    s.parse().map_err(|e: lerpa::Error| e.to_string())
}

fn grid(s: &str) -> Result<Vec<Rates>, String> {
    parse_grid(s).map_err(|e| e.to_string())
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            hands: self.hands,
            seed: self.seed,
            alpha: self.alpha,
            lambda: self.lambda,
            epsilon: self.epsilon,
            courage: self.courage,
            window: self.window,
            predealt: self.predealt.clone(),
            k: self.k,
            out: self.out.clone(),
            fold_update: self.fold_update,
            smoothing: self.smoothing,
            warmup: self.warmup,
            grid: self.grid.clone(),
        }
    }

    fn config(&self, experiment: Experiment) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => Overrides::from_path(path)?,
            None => Overrides::default(),
        };
        Ok(ExperimentConfig::resolve(experiment, base.layered(self.overrides()))?)
    }
}

/// `results.csv` + `log` -> `results.log.csv`
fn sibling(out: &Path, name: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{name}.csv"))
}

fn write_report(report: &Report, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            for (i, a) in report.artifacts.iter().enumerate() {
                let target = if i == 0 { path.to_path_buf() } else { sibling(path, a.name) };
                std::fs::write(&target, &a.csv).with_context(|| format!("writing {}", target.display()))?;
                log::info!("wrote {} to {}", a.name, target.display());
            }
        }
        None => {
            let primary = report.artifacts.first().context("experiment produced no output")?;
            std::io::stdout().write_all(primary.csv.as_bytes())?;
        }
    }
    for line in &report.summary {
        eprintln!("{line}");
    }
    Ok(())
}

fn experiment(args: &RunArgs, which: Experiment) -> Result<ExitCode> {
    let cfg = args.config(which)?;
    log::info!("running {} with seed {}", which.name(), cfg.seed);
    let report = match args.precision {
        Precision::F64 => experiments::run::<f64>(&cfg)?,
        Precision::F32 => experiments::run::<f32>(&cfg)?,
    };
    write_report(&report, cfg.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn selftest(args: &SelftestArgs) -> Result<ExitCode> {
    let mut opts = SelftestOptions {
        seed: args.seed,
        corrupt_gradient: args.corrupt_gradient,
        ..Default::default()
    };
    if args.quick {
        opts.gradient_pairs = 10;
        opts.trace_episodes = 10;
        opts.legality_positions = 1_000;
        opts.ledger_hands = 1_000;
        opts.encoding_states = 100;
    }
    let results = run_selftest(&opts);
    let csv = selftest_csv(&results)?;
    match &args.out {
        Some(path) => std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        eprintln!("all {} checks passed", results.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failed: {}", failed.join(", "));
        Ok(ExitCode::FAILURE)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Learn(a) => experiment(a, Experiment::Learn),
        Command::Coward(a) => experiment(a, Experiment::Coward),
        Command::Tune(a) => experiment(a, Experiment::Tune),
        Command::Mas(a) => experiment(a, Experiment::Mas),
        Command::Adapt(a) => experiment(a, Experiment::Adapt),
        Command::Solve(a) => experiment(a, Experiment::Solve),
        Command::Bluff(a) => experiment(a, Experiment::Bluff),
        Command::Layout => {
            print!("{}", lerpa::encoder::layout_table());
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest(a) => selftest(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
