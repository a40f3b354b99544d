//! Command-line front end for `polysle`: JSON configuration, CSV / binary /
//! SVG output, and a rayon pool for the Monte Carlo ensembles.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 inconclusive,
//! 3 usage or configuration error, 4 runtime error.

pub mod commands;
pub mod config;
pub mod error;
pub mod executor;
pub mod formats;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{Context, VerifyTest};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::executor::PoolExecutor;

#[derive(Debug, Parser)]
#[command(name = "polysle", version, about = "SLE(κ, ρ) as diffusing polygons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for ensembles; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Progress messages on stderr.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the driver and force points.
    Simulate(Common),
    /// Approximate the trace and flow points.
    Trace(Common),
    /// Polygon snapshot at one time.
    Map(Common),
    /// Polygon snapshots at several times.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Comma-separated frame times, overriding the configuration.
        #[arg(long, value_delimiter = ',')]
        frames: Option<Vec<f64>>,
    },
    /// Run one verification test.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        test: TestArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TestArg {
    Martingale,
    Qv,
    HittingFormula,
    HittingMc,
    TheoremRate,
    MetricEquivalence,
    ScOracles,
}

impl From<TestArg> for VerifyTest {
    fn from(t: TestArg) -> VerifyTest {
        match t {
            TestArg::Martingale => VerifyTest::Martingale,
            TestArg::Qv => VerifyTest::Qv,
            TestArg::HittingFormula => VerifyTest::HittingFormula,
            TestArg::HittingMc => VerifyTest::HittingMc,
            TestArg::TheoremRate => VerifyTest::TheoremRate,
            TestArg::MetricEquivalence => VerifyTest::MetricEquivalence,
            TestArg::ScOracles => VerifyTest::ScOracles,
        }
    }
}

fn context(common: &Common, frames: Option<Vec<f64>>) -> Result<Context, CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(frames) = frames {
        cfg.evolve.frames = frames;
    }
    commands::ensure_dir(&common.out)?;
    Ok(Context {
        cfg,
        out: common.out.clone(),
        exec: PoolExecutor::new(common.threads),
        verbose: common.verbose,
    })
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Simulate(c) => commands::simulate(&context(&c, None)?),
        Command::Trace(c) => commands::trace(&context(&c, None)?),
        Command::Map(c) => commands::map(&context(&c, None)?),
        Command::Evolve { common, frames } => commands::evolve(&context(&common, frames)?),
        Command::Verify { common, test } => commands::verify(&context(&common, None)?, test.into()),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
