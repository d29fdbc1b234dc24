use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod config;
mod error;
mod report;

use error::CliError;
use report::{write_atomic, Format, Report};

/// Desk-scale experiments on Tsirelson-type spaces, Haar subsystems and
/// greedy-type bases.
#[derive(Parser, Debug)]
#[command(name = "tsg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct Common {
    /// `key = value` file mirroring the long flags; explicit flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Seed of the ChaCha8 generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format; per-row tables default to csv, summaries to json.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Norm of one vector.
    Norm(commands::NormArgs),
    /// Fundamental function table.
    Fundfn(commands::IndicatorArgs),
    /// Democracy constant of indicator sums.
    Democracy(commands::IndicatorArgs),
    /// Quasi-greedy, almost greedy and greedy gaps per m.
    GreedyConsts(commands::GreedyArgs),
    /// Conditionality parameters per m.
    CondParams(commands::CondArgs),
    /// Growth of the weighted Dirichlet kernel.
    Dirichlet(commands::DirichletArgs),
    /// Alternating DKK composite with diagnostics.
    DkkBuild(commands::DkkArgs),
    /// Spread Haar subsystem against its equivalence constants.
    HaarSpread(commands::SpreadArgs),
    /// Tables of the continuum family of growth functions.
    Continuum(commands::ContinuumArgs),
    /// Odd/even split of Tsirelson's space.
    SquareSplit(commands::SquareArgs),
    /// Convexified Tsirelson space against its block sum.
    IsoRatio(commands::IsoArgs),
    /// Dynamic program against brute force.
    OracleCheck(commands::OracleArgs),
}

fn dispatch(command: Command) -> Result<(Report, Format, Common, Option<String>), CliError> {
    use Command::*;
    let (report, default, common, stdout) = match command {
        Norm(a) => {
            let (r, line) = commands::norm(&a)?;
            (r, Format::Json, a.common, Some(line))
        }
        Fundfn(a) => (commands::fundfn(&a)?, Format::Csv, a.common, None),
        Democracy(a) => (commands::democracy(&a)?, Format::Json, a.common, None),
        GreedyConsts(a) => (commands::greedy_consts(&a)?, Format::Csv, a.common, None),
        CondParams(a) => (commands::cond_params(&a)?, Format::Csv, a.common, None),
        Dirichlet(a) => (commands::dirichlet(&a)?, Format::Json, a.common, None),
        DkkBuild(a) => (commands::dkk_build(&a)?, Format::Json, a.common, None),
        HaarSpread(a) => (commands::haar_spread(&a)?, Format::Json, a.common, None),
        Continuum(a) => (commands::continuum(&a)?, Format::Csv, a.common, None),
        SquareSplit(a) => (commands::square_split(&a)?, Format::Json, a.common, None),
        IsoRatio(a) => (commands::iso_ratio(&a)?, Format::Json, a.common, None),
        OracleCheck(a) => (commands::oracle_check(&a)?, Format::Json, a.common, None),
    };
    Ok((report, default, common, stdout))
}

fn run() -> Result<bool, CliError> {
    let argv = config::merge_config(std::env::args_os().collect())?;
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    let (report, default, common, line) = dispatch(cli.command)?;
    let text = report.render(common.format.unwrap_or(default))?;
    match (&common.out, line) {
        (Some(path), line) => {
            write_atomic(path, &text)?;
            if let Some(l) = line {
                println!("{l}");
            }
        }
        (None, Some(l)) => println!("{l}"),
        (None, None) => print!("{text}"),
    }
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    Ok(report.holds)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("tsg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
