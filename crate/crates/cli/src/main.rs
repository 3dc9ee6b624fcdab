//! `pbda`: data generation, training, bounds, model selection and
//! verification suites from the command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure, 3 verification failure.

mod common;
mod gen;
mod learn;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use common::CliResult;

#[derive(Debug, Parser)]
#[command(name = "pbda", version, about = "PAC-Bayesian domain adaptation for linear classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write source, target and test samples of the rotated two-moons problem.
    GenMoons(gen::GenMoonsArgs),
    /// Train PBGD3, PBDA or multisource PBDA and write the model.
    Train(learn::TrainArgs),
    /// Label a sample with a trained model.
    Predict(learn::PredictArgs),
    /// Evaluate a named PAC-Bayes bound.
    Bound(report::BoundArgs),
    /// Reverse-validation risk of one hyperparameter setting.
    ReverseCv(learn::ReverseCvArgs),
    /// Select hyperparameters over a grid by cv, rcv or their mean.
    GridSearch(learn::GridSearchArgs),
    /// Run the property suites.
    Verify(report::VerifyArgs),
    /// Rotated-moons benchmark: both learners over angles and repeats.
    MoonsBenchmark(report::BenchmarkArgs),
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::GenMoons(a) => gen::gen_moons_cmd(a)?,
        Command::Train(a) => learn::train(a)?,
        Command::Predict(a) => learn::predict(a)?,
        Command::Bound(a) => report::bound(a)?,
        Command::ReverseCv(a) => learn::reverse_cv(a)?,
        Command::GridSearch(a) => learn::grid(a)?,
        Command::Verify(a) => return Ok(if report::verify(a)? { 0 } else { 3 }),
        Command::MoonsBenchmark(a) => report::benchmark(a)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
