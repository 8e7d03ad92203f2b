mod args;
mod commands;
mod config;
mod error;
mod output;
mod parse;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::Inputs;
use error::{invalid, CliError};
use output::{render, Clock, Destination, RunManifest};

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(raw: Vec<std::ffi::OsString>) -> Result<(), CliError> {
    let argv = config::merge(raw)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            // clap renders its own usage text
            eprint!("{}", e.render().ansi());
            return Err(CliError::Usage("invalid invocation".into()));
        }
    };
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(invalid("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| invalid(format!("cannot configure threads: {e}")))?;
    }

    let clock = Clock::start();
    let mut inputs = Inputs::default();
    let report = commands::run(&cli.command, &mut inputs)?;
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        parameters: cli.command.parameters(),
        version: statmean_core::VERSION.to_string(),
        seeds: report.seeds.clone(),
        threads: rayon::current_num_threads(),
        inputs: inputs.0,
        timing: clock.timing(),
    };
    let dest = Destination::new(cli.global.out.as_deref(), cli.global.format);
    let format = dest.format.unwrap_or(report.default_format);
    output::emit(&render(&report, &manifest, format)?, &dest)
}
