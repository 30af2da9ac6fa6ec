//! The `distillery` command line. [`run`] parses arguments, executes one
//! command and returns the process exit code: 0 on success, 1 when an
//! asserted verification check fails, 2 on usage errors.

pub mod args;
pub mod chart;
pub mod commands;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;

use args::{Cli, Command, OutputArgs};
use commands::{CliError, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn output_of(command: &Command) -> &OutputArgs {
    match command {
        Command::Bounds(a) => &a.output,
        Command::Crossover(a) => &a.output,
        Command::Verify(a) => &a.output,
        Command::Optimize(a) => &a.output,
        Command::Simulate(a) => &a.output,
        Command::Resources(a) => &a.output,
    }
}

fn execute(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Bounds(a) => commands::bounds(a),
        Command::Crossover(a) => commands::crossover(a),
        Command::Verify(a) => commands::verify(a),
        Command::Optimize(a) => commands::optimize(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Resources(a) => commands::resources(a),
    }
}

fn emit(report: &Report, command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &output_of(command).out {
        Some(path) => std::fs::write(path, &report.body)?,
        None => stdout.write_all(report.body.as_bytes())?,
    }
    if let (Command::Bounds(a), Some(svg)) = (command, &report.chart) {
        let path: &Path = a.chart.as_deref().expect("chart requested");
        std::fs::write(path, svg)?;
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ =
                if code == 0 { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let result = execute(&cli.command).and_then(|report| emit(&report, &cli.command, stdout).map(|_| report.passed));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            let _ = writeln!(stderr, "error: an asserted check failed");
            EXIT_CHECK_FAILED
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
