use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use stc::cli::{Cli, Command};
use stc::commands::{emit, run, summary_line, usage_error_report, RunOutput, EXIT_INPUT};

/// `--json` value from raw arguments, for reports about unparsable command lines.
fn raw_json_path(args: &[String]) -> Option<std::path::PathBuf> {
    args.iter().enumerate().find_map(|(i, a)| match a.strip_prefix("--json") {
        Some("") => args.get(i + 1).map(Into::into),
        Some(rest) => rest.strip_prefix('=').map(Into::into),
        None => None,
    })
}

fn main() -> ExitCode {
    let started = Instant::now();
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let out = RunOutput { report: usage_error_report(&e.to_string(), started), csv_rows: None };
            if let Some(path) = raw_json_path(&args) {
                emit(&out, Some(&path), None);
            }
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let out = run(&cli.command, started);
    let (json, csv) = match &cli.command {
        Command::Check(a) => (a.common.json.as_deref(), None),
        Command::Jack(a) => (a.common.json.as_deref(), None),
        Command::Identity(a) => (a.common.json.as_deref(), None),
        Command::Sweep(a) => (a.check.common.json.as_deref(), a.csv.as_deref()),
    };
    eprintln!("{}", summary_line(&out.report));
    ExitCode::from(emit(&out, json, csv) as u8)
}
