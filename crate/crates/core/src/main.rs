use std::process::ExitCode;

use ainfty::cli::{self, Cli, Format};
use clap::Parser;

fn main() -> ExitCode {
    let args = Cli::parse();
    ainfty::parallel::init_from_env();
    let report = cli::run(&args);
    let json = report.json();
    if let Some(path) = &args.opts.report {
        if let Err(e) = std::fs::write(path, &json) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    match args.opts.format {
        Format::Json => print!("{json}"),
        Format::Summary => print!("{}", report.summary()),
    }
    ExitCode::from(report.exit_code() as u8)
}
