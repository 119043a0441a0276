use std::process::ExitCode;

use noncomm_lp::driver::{emit_report, execute, parse_config};

fn main() -> ExitCode {
    let run = parse_config(std::env::args_os()).and_then(|config| {
        let report = execute(&config)?;
        emit_report(&report, config.format, config.output.as_deref())?;
        Ok(report.exit_code())
    });
    match run {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nclp: {e}");
            ExitCode::from(2)
        }
    }
}
