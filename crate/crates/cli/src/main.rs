// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;

use crate::commands::CliError;

fn real_main() -> Result<(), CliError> {
    let matches = match config::cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if help {
                Ok(())
            } else {
                Err(CliError::Config("invalid arguments".into()))
            };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let file = match sub.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            Some(config::parse_config_file(&text).map_err(|e| CliError::Config(format!("{path}: {e}")))?)
        }
        None => None,
    };
    let cfg = config::resolve(name, sub, file.as_ref())?;
    commands::run(&cfg)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Config(ref m) if m == "invalid arguments") {
                eprintln!("diffmix: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
