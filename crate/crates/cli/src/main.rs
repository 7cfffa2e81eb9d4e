//! `degreelab`: command-line front end. Every output starts with `#`
//! provenance lines (version, build id, and the configuration as JSON), so
//! `--replay FILE` reproduces the body of `FILE`.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, RunConfig};

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            return fail(2, "--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            return fail(1, &e.to_string());
        }
    }
    let config = match (&cli.replay, cli.command) {
        (Some(path), None) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return fail(2, &format!("{}: {e}", path.display())),
            };
            match output::read_config(&text) {
                Some(c) => c,
                None => return fail(2, &format!("{}: no echoed configuration found", path.display())),
            }
        }
        (None, Some(command)) => RunConfig { seed: cli.seed, format: cli.format, timing: cli.timing, command },
        (Some(_), Some(_)) => return fail(2, "--replay cannot be combined with a subcommand"),
        (None, None) => {
            let _ = Cli::command().print_help();
            return ExitCode::from(2);
        }
    };
    let report = match commands::run(&config.command, config.seed, config.timing) {
        Ok(r) => r,
        Err(e) => return fail(e.exit_code() as u8, &e.to_string()),
    };
    let text = report.render(&config);
    let written = match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(1, &e),
    }
}
