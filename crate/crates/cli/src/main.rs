use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use predvar_core::ErrorKind;

mod args;
mod commands;

use args::Cli;

/// Failure of a command: the class decides the exit status.
#[derive(Debug)]
pub struct Failure {
    pub kind: ErrorKind,
    pub code: &'static str,
    pub message: String,
}

impl From<predvar_core::Error> for Failure {
    fn from(e: predvar_core::Error) -> Self {
        Failure {
            kind: e.kind(),
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            kind: ErrorKind::Usage,
            code: "usage",
            message: message.into(),
        }
    }

    fn report(&self) -> ExitCode {
        let body = json!({
            "error": {
                "kind": self.kind.as_str(),
                "code": self.code,
                "message": self.message,
            }
        });
        eprintln!("{body}");
        ExitCode::from(self.kind.exit_code() as u8)
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("PREDVAR_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::usage(format!(
            "PREDVAR_THREADS must be a non-negative integer, got `{raw}`"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            return Failure {
                kind: ErrorKind::Usage,
                code: "usage",
                message: message.trim_end().to_string(),
            }
            .report();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match init_threads().and_then(|()| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
