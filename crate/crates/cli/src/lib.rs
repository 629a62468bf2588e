//! Library half of the `levy-fpe` binary, split out so the integration tests can drive it.

pub mod config;
pub mod plot;
pub mod run;

pub use config::{parse_config, Cli, Command, CommandArgs, ConfigError, RunConfig};
pub use run::{run, RunOutput};

/// Exit status for an invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a failed run.
pub const EXIT_RUN: i32 = 1;

/// Parses, runs, and reports; returns the process exit status.
pub fn main_with(cli: Cli) -> i32 {
    let (command, args) = match cli.command {
        CommandArgs::Solve(a) => (Command::Solve, a),
        CommandArgs::Sweep(a) => (Command::Sweep, a),
        CommandArgs::Bifurcate(a) => (Command::Bifurcate, a),
        CommandArgs::McCheck(a) => (Command::McCheck, a),
    };
    let cfg = match parse_config(command, &args) {
        Ok(c) => c,
        Err(e) => {
            let body = serde_json::json!({
                "error": { "kind": "invalid_config", "field": e.field, "message": e.message }
            });
            eprintln!("{body}");
            return EXIT_CONFIG;
        }
    };
    match run(&cfg) {
        Ok(out) => {
            for f in &out.failures {
                eprintln!("{}", serde_json::json!({ "point_failed": f }));
            }
            for path in &out.files {
                println!("{}", path.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", run::error_json(&(&e).into()));
            EXIT_RUN
        }
    }
}
