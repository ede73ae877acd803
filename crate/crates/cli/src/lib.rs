//! Command-line front end for `seqmon-core`.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use clap::Parser;

use args::{Cli, Command};
use commands::{EXIT_DOMAIN, EXIT_USAGE};

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn dispatch(cli: &Cli) -> seqmon_core::Result<(report::Report, i32)> {
    let ok = |r| Ok((r, 0));
    match &cli.command {
        Command::Design(a) => ok(commands::design(&a.design, &a.formula.formula)?),
        Command::Reestimate(a) => ok(commands::reestimate(a)?),
        Command::Boundary(a) => ok(commands::boundary(a)?),
        Command::Interim(a) => commands::interim(a),
        Command::Simulate(a) => ok(commands::simulate(a, cli.seed, cli.reps)?),
        Command::Optimize(a) => ok(commands::optimize(a, cli.seed)?),
        Command::Counterfactuals => ok(commands::counterfactuals()?),
    }
}

pub fn run(argv: Vec<String>) -> Execution {
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            return Execution {
                code: EXIT_USAGE,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), text)
            } else {
                (text, String::new())
            };
            return Execution {
                code,
                stdout,
                stderr,
            };
        }
    };
    let result = match cli.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => {
                return Execution {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: format!("error: cannot start {n} workers: {e}\n"),
                }
            }
        },
        None => dispatch(&cli),
    };
    match result {
        Ok((report, code)) => Execution {
            code,
            stdout: report.render(cli.machine),
            stderr: String::new(),
        },
        Err(e) => Execution {
            code: EXIT_DOMAIN,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
