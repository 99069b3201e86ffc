use clap::{Parser, Subcommand};
use fracbubble_cli::commands::{self, Outcome, VerifySuite};
use fracbubble_cli::config::{RunConfig, UsageError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracbubble", version, about = "Concentrating nodal solutions of the fractional Lane-Emden problem, computed and verified")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config field, e.g. --set order=0.1 (value parsed as JSON).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (same as --set output_dir=DIR).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Bubble constants with calibration and Sobolev cross-checks.
    Constants,
    /// Green and Robin function checks and a Robin profile.
    Green,
    /// Minimizers of the concentration functions.
    FindConcentration,
    /// Run verification suites.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: VerifySuite,
    },
    /// Optimize, solve for the correction and assemble the nodal solution.
    Solve,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let mut overrides = cli.overrides;
    if let Some(out) = cli.out {
        overrides.push(format!("output_dir={}", serde_json::to_string(&out)?));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Constants => commands::constants(&cfg),
        Command::Green => commands::green(&cfg),
        Command::FindConcentration => commands::find_concentration(&cfg),
        Command::Verify { suite } => commands::verify(&cfg, suite),
        Command::Solve => commands::solve(&cfg),
    }
}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<UsageError>().is_some()
            || e.downcast_ref::<fracbubble_core::error::Error>().is_some_and(|c| c.is_user_error())
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(o) => {
            println!("{}", o.summary);
            ExitCode::from(if o.pass { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 1 } else { 2 })
        }
    }
}
