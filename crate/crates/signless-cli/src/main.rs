mod args;
mod commands;
mod error;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{expand_config, Cli, Command, Emit};
use commands::Ctx;
use error::CliError;
use output::{write_to, RunManifest};

fn execute(argv: Vec<String>) -> Result<RunManifest, CliError> {
    let argv = expand_config(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            return Err(CliError::Usage(e.to_string()));
        }
    };
    let ctx = Ctx { seed: cli.global.seed, tolerance: cli.global.tolerance };
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Teleport(c) => commands::teleport::run(c, ctx)?,
        Command::Feasibility(c) => commands::feasibility::run(c, ctx)?,
        Command::Chain(c) => commands::chain::run(c, ctx)?,
        Command::Arealaw(c) => commands::arealaw::run(c, ctx)?,
        Command::Twist(c) => commands::twist::run(c, ctx)?,
    };
    let manifest = RunManifest {
        command: argv.into_iter().skip(1).collect(),
        seed: ctx.seed,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s: start.elapsed().as_secs_f64(),
        checks: outcome.checks,
        notes: outcome.notes,
        results: outcome.results,
    };
    let out = cli.global.out.as_deref();
    match cli.global.emit {
        Emit::Csv => {
            write_to(out, &outcome.table.to_csv()?)?;
            for c in &manifest.checks {
                let status = if c.passed { "pass" } else { "FAIL" };
                eprintln!("{status} {} (residual {:e}, tolerance {:e})", c.name, c.residual, c.tolerance);
            }
        }
        Emit::Report => write_to(out, &(serde_json::to_string_pretty(&manifest)? + "\n"))?,
    }
    if let Some(p) = &cli.global.manifest {
        write_to(Some(p), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    }
    Ok(manifest)
}

fn main() -> ExitCode {
    match execute(std::env::args().collect()) {
        Ok(m) if m.all_passed() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
