//! `stratawave`: dispersion tables, bifurcation branches and flow fields for
//! two-layer rotational interfacial waves.

mod commands;
mod config;
mod output;
mod plot;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{InvalidConfig, Method, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "stratawave", version, about = "Two-layer interfacial waves with constant vorticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Bifurcation points for k = 1..K as JSON lines.
    Dispersion,
    /// Second-order expansion coefficients of one branch.
    Expand,
    /// Trace a branch up to --s-max in steps of --ds.
    Branch,
    /// Stream function on both layers at amplitude --s.
    Field {
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Stagnation points, critical curves and streamlines at amplitude --s.
    Flow,
    /// Run the acceptance checks.
    Verify,
    /// SVG picture of the lower-layer flow at amplitude --s.
    Plot,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("STRATAWAVE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| InvalidConfig(format!("STRATAWAVE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: &Cli, cfg: &mut Option<RunConfig>) -> anyhow::Result<()> {
    configure_threads()?;
    let mut c = RunConfig::resolve(&cli.flags)?;
    if let Command::Field { method: Some(m) } = &cli.command {
        c.method = *m;
    }
    *cfg = Some(c.clone());
    match &cli.command {
        Command::Dispersion => commands::dispersion(&c),
        Command::Expand => commands::expand(&c),
        Command::Branch => commands::branch(&c),
        Command::Field { .. } => commands::field(&c),
        Command::Flow => commands::flow(&c),
        Command::Verify => commands::verify(&c),
        Command::Plot => commands::plot(&c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = None;
    let Err(err) = run(&cli, &mut cfg) else {
        return ExitCode::SUCCESS;
    };
    let numerical = match err.downcast_ref::<stratawave_core::Error>() {
        Some(e) => e.is_numerical(),
        None => err.is::<commands::AcceptanceFailed>(),
    };
    if numerical {
        let diag = commands::diagnostic(&err, cfg.as_ref());
        eprintln!("{}", serde_json::to_string_pretty(&diag).unwrap_or_else(|_| diag.to_string()));
        return ExitCode::from(3);
    }
    eprintln!("error: {err:#}");
    let usage = err.is::<InvalidConfig>() || err.downcast_ref::<stratawave_core::Error>().is_some();
    ExitCode::from(if usage { 2 } else { 1 })
}
