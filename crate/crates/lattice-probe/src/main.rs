use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lattice_probe::commands::{self, Run};
use lattice_probe::config::{required, Options};
use lattice_probe::CliResult;

/// Concept lattices from probabilistic formal contexts.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand)]
enum Command {
    /// Pool, normalize and binarize a triadic tensor.
    BuildContext,
    /// Enumerate concepts and export the lattice as DOT.
    Lattice,
    /// Score a pooled or binary context against a gold context.
    Eval,
    /// Sample a corpus from a context, learn it back and measure convergence.
    Synth,
    /// Generate (object, attribute) pairs by Gibbs sampling a provider.
    Gibbs,
}

fn run(cli: Cli) -> CliResult<()> {
    let options = match &cli.config {
        Some(path) => cli.options.over(Options::from_file(path)?),
        None => cli.options,
    };
    let Run {
        config,
        outputs,
        summary,
    } = match cli.command {
        Command::BuildContext => commands::build_context(options)?,
        Command::Lattice => commands::lattice(options)?,
        Command::Eval => commands::eval(options)?,
        Command::Synth => commands::synth(options)?,
        Command::Gibbs => commands::gibbs(options)?,
    };
    let dir = required(&config.options.out, "out")?;
    for path in outputs.commit(dir)? {
        log::info!("wrote {}", path.display());
    }
    println!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
