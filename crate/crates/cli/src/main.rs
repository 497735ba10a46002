//! `sniffy`: desk-scale laboratory for gas-seeking swarm controllers.
//!
//! Every command is deterministic given its flags and one root seed. The
//! root seed comes from `--seed`, then the `SNIFFY_SEED` environment
//! variable, then 0, and is logged in the header of every output file.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;
mod config;
mod util;

use clap::{Parser, Subcommand};

use util::usage;

#[derive(Parser, Debug)]
#[command(
    name = "sniffy",
    version,
    about = "Gas-seeking swarm laboratory: generate environments, evolve controllers, evaluate policies, replay episodes",
    after_help = "Exit codes: 0 success, 1 usage error, 2 data error.\n\
                  SNIFFY_SEED provides the root seed when --seed is not given."
)]
struct Cli {
    /// Worker threads for parallel sections (default: available cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate environment bundles (floor plan, airflow, gas record).
    GenEnv(commands::gen_env::GenEnvArgs),
    /// Evolve controller parameters over a set of bundles.
    Evolve(commands::evolve::EvolveArgs),
    /// Evaluate a policy over bundles with repeated episode seeds.
    Eval(commands::eval::EvalArgs),
    /// Re-run one episode and render it to SVG.
    Replay(commands::replay::ReplayArgs),
}

fn run(cli: &Cli) -> util::Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        // First initialization wins; a failure here only means a pool
        // already exists, which cannot happen before the dispatch below.
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("cannot configure worker pool: {e}")))?;
    }
    match &cli.command {
        Command::GenEnv(args) => commands::gen_env::run(args),
        Command::Evolve(args) => commands::evolve::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Replay(args) => commands::replay::run(args),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print to stdout and succeed; anything else
            // is a usage error.
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
