use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pressgame::commands::{
    cmd_equilibria, cmd_integrate, cmd_lln, cmd_plan, cmd_simulate, cmd_validate, load, verdict_outcome,
};
use pressgame::parallel::PoolExecutor;
use pressgame::{CliError, Scenario};

#[derive(Parser)]
#[command(name = "pressgame", version, about = "Simulate and analyse pressure-resistance games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact stochastic simulation of the finite-population chain.
    Simulate(RunArgs),
    /// Integrate the deterministic kinetic equation.
    Integrate(RunArgs),
    /// Rest points and approximate Nash equilibria.
    Equilibria(RunArgs),
    /// Principal's value and policy tables by dynamic programming.
    Plan(RunArgs),
    /// Convergence-rate experiment against the deterministic limit.
    Lln(RunArgs),
    /// Check a scenario file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides experiment.master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

fn setup(args: &RunArgs) -> Result<(Scenario, PoolExecutor), CliError> {
    Ok((load(&args.config, args.seed)?, PoolExecutor::new(args.threads)?))
}

fn run(command: Command) -> Result<String, CliError> {
    match command {
        Command::Validate { config } => cmd_validate(&config),
        Command::Simulate(a) => {
            let (s, exec) = setup(&a)?;
            cmd_simulate(&s, &a.out, &exec)
        }
        Command::Integrate(a) => cmd_integrate(&setup(&a)?.0, &a.out),
        Command::Equilibria(a) => cmd_equilibria(&setup(&a)?.0, &a.out),
        Command::Plan(a) => cmd_plan(&setup(&a)?.0, &a.out),
        Command::Lln(a) => {
            let (s, exec) = setup(&a)?;
            verdict_outcome(&cmd_lln(&s, &a.out, &exec)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
