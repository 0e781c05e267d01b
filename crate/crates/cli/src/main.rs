use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coevo::config::{recipe, recipes, RunConfig};
use coevo::run::{execute, exit_code};
use coevo::Error;

/// Host-parasite eco-evolutionary analysis.
#[derive(Parser)]
#[command(name = "coevo", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Locate and classify equilibria.
    Equilibria(RunArgs),
    /// Integrate a trajectory.
    Simulate(RunArgs),
    /// Sweep one parameter.
    Sweep1d(RunArgs),
    /// Sweep two parameters.
    Sweep2d(RunArgs),
    /// Equilibria with convergence-stability and ESS verdicts.
    Ess(RunArgs),
    /// Equilibria plus the full condition report.
    Report(RunArgs),
    /// List the built-in recipes, or write them as config files.
    Recipes {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON config or metadata sidecar.
    #[arg(long, conflicts_with = "recipe", required_unless_present = "recipe")]
    config: Option<PathBuf>,
    /// Built-in recipe name.
    #[arg(long)]
    recipe: Option<String>,
    /// Override a config value, e.g. model.eco.d=0.2.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, env = "COEVO_WORKERS", default_value_t = default_workers())]
    workers: usize,
    /// Seed for the sweep spot checks.
    #[arg(long)]
    seed: Option<u64>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn run(command: &str, a: RunArgs) -> Result<String, Error> {
    let mut overrides = vec![format!("command=\"{command}\"")];
    if let Some(s) = a.seed {
        overrides.push(format!("numerics.seed={s}"));
    }
    overrides.extend(a.set);
    let cfg = match (&a.config, &a.recipe) {
        (Some(p), _) => RunConfig::load(p, &overrides)?,
        (None, Some(name)) => RunConfig::from_value(recipe(name)?.to_value(), &overrides)?,
        (None, None) => unreachable!("enforced by clap"),
    };
    Ok(execute(&cfg, &a.out, a.workers)?.summary)
}

fn list_recipes(out: Option<PathBuf>) -> Result<String, Error> {
    let mut s = String::new();
    for r in recipes() {
        s.push_str(&format!("{:<22} {:<10} {}\n", r.name, r.config.command.as_str(), r.description));
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.json", r.name));
            std::fs::write(&path, serde_json::to_string_pretty(&r.config.to_value())? + "\n")?;
        }
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Cmd::Equilibria(a) => run("equilibria", a),
        Cmd::Simulate(a) => run("simulate", a),
        Cmd::Sweep1d(a) => run("sweep1d", a),
        Cmd::Sweep2d(a) => run("sweep2d", a),
        Cmd::Ess(a) => run("ess", a),
        Cmd::Report(a) => run("report", a),
        Cmd::Recipes { out } => list_recipes(out),
    };
    match res {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
