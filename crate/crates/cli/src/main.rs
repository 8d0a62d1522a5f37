use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use seplind_cli::config::RunConfig;
use seplind_cli::{check, output, runner};

/// Simulator for bipartite open quantum systems: evolves states under the
/// ordinary Lindblad equation and under its separability-restricted variant,
/// and quantifies dynamical entanglement as the deviation between the two.
#[derive(Parser)]
#[command(name = "seplind", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run described by a TOML config file.
    Run(RunArgs),
    /// Emit closed-form oracle curves for a built-in scenario.
    Oracle(OracleArgs),
    /// Run the built-in invariant suite.
    Check,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the run configuration.
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for trajectory dispatch (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Scenario name: bell_decay or swap_exchange.
    scenario: String,
    /// Exchange rate (swap_exchange only).
    #[arg(long)]
    gamma: Option<f64>,
    /// Cascade rates as four comma-separated values (bell_decay only):
    /// 11->phi+, phi+->00, 11->phi-, phi->00.
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    /// Time horizon.
    #[arg(long, default_value_t = 2.0)]
    t_max: f64,
    /// Grid spacing.
    #[arg(long, default_value_t = 0.05)]
    tau: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run_command(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run(args) => {
            let text = fs::read_to_string(&args.config)
                .with_context(|| format!("reading {}", args.config.display()))?;
            let mut config = RunConfig::from_toml_str(&text)?;
            if let Some(seed) = args.seed {
                config.evolution.seed = seed;
            }
            if let Some(out) = &args.out {
                config.out_dir = out.display().to_string();
            }
            let workers = args
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

            let result = runner::execute(&config, workers)?;
            let out_dir = PathBuf::from(&config.out_dir);
            let written = output::write_run(&out_dir, &config, &result)?;
            for path in &written {
                println!("wrote {}", path.display());
            }
            if let Some(detected) = result.entanglement_detected {
                println!(
                    "dynamical entanglement detected: {}",
                    if detected { "yes" } else { "no" }
                );
            }
            if let Some(set) = result.abort_breach() {
                eprintln!(
                    "error: engine {} aborted {:.2}% of trajectories (limit {:.0}%); \
                     results written but the run is not trustworthy",
                    set.name,
                    100.0 * set.abort_fraction(),
                    100.0 * runner::ABORT_FRACTION_LIMIT,
                );
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle(args) => {
            let config_text = oracle_config(&args)?;
            let config = RunConfig::from_toml_str(&config_text)?;
            let result = runner::execute(&config, 1)?;
            let written = output::write_run(&args.out, &config, &result)?;
            for path in &written {
                println!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check => {
            let failures = check::run_all();
            if failures == 0 {
                println!("all checks passed");
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{failures} check(s) failed");
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

/// Assemble a minimal oracles-only config from CLI flags.
fn oracle_config(args: &OracleArgs) -> Result<String> {
    let mut text = String::new();
    text.push_str("[scenario]\n");
    match args.scenario.as_str() {
        "bell_decay" => {
            text.push_str("name = \"bell_decay\"\n");
            if let Some(rates) = &args.rates {
                anyhow::ensure!(
                    rates.len() == 4,
                    "--rates expects four comma-separated values"
                );
                text.push_str("[scenario.rates]\n");
                text.push_str(&format!("gamma_11_to_phi_plus = {}\n", rates[0]));
                text.push_str(&format!("gamma_phi_plus_to_00 = {}\n", rates[1]));
                text.push_str(&format!("gamma_11_to_phi_minus = {}\n", rates[2]));
                text.push_str(&format!("gamma_phi_minus_to_00 = {}\n", rates[3]));
            }
        }
        "swap_exchange" => {
            text.push_str("name = \"swap_exchange\"\n");
            if let Some(gamma) = args.gamma {
                text.push_str(&format!("[scenario.rates]\ngamma = {gamma}\n"));
            }
        }
        other => anyhow::bail!("no oracle for scenario {other:?}"),
    }
    text.push_str(&format!(
        "[evolution]\nt_max = {}\ntau = {}\n[run]\nengines = [\"oracles\"]\n",
        args.t_max, args.tau
    ));
    Ok(text)
}
