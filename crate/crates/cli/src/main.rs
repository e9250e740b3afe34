mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_override, parse_pairs, ExperimentConfig};
use error::CliError;

/// Environment variable holding the number of worker threads.
const WORKERS_ENV: &str = "QPROBE_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "qprobe", version, about = "Frequency-estimation precision of qubit probes in bosonic baths")]
struct Cli {
    /// Configuration file with one `key = value` per line.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key (repeatable), e.g. `--set omega0=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output CSV path; stdout when omitted. Takes precedence over `output`
    /// in the configuration.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Also write a matplotlib script next to the CSV.
    #[arg(long, global = true)]
    plot: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Memory integrals Γ(0, t), Γ(±ω₀, t) and the Ohmic rate γ(t).
    Gamma,
    /// Transfer matrices and their ω₀-derivatives along the time grid.
    Map,
    /// Single-probe QFI: full dynamics, secular counterpart, frozen rates.
    QfiSingle,
    /// Channel-extension bound F↑ versus t for `n` probes.
    Bound,
    /// GHZ parity error versus t for `n` probes.
    Parity,
    /// Time-optimized bound and parity errors over N and fitted exponents.
    Scaling,
    /// Evaluate structural invariants on the configured dynamics.
    Check,
    /// Print the effective configuration.
    Config,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut pairs = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };
    for o in &cli.overrides {
        pairs.push(parse_override(o)?);
    }
    let mut cfg = ExperimentConfig::from_pairs(&pairs)?;
    if let Some(p) = &cli.output {
        cfg.output = Some(p.clone());
    }
    Ok(cfg)
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_workers()?;
    let cfg = load(cli)?;
    let out = cfg.output.as_deref();
    let table = match cli.command {
        Command::Gamma => commands::gamma(&cfg)?,
        Command::Map => commands::map(&cfg)?,
        Command::QfiSingle => commands::qfi_single(&cfg)?,
        Command::Bound => commands::bound(&cfg)?,
        Command::Parity => commands::parity(&cfg)?,
        Command::Scaling => commands::scaling(&cfg)?,
        Command::Config => {
            print!("{}", cfg.to_text());
            return Ok(());
        }
        Command::Check => {
            let results = commands::check(&cfg)?;
            let mut failed = Vec::new();
            for r in &results {
                println!("{} {}: {}", if r.passed { "pass" } else { "FAIL" }, r.name, r.detail);
                if !r.passed {
                    failed.push(format!("{}: {}", r.name, r.detail));
                }
            }
            return if failed.is_empty() { Ok(()) } else { Err(CliError::Invariant(failed)) };
        }
    };
    output::emit(&table, out, cli.plot)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qprobe: {e}");
            if let CliError::Invariant(list) = &e {
                for item in list {
                    eprintln!("  {item}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
