use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quenched_cli::commands::{self, Outcome};
use quenched_cli::config::{Format, RunConfig};
use quenched_cli::error::CliError;

#[derive(Parser)]
#[command(
    name = "quenched",
    version,
    about = "Quenched free energy of the zero-dimensional disordered phi^4 model"
)]
struct Cli {
    /// TOML run configuration with dotted keys (model.lambda, disorder.family, ...).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set series.a=0.5`. Repeatable; applied in order.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Series representation of E[ln Z] with correction, remainder and a direct-quadrature check.
    FreeEnergy,
    /// Table of ln E[Z^k] with growth-bound margins.
    Moments {
        #[arg(long, default_value_t = 15)]
        k_max: usize,
    },
    /// Phi(s) = E[Z^-s] at the given points, written as `re` or `re,im`.
    Phi {
        #[arg(long = "s", value_name = "RE[,IM]", default_values_t = ["0".to_string(), "0.5".to_string(), "1".to_string(), "2".to_string()])]
        points: Vec<String>,
    },
    /// Free energy for several split points a.
    SweepA {
        #[arg(long = "a", value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        a_list: Vec<f64>,
    },
    /// Runs the invariant suite; exits 0 only if every check passes.
    Validate,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(p) = &cli.output {
        cfg.output.path = p.to_string_lossy().into_owned();
    }
    let Outcome { report, exit_code } = match cli.command {
        Command::FreeEnergy => commands::free_energy(&cfg)?,
        Command::Moments { k_max } => commands::moments(&cfg, k_max)?,
        Command::Phi { points } => {
            let points = points
                .iter()
                .map(|p| commands::parse_complex(p))
                .collect::<Result<Vec<_>, _>>()?;
            commands::phi_table(&cfg, &points)?
        }
        Command::SweepA { a_list } => commands::sweep_a(&cfg, &a_list)?,
        Command::Validate => commands::validate(&cfg),
    };
    let text = report.render(cfg.output.format);
    if cfg.output.path.is_empty() {
        std::io::stdout().lock().write_all(text.as_bytes())?;
    } else {
        std::fs::write(&cfg.output.path, text)?;
    }
    Ok(exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("quenched: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
