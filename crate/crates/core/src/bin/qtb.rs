// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O, 2 usage, 3 configuration, 4 physics domain,
//! 5 numerical.

use std::error::Error as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use torsion_balance::scenario::{
    check_claims, claims_to_csv, claims_to_json, claims_to_text, load_config, plot_data, presets,
    run, sweep, OutputFormat, ScenarioConfig, SweepAxis,
};
use torsion_balance::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qtb",
    version,
    about = "Levitated quantum torsion balance feasibility calculator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario. Prints the JSON report, or the trajectory with `--format csv`.
    Run {
        /// Config file or built-in preset name.
        config: String,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Write report.json and trajectory.csv into this directory instead.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        config: String,
        /// One of T_E, n_gas, L, r, m, dxB, t0, duration.
        #[arg(long)]
        axis: String,
        /// Comma-separated values, with units (`"300 K,77 K"`) or bare SI numbers.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Compare quoted reference values with computed ones.
    CheckPaper {
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Write plot data (manifest and CSV series) for a scenario.
    PlotData {
        config: String,
        #[arg(long)]
        out: PathBuf,
        /// Also render figure.svg.
        #[arg(long)]
        svg: bool,
    },
    /// List built-in presets, or print one.
    Preset { name: Option<String> },
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(Error::from)
}

fn run_command(
    config: &ScenarioConfig,
    format: Option<Format>,
    out: Option<PathBuf>,
) -> Result<()> {
    let output = run(config)?;
    let dir = out.or_else(|| config.output.directory.as_ref().map(PathBuf::from));
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            let formats = match format {
                Some(Format::Json) => vec![OutputFormat::Json],
                Some(Format::Csv) => vec![OutputFormat::Csv],
                None if !config.output.formats.is_empty() => config.output.formats.clone(),
                None => vec![OutputFormat::Json, OutputFormat::Csv],
            };
            for f in formats {
                match f {
                    OutputFormat::Json => {
                        write_file(&dir.join("report.json"), &output.report.to_json())?
                    }
                    OutputFormat::Csv => {
                        write_file(&dir.join("trajectory.csv"), &output.trajectory.to_csv())?
                    }
                }
            }
        }
        None => match format {
            Some(Format::Csv) => print!("{}", output.trajectory.to_csv()),
            _ => print!("{}", output.report.to_json()),
        },
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            format,
            out,
        } => run_command(&load_config(&config)?, format, out),
        Command::Sweep {
            config,
            axis,
            values,
            format,
        } => {
            let config = load_config(&config)?;
            let axis = SweepAxis::from_name(&axis)?;
            let values = values
                .iter()
                .map(|v| axis.parse_value(v))
                .collect::<Result<Vec<_>>>()?;
            let result = sweep(&config, axis, &values)?;
            match format {
                Format::Csv => print!("{}", result.to_csv()),
                Format::Json => print!("{}", result.to_json()),
            }
            Ok(())
        }
        Command::CheckPaper { format } => {
            let claims = check_claims()?;
            match format {
                None => print!("{}", claims_to_text(&claims)),
                Some(Format::Csv) => print!("{}", claims_to_csv(&claims)),
                Some(Format::Json) => print!("{}", claims_to_json(&claims)),
            }
            Ok(())
        }
        Command::PlotData { config, out, svg } => {
            let config = load_config(&config)?;
            let output = run(&config)?;
            plot_data(&config, &output).write(&out, svg)?;
            write_file(&out.join("report.json"), &output.report.to_json())
        }
        Command::Preset { name: None } => {
            for name in presets::NAMES {
                println!("{name}");
            }
            Ok(())
        }
        Command::Preset { name: Some(name) } => match presets::get(&name) {
            Some(text) => {
                print!("{text}");
                Ok(())
            }
            None => Err(torsion_balance::error::ConfigError::NotFound(name).into()),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string();
            eprintln!("error: {message}");
            let mut source = e.source();
            while let Some(s) = source {
                let cause = s.to_string();
                if !message.contains(&cause) {
                    eprintln!("  caused by: {cause}");
                }
                source = s.source();
            }
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
