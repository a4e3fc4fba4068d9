use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heraldsim_cli::commands::{parse_herald, plot_data};
use heraldsim_cli::template::{parse_binding, parse_range, Range};
use heraldsim_cli::{
    cmd_export, cmd_scan, cmd_simulate, cmd_verify, exit, to_json, CliError, CliResult,
    ExportArgs, Precision, RecipeName, ScanArgs, SimulateArgs, VerifyArgs,
};

/// Heralded linear-optics simulator.
///
/// Exit codes: 0 success, 1 I/O or other failure, 2 schema or input error,
/// 3 resource limit, 4 validation gate or non-unitary input, 5 unachievable
/// scan target.
#[derive(Parser)]
#[command(name = "heraldsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit spec and report the heralded branch.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Template parameter binding, `name=value`.
        #[arg(long = "set", value_parser = parse_binding)]
        set: Vec<(String, f64)>,
        #[arg(long)]
        cutoff: Option<u32>,
        #[arg(long)]
        zero_threshold: Option<f64>,
        #[arg(long, value_enum, default_value_t = Precision::Double)]
        precision: Precision,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep template parameters, optionally solving for a target ε.
    Scan {
        #[arg(long)]
        spec: PathBuf,
        /// Scan axis, `name=lo:hi:step`.
        #[arg(long = "param", value_parser = parse_range)]
        params: Vec<Range>,
        #[arg(long = "set", value_parser = parse_binding)]
        set: Vec<(String, f64)>,
        #[arg(long)]
        target: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Whitespace-separated columns: parameters, epsilon, p_succ.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Squeezed vacua through an external unitary, with a gray-zone audit.
    Verify {
        #[arg(long)]
        unitary: PathBuf,
        /// Squeezing r per squeezed mode; remaining modes are vacuum.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        squeezing: Vec<f64>,
        /// `mode:count` list, 1-based modes.
        #[arg(long, default_value = "")]
        herald: String,
        #[arg(long, default_value_t = 8)]
        cutoff: u32,
        #[arg(long, default_value_t = heraldsim_core::fock::DEFAULT_ZERO_THRESHOLD)]
        zero_threshold: f64,
        #[arg(long, value_enum, default_value_t = Precision::Double)]
        precision: Precision,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in reconstruction as circuit JSON.
    ExportRecipe {
        #[arg(value_enum)]
        name: RecipeName,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        /// Three-mode unitary for fig2.
        #[arg(long)]
        unitary: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(bytes: &[u8], out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            spec,
            set,
            cutoff,
            zero_threshold,
            precision,
            out,
        } => {
            let report = cmd_simulate(&SimulateArgs {
                spec,
                set,
                cutoff,
                zero_threshold,
                precision,
            })?;
            emit(&to_json(&report), out.as_deref())
        }
        Command::Scan {
            spec,
            params,
            set,
            target,
            tolerance,
            out,
            plot_data: plot,
        } => {
            let report = cmd_scan(&ScanArgs {
                spec,
                ranges: params,
                set,
                target,
                tolerance,
            })?;
            if let Some(p) = plot {
                std::fs::write(&p, plot_data(&report)).map_err(|e| CliError::io(&p, e))?;
            }
            emit(&to_json(&report), out.as_deref())
        }
        Command::Verify {
            unitary,
            squeezing,
            herald,
            cutoff,
            zero_threshold,
            precision,
            out,
        } => {
            let herald = parse_herald(&herald).map_err(|m| CliError::schema("--herald", m))?;
            let report = cmd_verify(&VerifyArgs {
                unitary,
                squeezing,
                herald,
                cutoff,
                zero_threshold,
                precision,
            })?;
            emit(&to_json(&report), out.as_deref())
        }
        Command::ExportRecipe {
            name,
            a,
            b,
            lambda,
            unitary,
            out,
        } => {
            let spec = cmd_export(&ExportArgs {
                name,
                a,
                b,
                lambda,
                unitary,
            })?;
            emit(&to_json(&spec), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::SCHEMA as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
