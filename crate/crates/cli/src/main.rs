use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hfv_cli::config::{load_file_config, resolve, FileConfig};
use hfv_cli::{run, CliError, Command, Overrides};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CommandArg {
    Stationary,
    Transient,
    Converge,
    Longtime,
    Positivity,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Stationary => Command::Stationary,
            CommandArg::Transient => Command::Transient,
            CommandArg::Converge => Command::Converge,
            CommandArg::Longtime => Command::Longtime,
            CommandArg::Positivity => Command::Positivity,
        }
    }
}

/// Hybrid finite volume experiments for advection-diffusion on polygonal meshes.
#[derive(Debug, Parser)]
#[command(name = "hfv", version)]
struct Cli {
    command: CommandArg,
    /// TOML run configuration; without it the command defaults apply.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mesh in polymesh v1 format, instead of a generated family.
    #[arg(long)]
    mesh_file: Option<PathBuf>,
    #[arg(long, value_parser = ["hmm", "expfit", "expfit-harmonic", "nonlinear"])]
    scheme: Option<String>,
    #[arg(long, value_parser = ["centred", "upwind", "sg"])]
    flux: Option<String>,
    /// Stabilization parameter of the discrete gradient.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Final time.
    #[arg(long)]
    tf: Option<f64>,
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (file, base) = match &cli.config {
        Some(path) => (load_file_config(path)?, path.parent().unwrap_or(Path::new("")).to_owned()),
        None => (FileConfig::default(), PathBuf::new()),
    };
    let overrides = Overrides {
        out: cli.out,
        mesh_file: cli.mesh_file,
        scheme: cli.scheme,
        flux: cli.flux,
        eta: cli.eta,
        dt: cli.dt,
        final_time: cli.tf,
    };
    let config = resolve(cli.command.into(), &file, &overrides, &base)?;
    run(&config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err = CliError::Config(e.kind().to_string());
            eprintln!("{}", err.report_line());
            return ExitCode::from(err.exit_code());
        }
    };
    match execute(cli) {
        Ok(written) => {
            for path in written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.report_line());
            ExitCode::from(e.exit_code())
        }
    }
}
