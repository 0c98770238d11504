mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use config::{Cli, CliCommand, Command, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
    /// The reader went away, e.g. `jbell ... | head`.
    BrokenPipe,
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        match e.kind() {
            std::io::ErrorKind::BrokenPipe => CliError::BrokenPipe,
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<jbell_core::Error> for CliError {
    fn from(e: jbell_core::Error) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::BrokenPipe => 0,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::BrokenPipe => write!(f, "broken pipe"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jbell: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (cfg, workers, echo) = match cli.command {
        CliCommand::Run { config, output, workers } => {
            let mut cfg = config::load(&config)?;
            if output.is_some() {
                cfg.output = output;
            }
            (cfg, workers, None)
        }
        CliCommand::Evolve(a) => resolve(Command::Evolve, a)?,
        CliCommand::ChshSweep(a) => resolve(Command::ChshSweep, a)?,
        CliCommand::EntanglementSweep(a) => resolve(Command::EntanglementSweep, a)?,
        CliCommand::Protocol(a) => resolve(Command::Protocol, a)?,
        CliCommand::Shots(a) => resolve(Command::Shots, a)?,
    };
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("configuring workers: {e}")))?;
    }
    if let Some(path) = echo {
        config::save(&cfg, &path)?;
    }

    let out = commands::execute(&cfg)?;
    match cfg.output_path() {
        Some(path) => write_file(&path, |w| out.table.write(cfg.format, w))?,
        None => out.table.write(cfg.format, std::io::stdout().lock())?,
    }
    if let Some(path) = &cfg.trial_log {
        write_file(path, |w| jbell_core::measurement::write_trial_log_csv(&out.trial_logs, w).map_err(CliError::from))?;
    }
    if let Some(s) = out.summary {
        eprintln!("{s}");
    }
    Ok(())
}

type Resolved = (RunConfig, Option<usize>, Option<std::path::PathBuf>);

fn resolve(command: Command, args: config::CommandArgs) -> Result<Resolved, CliError> {
    let cfg = RunConfig::resolve(command, &args)?;
    Ok((cfg, args.workers, args.echo_config))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("creating {}: {e}", dir.display())))?;
    }
    let file = File::create(path).map_err(|e| CliError::Io(format!("creating {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}
