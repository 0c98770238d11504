use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jbell_core::chsh::TimeUnit;
use jbell_core::entanglement::SignBranch;
use jbell_core::grid::GridSpec;
use jbell_core::model::{QubitCircuitParams, TwoQubitParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const OUTPUT_DIR_ENV: &str = "JBELL_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "jbell", version, about = "Bell-inequality and entanglement simulations for coupled charge qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Amplitudes of the two-qubit state evolved from |00>.
    Evolve(CommandArgs),
    /// CHSH combination over a (t, theta) grid.
    ChshSweep(CommandArgs),
    /// Concurrence by three routes over a (t, theta) grid of rotated states.
    EntanglementSweep(CommandArgs),
    /// Protocol probabilities and the reconstructed C² for every sign branch.
    Protocol(CommandArgs),
    /// Finite-shot estimates of Gamma and C² at a single point.
    Shots(CommandArgs),
    /// Re-run a configuration written by --echo-config.
    Run {
        config: PathBuf,
        /// Overrides the output path stored in the configuration.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args, Debug, Default)]
pub struct CommandArgs {
    /// Single-qubit field B of the two-qubit Hamiltonian.
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Coupling J of the two-qubit Hamiltonian.
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<f64>,
    /// Josephson energy E_J0 of each SQUID junction (circuit route).
    #[arg(long, allow_hyphen_values = true)]
    pub ej0: Option<f64>,
    /// Flux through each SQUID loop in units of the flux quantum.
    #[arg(long, allow_hyphen_values = true)]
    pub phi_x: Option<f64>,
    /// Gate charge; the two-qubit form needs 0.5.
    #[arg(long, allow_hyphen_values = true)]
    pub nx: Option<f64>,
    /// Charging energy E_ch; drops out at nx = 0.5.
    #[arg(long, allow_hyphen_values = true)]
    pub ech: Option<f64>,
    /// Inductive coupling energy E_L.
    #[arg(long, allow_hyphen_values = true)]
    pub el: Option<f64>,

    /// Time grid `start:stop:steps` or a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Polar measurement angle, same grid syntax as --t.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Azimuthal measurement angle on qubit 1.
    #[arg(long, allow_hyphen_values = true)]
    pub phi1: Option<f64>,
    /// Azimuthal measurement angle on qubit 2.
    #[arg(long, allow_hyphen_values = true)]
    pub phi2: Option<f64>,
    /// `alpha` reads times as t·α; `raw` as plain t.
    #[arg(long, value_enum)]
    pub time_unit: Option<TimeUnitArg>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,

    /// Trials per measurement setting.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Master seed; output is identical for any worker count.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-qubit readout flip probability.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// `auto`, `++`, `+-`, `-+` or `--`.
    #[arg(long, allow_hyphen_values = true)]
    pub branch: Option<String>,

    /// Output file; defaults to $JBELL_OUTPUT_DIR/<command>.<ext>, else stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write every sampled trial as CSV.
    #[arg(long)]
    pub trial_log: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Start from this configuration file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the resolved configuration as JSON.
    #[arg(long)]
    pub echo_config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Evolve,
    ChshSweep,
    EntanglementSweep,
    Protocol,
    Shots,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::ChshSweep => "chsh-sweep",
            Command::EntanglementSweep => "entanglement-sweep",
            Command::Protocol => "protocol",
            Command::Shots => "shots",
        }
    }

    fn default_time_unit(self) -> TimeUnitArg {
        match self {
            Command::ChshSweep | Command::EntanglementSweep => TimeUnitArg::Alpha,
            _ => TimeUnitArg::Raw,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnitArg {
    Alpha,
    Raw,
}

impl From<TimeUnitArg> for TimeUnit {
    fn from(u: TimeUnitArg) -> Self {
        match u {
            TimeUnitArg::Alpha => TimeUnit::InverseAlpha,
            TimeUnitArg::Raw => TimeUnit::Raw,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    ClosedForm,
    Dense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Direct { b: f64, j: f64 },
    Circuit { e_j0: f64, phi_x: f64, n_x: f64, e_ch: f64, e_l: f64 },
}

impl ModelSpec {
    pub fn params(&self) -> Result<TwoQubitParams, CliError> {
        Ok(match *self {
            ModelSpec::Direct { b, j } => TwoQubitParams::new(b, j)?,
            ModelSpec::Circuit { e_j0, phi_x, n_x, e_ch, e_l } => {
                TwoQubitParams::from_circuit(&QubitCircuitParams::new(e_j0, phi_x, n_x, e_ch, e_l)?)?
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchChoice {
    Auto,
    Fixed(SignBranch),
}

impl BranchChoice {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        if s == "auto" {
            Ok(BranchChoice::Auto)
        } else {
            Ok(BranchChoice::Fixed(s.parse()?))
        }
    }
}

/// Fully resolved run configuration; this is what `--echo-config` writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelSpec,
    pub t: String,
    pub theta: String,
    pub phi1: f64,
    pub phi2: f64,
    pub time_unit: TimeUnitArg,
    pub method: Method,
    pub shots: u64,
    pub seed: u64,
    pub epsilon: f64,
    pub branch: String,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub trial_log: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(command: Command, args: &CommandArgs) -> Result<Self, CliError> {
        let base = match &args.config {
            Some(path) => Some(load(path)?),
            None => None,
        };
        let b = base.as_ref();
        let model = resolve_model(args, b.map(|c| c.model))?;
        let t = args.t.clone().or_else(|| b.map(|c| c.t.clone())).ok_or_else(|| usage("--t is required"))?;
        let cfg = RunConfig {
            command,
            model,
            t,
            theta: args.theta.clone().or_else(|| b.map(|c| c.theta.clone())).unwrap_or_else(|| "0".into()),
            phi1: args.phi1.or(b.map(|c| c.phi1)).unwrap_or(0.0),
            phi2: args.phi2.or(b.map(|c| c.phi2)).unwrap_or(0.0),
            time_unit: args.time_unit.or(b.map(|c| c.time_unit)).unwrap_or(command.default_time_unit()),
            method: args.method.or(b.map(|c| c.method)).unwrap_or_default(),
            shots: args.shots.or(b.map(|c| c.shots)).unwrap_or(10_000),
            seed: args.seed.or(b.map(|c| c.seed)).unwrap_or(0),
            epsilon: args.epsilon.or(b.map(|c| c.epsilon)).unwrap_or(0.0),
            branch: args.branch.clone().or_else(|| b.map(|c| c.branch.clone())).unwrap_or_else(|| "auto".into()),
            output: args.output.clone().or_else(|| b.and_then(|c| c.output.clone())),
            format: args.format.or(b.map(|c| c.format)).unwrap_or_default(),
            trial_log: args.trial_log.clone().or_else(|| b.and_then(|c| c.trial_log.clone())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model.params()?;
        self.times()?;
        self.thetas()?;
        self.branch()?;
        if !self.phi1.is_finite() || !self.phi2.is_finite() {
            return Err(usage("phi1 and phi2 must be finite"));
        }
        if self.shots == 0 {
            return Err(usage("--shots must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(usage("--epsilon must lie in [0, 1]"));
        }
        if self.command == Command::Shots && (self.times()?.len() != 1 || self.thetas()?.len() != 1) {
            return Err(usage("shots evaluates a single point: give one value for --t and --theta"));
        }
        Ok(())
    }

    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        Ok(self.t.parse::<GridSpec>()?.values())
    }

    pub fn thetas(&self) -> Result<Vec<f64>, CliError> {
        Ok(self.theta.parse::<GridSpec>()?.values())
    }

    pub fn branch(&self) -> Result<BranchChoice, CliError> {
        BranchChoice::parse(&self.branch)
    }

    pub fn time_unit(&self) -> TimeUnit {
        self.time_unit.into()
    }

    /// Explicit `output`, else `$JBELL_OUTPUT_DIR/<command>.<ext>`, else stdout.
    pub fn output_path(&self) -> Option<PathBuf> {
        self.output.clone().or_else(|| {
            std::env::var_os(OUTPUT_DIR_ENV)
                .map(|dir| PathBuf::from(dir).join(format!("{}.{}", self.command.name(), self.format.extension())))
        })
    }
}

fn resolve_model(args: &CommandArgs, base: Option<ModelSpec>) -> Result<ModelSpec, CliError> {
    let direct = args.b.is_some() || args.j.is_some();
    let circuit = args.ej0.is_some() || args.phi_x.is_some() || args.el.is_some() || args.ech.is_some() || args.nx.is_some();
    match (direct, circuit) {
        (true, true) => Err(usage("give either --B/--J or circuit parameters, not both")),
        (true, false) => match (args.b, args.j, base) {
            (Some(b), Some(j), _) => Ok(ModelSpec::Direct { b, j }),
            (b, j, Some(ModelSpec::Direct { b: b0, j: j0 })) => Ok(ModelSpec::Direct { b: b.unwrap_or(b0), j: j.unwrap_or(j0) }),
            _ => Err(usage("both --B and --J are required")),
        },
        (false, true) => {
            let (e_j0, phi_x, e_l) = match (args.ej0, args.phi_x, args.el) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => return Err(usage("circuit parameters need --ej0, --phi-x and --el")),
            };
            Ok(ModelSpec::Circuit { e_j0, phi_x, n_x: args.nx.unwrap_or(0.5), e_ch: args.ech.unwrap_or(1.0), e_l })
        }
        (false, false) => base.ok_or_else(|| usage("model parameters are required: --B and --J, or circuit parameters")),
    }
}

pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
    let cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| usage(format!("parsing {}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save(cfg: &RunConfig, path: &std::path::Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(cfg).map_err(|e| usage(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
