//! Command-line surface. Every option is optional here so that values can
//! fall back to the configuration file and then to built-in defaults.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dolinar_core::sweep::Scheme;

/// Environment variable holding the default master seed.
pub const SEED_ENV: &str = "DOLINAR_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "dolinar",
    version,
    about = "Binary coherent-state receiver sweeps and simulations"
)]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any option.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error probability versus mean photon number for the Helstrom bound
    /// and the Kennedy, improved Kennedy and simplified Dolinar receivers.
    Fig1(SweepArgs),
    /// Optimal displacement intensity versus mean photon number.
    Fig3(SweepArgs),
    /// Every deterministic scheme at one mean photon number.
    Eval(EvalArgs),
    /// Seeded Monte Carlo run reported next to its analytic value.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExecutionArg {
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControlArg {
    /// Optimal feedback law (singular at t = 0 for equal priors).
    Optimal,
    /// Optimal law clamped to `--u-max`.
    Capped,
    /// Constant displacement `--beta`.
    Constant,
    /// No displacement.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimScheme {
    /// Photon-counting feedback receiver.
    #[value(name = "dolinar_mc")]
    DolinarMc,
    /// Adaptive measurement of identical copies.
    #[value(name = "multicopy")]
    Multicopy,
}

macro_rules! parse_value_enum {
    ($($t:ty),*) => {$(
        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let v = self.to_possible_value().expect("no skipped variants");
                f.write_str(v.get_name())
            }
        }
    )*};
}

parse_value_enum!(Format, Scale, ExecutionArg, ControlArg, SimScheme);

/// Comma-separated scheme names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeList(pub Vec<Scheme>);

impl FromStr for SchemeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            let scheme: Scheme = name
                .parse()
                .map_err(|e: dolinar_core::Error| e.to_string())?;
            if out.contains(&scheme) {
                return Err(format!("scheme '{name}' listed twice"));
            }
            out.push(scheme);
        }
        if out.is_empty() {
            return Err("empty scheme list".into());
        }
        Ok(SchemeList(out))
    }
}

/// Priors and pulse length.
#[derive(Debug, Clone, Default, Args)]
pub struct PhysicsArgs {
    /// Prior probability of symbol 0 [default: 0.5].
    #[arg(long)]
    pub q0: Option<f64>,

    /// Pulse duration T [default: 1].
    #[arg(long, short = 'T')]
    pub duration: Option<f64>,
}

/// Output destination and run settings.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Output format [default: csv].
    #[arg(long)]
    pub format: Option<Format>,

    /// Output file [default: stdout].
    #[arg(long, short = 'o', value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Master seed [default: $DOLINAR_SEED, else 0].
    #[arg(long)]
    pub seed: Option<u64>,

    /// Execution strategy for trials, enumeration and rows [default: parallel].
    #[arg(long)]
    pub execution: Option<ExecutionArg>,

    /// Worker threads for parallel execution [default: all cores].
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,

    #[command(flatten)]
    pub run: RunArgs,

    /// Smallest mean photon number [default: 0.01].
    #[arg(long)]
    pub lo: Option<f64>,

    /// Largest mean photon number [default: 2].
    #[arg(long)]
    pub hi: Option<f64>,

    /// Number of axis points [default: 30].
    #[arg(long)]
    pub points: Option<usize>,

    /// Axis spacing [default: log].
    #[arg(long)]
    pub scale: Option<Scale>,

    /// Comma-separated schemes: helstrom, kennedy, improved_kennedy,
    /// simplified_dolinar, dolinar_ode, dolinar_mc, multicopy.
    #[arg(long)]
    pub schemes: Option<SchemeList>,

    /// Emit `<scheme>_beta_sq` columns for displacement schemes.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_beta: Option<bool>,

    /// Monte Carlo trials per point for dolinar_mc [default: 10000].
    #[arg(long)]
    pub trials: Option<u64>,

    /// Feedback cap for dolinar_mc; required for equal priors.
    #[arg(long)]
    pub u_max: Option<f64>,

    /// Copies the pulse is cut into for multicopy [default: 8].
    #[arg(long)]
    pub copies: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,

    #[command(flatten)]
    pub run: RunArgs,

    /// Mean photon number of the pulse.
    #[arg(long)]
    pub gamma_sq: Option<f64>,

    /// Comma-separated schemes [default: all but dolinar_mc].
    #[arg(long)]
    pub schemes: Option<SchemeList>,

    /// Emit `<scheme>_beta_sq` columns [default: true].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_beta: Option<bool>,

    /// Monte Carlo trials if dolinar_mc is selected [default: 10000].
    #[arg(long)]
    pub trials: Option<u64>,

    /// Feedback cap for dolinar_mc.
    #[arg(long)]
    pub u_max: Option<f64>,

    /// Copies for multicopy [default: 8].
    #[arg(long)]
    pub copies: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,

    #[command(flatten)]
    pub run: RunArgs,

    /// Scheme to simulate.
    #[arg(long)]
    pub scheme: Option<SimScheme>,

    /// Feedback law for dolinar_mc [default: optimal].
    #[arg(long)]
    pub control: Option<ControlArg>,

    /// Displacement amplitude for `--control constant`.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Cap for `--control capped`.
    #[arg(long)]
    pub u_max: Option<f64>,

    /// Signal amplitude ψ for dolinar_mc [default: 1].
    #[arg(long, conflicts_with = "gamma_sq")]
    pub psi: Option<f64>,

    /// Mean photon number; sets ψ = sqrt(gamma_sq / T), or the per-copy
    /// overlap exp(-2 gamma_sq / copies) for multicopy.
    #[arg(long)]
    pub gamma_sq: Option<f64>,

    /// Overlap between the two copy states for multicopy [default: 0.8].
    #[arg(long, conflicts_with = "gamma_sq")]
    pub chi: Option<f64>,

    /// Copies for multicopy [default: 2].
    #[arg(long)]
    pub copies: Option<usize>,

    /// Monte Carlo trials [default: 100000].
    #[arg(long)]
    pub trials: Option<u64>,

    /// Write the first `--record` trajectories of dolinar_mc as JSON lines.
    #[arg(long, value_name = "PATH")]
    pub trajectories: Option<PathBuf>,

    /// Trajectories written with `--trajectories` [default: 100].
    #[arg(long)]
    pub record: Option<usize>,

    /// Ceiling on the thinning majorant in clicks per unit time [default: 1e8].
    #[arg(long)]
    pub max_rate: Option<f64>,
}
