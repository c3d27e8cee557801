use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "signless", version, about = "Experiments on non-negative wavefunctions")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Run seed; recorded in every report.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Replaces the tolerance of every pass/fail check.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Csv)]
    pub emit: Emit,
    /// Output path for the CSV table or report (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write the run manifest here.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// JSON object of flag values for the subcommand; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Report,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(subcommand)]
    Teleport(TeleportCmd),
    #[command(subcommand)]
    Feasibility(FeasibilityCmd),
    #[command(subcommand)]
    Chain(ChainCmd),
    #[command(subcommand)]
    Arealaw(ArealawCmd),
    #[command(subcommand)]
    Twist(TwistCmd),
}

#[derive(Debug, Subcommand)]
pub enum TeleportCmd {
    /// Measure B and compare post-measurement states of A.
    #[command(args_override_self = true)]
    Analyze {
        #[arg(long)]
        state: PathBuf,
        /// Sites as `A|B|C`, 1-based, comma separated within a group.
        #[arg(long)]
        split: String,
        #[arg(long)]
        renormalize: bool,
    },
    /// Build a teleporting state, from a spectrum of ρ_C or a qubit ρ_A.
    #[command(args_override_self = true)]
    Construct {
        /// Eigenvalues of ρ_C (general construction).
        #[arg(long, value_delimiter = ',', conflicts_with = "rho_a")]
        spectrum: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2)]
        d_a: usize,
        /// `p,x` for ρ_A = [[p, x], [x, 1−p]] (non-negative construction).
        #[arg(long, value_delimiter = ',')]
        rho_a: Option<Vec<f64>>,
        #[arg(long, default_value_t = 3)]
        d_c: usize,
        /// Write the state here.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// Sample non-negative states with factorizing ρ_AC.
    #[command(args_override_self = true)]
    Scan {
        #[arg(long, default_value_t = 300)]
        samples: usize,
        /// `d_A,d_B,d_C`.
        #[arg(long, value_delimiter = ',', default_values_t = [2, 2, 3])]
        dims: Vec<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FeasibilityCmd {
    /// Evaluate 2|v|₁|w|₁/(|v|₁²+|w|₁²) for a pair or for the closed-form angle.
    #[command(args_override_self = true)]
    Lhs {
        #[arg(long, value_delimiter = ',', requires = "w")]
        v: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        w: Option<Vec<f64>>,
        #[arg(long, requires = "d")]
        delta: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
    },
    /// Look for a pair with lhs below the inner product s.
    #[command(args_override_self = true)]
    Search {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: f64,
    },
    /// Bisect for the smallest feasible inner product.
    #[command(args_override_self = true)]
    Threshold {
        #[arg(long, value_delimiter = ',')]
        d: Vec<usize>,
        #[arg(long, default_value_t = 1e-4)]
        precision: f64,
    },
    /// Grid check of the two-dimensional impossibility.
    #[command(args_override_self = true)]
    D2check {
        #[arg(long, default_value_t = signless_core::feasibility::D2_GRID_POINTS)]
        points: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChainCmd {
    /// Correlation defects, decay table, Pinsker gaps and reconstruction overlaps.
    #[command(args_override_self = true)]
    Analyze {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 2)]
        window: usize,
        /// Also check every pair of separated regions (L ≤ 8).
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        renormalize: bool,
    },
    /// Coherent Gibbs reconstruction from (l+1)-site marginals.
    #[command(args_override_self = true)]
    Reconstruct {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        state_out: Option<PathBuf>,
        #[arg(long)]
        renormalize: bool,
    },
    /// Square root of an order-l Markov distribution.
    #[command(args_override_self = true)]
    Factory {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "length", short = 'L', default_value_t = 8)]
        length: usize,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Uniform weights instead of seeded random ones.
        #[arg(long)]
        uniform: bool,
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Redraw index of the permutations.
    #[arg(long, default_value_t = 0)]
    pub attempt: u64,
}

#[derive(Debug, Subcommand)]
pub enum ArealawCmd {
    /// Fixed points, second eigenvalue and CPTP checks of the permutation channel.
    #[command(args_override_self = true)]
    Channel {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        pinned: bool,
    },
    /// Spectrum of the base or primed four-site Hamiltonian.
    #[command(args_override_self = true)]
    Build {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        primed: bool,
    },
    /// Channel and Hamiltonian spectra over dimensions and seeds.
    #[command(args_override_self = true)]
    Scan {
        #[arg(long, value_delimiter = ',', default_values_t = [4, 8])]
        d_list: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 8)]
        max_attempts: u64,
        #[arg(long)]
        pinned: bool,
    },
    /// Gap inequality for sums of two projectors on random pairs.
    #[command(args_override_self = true)]
    Projcheck {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 16)]
        max_dim: usize,
    },
    /// Operator inequality for the isometry onto the range of 1 − Q₁.
    #[command(args_override_self = true)]
    Isocheck {
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum TwistCmd {
    /// Operator Schmidt decomposition across regions.
    #[command(args_override_self = true)]
    Decompose {
        #[arg(long)]
        op: PathBuf,
        /// Regions as `1,2|3,4`, 1-based.
        #[arg(long)]
        regions: String,
    },
    /// Twist product, or its expectation in a state.
    #[command(args_override_self = true)]
    Eval {
        #[arg(long, value_delimiter = ',', required = true)]
        ops: Vec<PathBuf>,
        #[arg(long)]
        regions: String,
        /// One ordering per region, `1,2|2,1`, 1-based.
        #[arg(long)]
        orderings: String,
        #[arg(long)]
        state: Option<PathBuf>,
        /// Write the product operator here.
        #[arg(long)]
        op_out: Option<PathBuf>,
    },
}

/// Parses `1,2|3|4,5` into 0-based groups.
pub fn parse_groups(text: &str) -> Result<Vec<Vec<usize>>, CliError> {
    text.split('|')
        .map(|g| {
            g.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    let v: usize =
                        t.trim().parse().map_err(|_| CliError::usage(format!("bad index `{t}` in `{text}`")))?;
                    v.checked_sub(1).ok_or_else(|| CliError::usage("indices are 1-based"))
                })
                .collect()
        })
        .collect()
}

/// Inserts the flags of a `--config` JSON object right after the subcommand path,
/// so that flags given on the command line override them.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = match args[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => args.get(pos + 1).cloned().ok_or_else(|| CliError::usage("--config needs a path"))?,
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text)? else {
        return Err(CliError::usage("config file must hold a JSON object"));
    };
    let mut flags = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => flags.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                flags.push(flag);
                flags.push(items.iter().map(scalar_text).collect::<Vec<_>>().join(","));
            }
            other => {
                flags.push(flag);
                flags.push(scalar_text(&other));
            }
        }
    }
    let mut rest: Vec<String> = args;
    let drop = if rest[pos].contains('=') { 1 } else { 2 };
    rest.drain(pos..pos + drop);
    let insert_at = 3.min(rest.len());
    rest.splice(insert_at..insert_at, flags);
    Ok(rest)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
