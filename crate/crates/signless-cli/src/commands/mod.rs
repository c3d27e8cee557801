pub mod arealaw;
pub mod chain;
pub mod feasibility;
pub mod teleport;
pub mod twist;

use std::path::Path;

use signless_core::io::{read_state, LoadedState};

use crate::error::CliError;
use crate::output::Outcome;

/// Run-wide settings passed to every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub seed: u64,
    pub tolerance: Option<f64>,
}

impl Ctx {
    pub fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}

pub fn load_state(path: &Path, renormalize: bool, out: &mut Outcome) -> Result<LoadedState, CliError> {
    let loaded = read_state(path, renormalize)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
        out.notes.push(w.clone());
    }
    Ok(loaded)
}
