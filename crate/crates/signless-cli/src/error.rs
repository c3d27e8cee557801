use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    File(#[from] signless_core::io::IoError),
    #[error(transparent)]
    State(#[from] signless_core::qstate::StateError),
    #[error(transparent)]
    Teleport(#[from] signless_core::teleport::TeleportError),
    #[error(transparent)]
    Feasibility(#[from] signless_core::feasibility::FeasibilityError),
    #[error(transparent)]
    Chain(#[from] signless_core::chain::ChainError),
    #[error(transparent)]
    Arealaw(#[from] signless_core::arealaw::ArealawError),
    #[error(transparent)]
    Twist(#[from] signless_core::twist::TwistError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}
