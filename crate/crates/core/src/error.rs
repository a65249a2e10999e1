use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter index {index} out of range (store has {len})")]
    ParamIndex { index: usize, len: usize },

    #[error("loss node is not on this tape")]
    LossNotOnTape,

    #[error("non-finite gradient at tape node {node}")]
    NonFiniteGradient { node: usize },

    #[error("jet order {order:?} too low to seed variable '{axis}'")]
    JetOrderTooLow { axis: char, order: (u8, u8) },

    #[error("division by a jet with zero value")]
    JetDivisionByZero,

    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("checkpoint does not match the model: {0}")]
    CheckpointMismatch(String),

    #[error("unknown ansatz `{0}`")]
    UnknownAnsatz(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("missing boundary datum for ansatz: {0}")]
    MissingBoundaryData(&'static str),

    #[error("non-finite loss at epoch {epoch}, step {step}: {detail}")]
    NonFiniteLoss { epoch: usize, step: usize, detail: String },

    #[error("NRMSE undefined: reference series has zero norm")]
    ZeroNormReference,

    #[error("error reduction undefined: zero baseline")]
    ZeroBaseline,

    #[error("series length mismatch: {0} vs {1}")]
    SeriesLength(usize, usize),

    #[error("cannot aggregate an empty report set")]
    EmptyAggregate,

    #[error("rollout produced non-finite output at step {step}")]
    RolloutDiverged { step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
