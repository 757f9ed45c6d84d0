use thiserror::Error;

/// Errors raised by solvers, equilibrium builders and the game engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no interior root of {equation} on (0, {upper}): the efficiency function is not sigmoidal for this model")]
    NoInteriorRoot { equation: &'static str, upper: f64 },

    #[error("root bracketing failed for {0}")]
    Bracketing(&'static str),

    #[error("no Nash equilibrium: the load condition 2 <= K < N/beta* + 1 is violated (K = {k}, N = {n}, beta* = {beta_star})")]
    NoNashEquilibrium { k: usize, n: f64, beta_star: f64 },

    #[error("saturated regime: player {player} needs {required} W but P_max = {cap} W")]
    SaturatedRegime { player: usize, required: f64, cap: f64 },

    #[error("ill-posed hierarchy: {0}")]
    IllPosedHierarchy(String),

    #[error("no finite T0 for player {player}: punishment loss per stage is {denominator} <= 0")]
    NoFiniteT0 { player: usize, denominator: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("stage {stage} is past the end of a {horizon}-stage game")]
    GameOver { stage: usize, horizon: usize },

    #[error("empty trace")]
    EmptyTrace,

    #[error("public signal cannot be reconstructed from a zero SINR")]
    UndefinedSignal,

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidConfig(msg.into()))
}
