use thiserror::Error;

/// Errors raised by the grid, model, solver and experiment layers.
#[derive(Debug, Error)]
pub enum HylosError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("model/equation mismatch: expected {expected}, got {got}")]
    EquationMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("point {0:?} lies outside the box")]
    OutsideBox(Vec<f64>),
    #[error("no admissible frequency interval: {0}")]
    NoHylomorphy(String),
    #[error("shooting bracket not found for u0 in (0, {u0_max}]")]
    BracketNotFound { u0_max: f64 },
    #[error("radial step too large: energy monitor diverged at r = {r}")]
    StepTooLarge { r: f64 },
    #[error("profile tail too fat for box: u(r = {r}) / u(0) = {ratio:e}")]
    TailTooFat { r: f64, ratio: f64 },
    #[error("time step {dt} violates stability bound {bound}")]
    Cfl { dt: f64, bound: f64 },
    #[error("blow-up guard tripped at t = {t}: max|psi| = {max_abs:e}")]
    BlowUp { t: f64, max_abs: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HylosError>;
