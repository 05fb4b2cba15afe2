//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency modules do not match")]
    ModuleMismatch,

    #[error("invalid frequency module: {0}")]
    InvalidModule(String),

    #[error("grid parameters do not match: {0}")]
    GridMismatch(String),

    #[error("frequency {freq} outside representable range +/-{max}")]
    FrequencyOutOfRange { freq: f64, max: f64 },

    #[error("symbol is not purely imaginary at xi={xi}: |Re A| = {re:.3e}")]
    NotPurelyImaginary { xi: f64, re: f64 },

    #[error("symbol order violation: fitted growth slope {slope:.3} exceeds declared order {declared:.3} by more than 0.1")]
    OrderViolation { slope: f64, declared: f64 },

    #[error("product support {max_freq:.3} exceeds 11/10 * N_max = {limit:.3}")]
    SupportExceeded { max_freq: f64, limit: f64 },

    #[error("window of side {window:.3} exceeds a quarter of the torus period {limit:.3}")]
    WindowExceedsTorus { window: f64, limit: f64 },

    #[error("oscillatory quadrature did not converge: successive refinements differ by {rel_change:.3e}")]
    QuadratureNotConverged { rel_change: f64 },

    #[error("Picard iteration did not contract within {iters} sweeps at T={t}; reduce T")]
    NoContraction { iters: u32, t: f64 },

    #[error("energy bound violated at t={t}: norm^2 {actual:.6e} > bound {bound:.6e}")]
    BoundViolated { t: f64, actual: f64, bound: f64 },

    #[error("unknown verification case: {0}")]
    UnknownCase(String),

    #[error("invalid equation: {0}")]
    InvalidEquation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pruned mass budget exceeded: dropped {dropped:.3e} against budget {budget:.3e}")]
    PruneBudgetExceeded { dropped: f64, budget: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
