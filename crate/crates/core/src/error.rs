use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("channel parameters are not degraded: {0}")]
    NotDegraded(String),

    #[error("channel parameters are not strictly degraded (legitimate and eavesdropper channels coincide)")]
    NotStrictlyDegraded,

    #[error("{name} = {value} is outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: f64 },

    #[error("derivative diverges at x = {0} (zero dark current)")]
    Divergent(f64),

    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),

    #[error("invalid arrival process: {0}")]
    InvalidArrivals(String),

    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: f64, right: f64 },

    #[error("cut points must be ascending and lie within [0, {horizon}]")]
    UnsortedCuts { horizon: f64 },

    #[error("invalid code shape M = {m_rows}, k = {k_ones}: {reason}")]
    InvalidCode {
        m_rows: usize,
        k_ones: usize,
        reason: &'static str,
    },

    #[error("code has too many columns: C({m_rows}, {k_ones}) exceeds 2^40")]
    CodeTooLarge { m_rows: usize, k_ones: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("{0}")]
    Invalid(String),

    #[error("{n_messages} messages do not divide {m_rows} codewords")]
    Divisibility { n_messages: usize, m_rows: usize },

    #[error("enumeration budget exceeded: {atoms:.3e} atoms > {budget:.0e}")]
    BudgetExceeded { atoms: f64, budget: f64 },

    #[error("equivocation undefined for a single message")]
    SingleMessage,

    #[error("empty experiment grid")]
    EmptyGrid,

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval { name, value })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}
