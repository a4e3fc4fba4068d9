use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} outside domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("mode count mismatch: expected {expected}, found {found}")]
    ModeMismatch { expected: usize, found: usize },

    #[error("resource limit exceeded: {what} = {requested} (limit {limit})")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("matrix is not unitary: max |U U^dag - I| = {deviation:e} (tolerance {tolerance:e})")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("invalid mode index {index} for a {modes}-mode circuit")]
    ModeIndex { index: usize, modes: usize },

    #[error("mode {0} listed more than once")]
    DuplicateMode(usize),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("herald pattern has zero success probability")]
    ZeroProbability,

    #[error("validation gate `{gate}` failed: {detail}")]
    ValidationGate { gate: &'static str, detail: String },

    #[error("target {target} unachievable; attainable range is [{min}, {max}]")]
    Unachievable { target: f64, min: f64, max: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "[0, 1]",
        })
    }
}
