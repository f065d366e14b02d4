use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("transition requires two distinct states, got {0} twice")]
    SameState(usize),
    #[error("requested {requested} states, at most {max} supported")]
    TooManyStates { requested: usize, max: usize },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} = {value} is invalid: {reason}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("point ({x}, {z}) m lies inside or on a conductor")]
    InsideConductor { x: f64, z: f64 },
    #[error("step {step} s too large: rate {rate} rad/s gives {angle} rad per step, limit {limit}")]
    StepTooLarge {
        step: f64,
        rate: f64,
        angle: f64,
        limit: f64,
    },
    #[error("magnetic field vanishes at t = 0, spin direction undefined")]
    ZeroField,
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
    #[error("no peak above noise floor (maximum {max})")]
    NoPeak { max: f64 },
    #[error("wavefunction {state} has norm {norm}, expected 1")]
    Normalization { state: usize, norm: f64 },
}
