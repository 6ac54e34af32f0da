use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the valid range {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "quadrature did not reach tolerance: estimate {estimate:e}, error {error:e} \
         (requested {requested:e}) after {intervals} subintervals on [{lower:e}, {upper:e}]"
    )]
    Quadrature {
        estimate: f64,
        error: f64,
        requested: f64,
        intervals: usize,
        lower: f64,
        upper: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, range: &'static str) -> Error {
    Error::Domain { what, value, range }
}
