//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A carrier point must be a finite, nonnegative real.
    #[error("invalid point {0}: points must be finite and nonnegative")]
    InvalidPoint(f64),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A metric returned a negative or non-finite log value where a distance was required.
    #[error("metric `{metric}` produced an invalid log value {value}")]
    InvalidMetricValue { metric: String, value: f64 },

    #[error("point {0} lies outside the domain of the map")]
    OutsideDomain(f64),

    /// The Picard orbit left the map's domain at the given iterate index.
    #[error("iterate {index} (value {value}) lies outside the domain of the map")]
    DomainExit { index: usize, value: f64 },

    #[error("no sampled point lies in region {0}")]
    EmptyRegion(String),

    /// `G(x0, Fx0, Fx0) <= (1 - eta) * gamma` failed at the seed.
    #[error("seed condition violated: log G(x0, Fx0, Fx0) = {lhs_log} > ln((1-eta)*gamma) = {rhs_log}")]
    SeedConditionViolated { lhs_log: f64, rhs_log: f64 },

    #[error("rate {rate} is not below 1; no geometric iteration bound can be certified")]
    RateOutOfRange { rate: f64 },

    #[error("no convergence after {iterations} iterations (residual log {residual_log})")]
    MaxIterationsExceeded {
        iterations: usize,
        residual_log: f64,
        last: f64,
    },

    #[error("fixture config: {0}")]
    Config(String),
}
