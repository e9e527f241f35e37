//! Error type shared by the analytical, detection and simulation layers.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Slack allowed on a probability before clamping is treated as a bug.
pub const PROBABILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invariant `{invariant}` violated: {detail}")]
    Invariant {
        invariant: &'static str,
        detail: String,
    },

    #[error("{operation}: argument out of domain: {detail}")]
    Domain {
        operation: &'static str,
        detail: String,
    },

    #[error("internal consistency: {context} produced {value}, outside [0, 1]")]
    Consistency { context: &'static str, value: f64 },

    #[error("exact enumeration refused for gate {gate}: at most {limit} gates are enumerated")]
    EnumerationLimit { gate: usize, limit: usize },

    #[error("degenerate threshold: adjacent trigger probabilities are equal ({0})")]
    DegenerateThreshold(f64),

    #[error("trigger probability {0} lies on the boundary of [0, 1]; use the count-axis extremes instead")]
    BoundaryProbability(f64),

    #[error("trigger probabilities are not strictly increasing at symbol {index}: {lower} >= {upper}")]
    NonMonotoneTriggers { index: usize, lower: f64, upper: f64 },

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn invariant(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            invariant,
            detail: detail.into(),
        }
    }

    /// True for failures of the numerical pipeline rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Consistency { .. }
                | Error::DegenerateThreshold(_)
                | Error::BoundaryProbability(_)
                | Error::NonMonotoneTriggers { .. }
                | Error::EstimationFailure(_)
                | Error::EnumerationLimit { .. }
        )
    }
}

/// Clamps a computed probability to [0, 1].
///
/// Values further than [`PROBABILITY_SLACK`] outside the unit interval are
/// reported as an internal-consistency error instead of being hidden.
pub fn clamp_probability(value: f64, context: &'static str) -> Result<f64> {
    if !value.is_finite() || value < -PROBABILITY_SLACK || value > 1.0 + PROBABILITY_SLACK {
        return Err(Error::Consistency { context, value });
    }
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_accepts_rounding_noise() {
        assert_eq!(clamp_probability(-5e-13, "t").unwrap(), 0.0);
        assert_eq!(clamp_probability(1.0 + 5e-13, "t").unwrap(), 1.0);
        assert_eq!(clamp_probability(0.25, "t").unwrap(), 0.25);
    }

    #[test]
    fn clamp_rejects_real_excursions() {
        assert!(matches!(
            clamp_probability(1.01, "t"),
            Err(Error::Consistency { .. })
        ));
        assert!(clamp_probability(f64::NAN, "t").is_err());
        assert!(clamp_probability(-1e-9, "t").is_err());
    }
}
