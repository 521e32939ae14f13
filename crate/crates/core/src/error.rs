use std::fmt;

use crate::lazy::NodeId;

/// A valuation that may be infinite (the precise zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Val {
    Finite(i64),
    Infinity,
}

impl Val {
    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Finite(v) => Some(v),
            Val::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Val::Infinity)
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(v) => write!(f, "{v}"),
            Val::Infinity => write!(f, "Infinity"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("precision must be at least 1, got {0}")]
    InvalidPrecision(i64),
    #[error("defining polynomial is not monic")]
    NotMonic,
    #[error("defining polynomial must have degree at least 2")]
    DegreeTooSmall,
    #[error("polynomial is not Eisenstein: {0}")]
    NotEisenstein(String),
    #[error("polynomial is not inertial: {0}")]
    NotInertial(String),
    #[error("elements belong to different ring families")]
    FamilyMismatch,
    #[error("division by a weakly zero element")]
    WeaklyZeroDivisor,
    #[error("value of valuation {0} does not lie in the ring of integers")]
    NotIntegral(i64),
    #[error("rational with zero denominator")]
    ZeroDenominator,
    #[error("requested precision {requested} exceeds available defining-polynomial precision {available}")]
    PrecisionUnavailable { requested: i64, available: i64 },
    #[error("precision budget exhausted at epoch {epoch}{}", last_weak_valuation.map(|v| format!(" (last weak valuation {v})")).unwrap_or_default())]
    BudgetExhausted {
        epoch: u32,
        last_weak_valuation: Option<Val>,
    },
    #[error("cannot certify divisor nonzero within {0} epochs")]
    UncertifiedDivisor(u32),
    #[error("validation failed for node {node} at epoch {epoch}: {reason}")]
    Validation {
        node: NodeId,
        epoch: u32,
        reason: String,
    },
    #[error("get-approx for node {node} (kind {kind}) failed at epoch {epoch}: {source}")]
    GetApprox {
        node: NodeId,
        kind: String,
        epoch: u32,
        #[source]
        source: Box<Error>,
    },
    #[error("epoch must be at least 1")]
    ZeroEpoch,
    #[error("dependency mismatch: {0}")]
    DependencyMismatch(String),
    #[error("parent mismatch: {0}")]
    ParentMismatch(String),
    #[error("optimizer inputs do not cover leaf node {0}")]
    UncoveredSink(NodeId),
    #[error("empty coefficient sequence")]
    EmptyPolynomial,
    #[error("coefficient index {index} out of range for degree bound {degree}")]
    IndexOutOfRange { index: usize, degree: usize },
    #[error("all coefficients are weakly zero")]
    AllWeaklyZero,
    #[error("derivative became weakly zero during Hensel iteration")]
    DerivativeVanished,
    #[error("Hensel lifting did not converge: {0}")]
    LiftFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

impl Error {
    /// Strips `GetApprox` wrappers to reach the originating error.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::GetApprox { source, .. } => source.root_cause(),
            other => other,
        }
    }

    pub fn is_budget_exhausted(&self) -> bool {
        matches!(
            self.root_cause(),
            Error::BudgetExhausted { .. } | Error::UncertifiedDivisor(_)
        )
    }

    pub fn is_validation(&self) -> bool {
        matches!(self.root_cause(), Error::Validation { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
