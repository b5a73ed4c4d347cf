//! Every inequality as a checkable predicate, and the evaluator that turns
//! a statement plus an instance into a [`Certificate`].

mod certificate;
mod evaluate;
mod instance;
mod statement;

use thiserror::Error;

use crate::error::LinalgError;
use crate::maps::{MapError, PositivityClass};

pub use certificate::{Certificate, Value, Verdict};
pub use evaluate::{
    assemble_gamma, evaluate, evaluate_gamma_family, evaluate_with, gamma_ratio_svd_route, norm_block_predicates,
    verify_counterexample, EvalOptions, GammaParts, REVERIFY_REL_TOL, SUPPORT_CUTOFF, SUPPORT_MAX_CONDITION,
};
pub use instance::{InstanceBundle, ORTHONORMAL_TOL};
pub use statement::{
    registry, statement, statement_requirements, Shape, Slot, Statement, StatementClass, StatementId,
};

/// Why an otherwise well-formed instance was not scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RejectReason {
    #[error("the hypothesis of the implication does not hold")]
    HypothesisFailed,
    #[error("a compression that must be inverted is singular")]
    SingularCompression,
    #[error("the support of a compression is too ill-conditioned to invert reliably")]
    IllConditionedSupport,
    #[error("the bound is zero (degenerate window)")]
    DegenerateBound,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown statement `{0}`")]
    UnknownStatement(String),
    #[error("{statement} requires slot {slot:?}")]
    MissingSlot { statement: StatementId, slot: Slot },
    #[error("{statement} requires a {required} map, got {actual}")]
    MapClassTooWeak {
        statement: StatementId,
        required: PositivityClass,
        actual: PositivityClass,
    },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance rejected: {0}")]
    Rejected(RejectReason),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Map(#[from] MapError),
}

impl EvalError {
    pub fn is_rejection(&self) -> bool {
        matches!(self, EvalError::Rejected(_))
    }
}
