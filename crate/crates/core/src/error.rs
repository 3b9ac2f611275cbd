use thiserror::Error;

use crate::model::{MetaboliteId, ReactionId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "invalid identifier `{0}`: expected letters, digits or `_`, not starting with a digit"
    )]
    InvalidId(String),
    #[error("reaction `{id}`: {reason}")]
    InvalidReaction { id: ReactionId, reason: String },
    #[error("duplicate reaction `{0}`")]
    DuplicateReaction(ReactionId),
    #[error("unknown metabolite `{0}`")]
    UnknownMetabolite(MetaboliteId),
    #[error("unknown reaction `{0}`")]
    UnknownReaction(ReactionId),
    #[error("boundary compound `{0}` is not declared as a seed")]
    BoundaryNotSeed(MetaboliteId),
    #[error("reaction `{0}` is not a reference-only reaction and cannot be part of a completion")]
    InvalidCompletion(ReactionId),
    #[error("reaction `{0}` has conflicting definitions in the two networks")]
    InconsistentUnion(ReactionId),
    #[error("expanding reversible reaction `{0}` collides with an existing id")]
    IdCollision(ReactionId),
    #[error("linear program is feasible; no infeasible subsystem to extract")]
    NotInfeasible,
    #[error("simplex exceeded {0} pivots")]
    NumericalFailure(usize),
    #[error("solver returned a point violating its constraints by {0:e}")]
    Inaccurate(f64),
    #[error("{count} subsets exceed the brute-force limit of {limit}")]
    PoolTooLarge { count: u128, limit: u128 },
    #[error("targets stay active after removing every removable reaction")]
    CannotDeactivate,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
