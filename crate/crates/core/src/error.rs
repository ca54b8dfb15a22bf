use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("expected a positive rational, got {0}")]
    NonPositive(String),

    #[error("cannot factor {0}: integer exceeds 64 bits")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("exponent {exponent} is not in the group {group}")]
    ExponentOutsideGroup { exponent: String, group: String },

    #[error("series is not in the valuation ring (valuation {0} > 1)")]
    NotInValuationRing(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("zero pair (0, 0) is not a projective point")]
    ZeroPair,

    #[error("arity mismatch: predicate takes {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("residue of the derivative vanishes at the seed: not a simple root")]
    NonSimpleRoot,

    #[error("seed is not a residue root of the polynomial")]
    NotAResidueRoot,

    #[error("Newton iteration failed to converge: {0}")]
    NonConvergence(String),

    #[error("no group element found within exponent bound {bound}")]
    NotFound { bound: u32 },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("empty witness set for quantified variable `{0}`")]
    EmptyWitnessSet(String),

    #[error("operation not defined for the trivial group theory")]
    TrivialGroup,

    #[error("invalid group theory for this operation: {0}")]
    InvalidGroupTheory(String),

    #[error("invalid automorphism: {0}")]
    InvalidAutomorphism(String),

    #[error("Gauss extension parameter must have absolute value 1, got {0}")]
    NotAUnit(String),

    #[error("descriptor mix: {0}")]
    MixedDensity(String),

    #[error("descriptor is not dense: {0}")]
    NotDense(String),

    #[error("verdict cross-check failed: {0}")]
    CrossCheck(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
