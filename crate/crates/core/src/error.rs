use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown symbol `{name}` at {pos}")]
    UnknownSymbol { name: String, pos: usize },

    #[error("zero denominator literal at {pos}")]
    ZeroDenominator { pos: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("division by `{0}` requires a nonzero assumption")]
    MissingAssumption(String),

    #[error("jet order overflow: {index} exceeds order 8")]
    JetOrderOverflow { index: String },

    #[error("vector field is not affine in (x, y, t, h): {0}")]
    NonAffine(String),

    #[error("vector does not lie in the span: {0}")]
    NotInSpan(String),

    #[error("residual is not linear and homogeneous in the ansatz coefficients: {0}")]
    NotLinear(String),

    #[error("symbolic parameters cannot be used for discovery: {0}")]
    SymbolicDiscovery(String),

    #[error("input vectors are linearly dependent")]
    DependentInput,

    #[error("matrix exponential: unsupported spectrum ({0})")]
    UnsupportedSpectrum(String),

    #[error("reduced equation still depends on {0}")]
    ResidualDependence(String),

    #[error("cannot evaluate: {0}")]
    Eval(String),

    #[error("{0}")]
    Invalid(String),
}
