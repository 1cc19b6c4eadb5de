use alloc::string::String;

/// Errors raised by the series, functional and checker layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("series needs at least one coefficient")]
    EmptySeries,
    #[error("coefficient {index} is not finite")]
    NonFiniteCoefficient { index: usize },
    #[error("quotient is not analytic: divisor vanishes to order {divisor}, dividend to order {dividend}")]
    DivisionOrder { dividend: usize, divisor: usize },
    #[error("(1 + h)^e needs h(0) = 0")]
    BranchPrecondition,
    #[error("evaluation point lies outside the unit disk (|z| = {modulus})")]
    OutsideDisk { modulus: f64 },
    #[error("series is not a normalized function: {0}")]
    NotNormalized(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("|w| is numerically zero on the whole circle |z| = {radius}")]
    DegenerateMax { radius: f64 },
    #[error("w(z0) is numerically zero")]
    ZeroDenominator,
    #[error("disk grid has no points")]
    GridEmpty,
    #[error("truncation tail bound {tail_bound:e} exceeds the reliability threshold")]
    EvaluationUnreliable { tail_bound: f64 },
    #[error("invalid function spec: {0}")]
    SpecInvalid(String),
}

pub type Result<T> = core::result::Result<T, CoreError>;
