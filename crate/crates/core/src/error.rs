use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. The snake_case prefix of each message is the stable
/// tag the CLI and the tests match on.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not_hermitian: matrix deviates from its adjoint by {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("eig_fail: QL iteration did not converge within the sweep budget")]
    EigFail,

    #[error("bad_shape: {0}")]
    BadShape(String),

    #[error("bad_param: {0}")]
    BadParam(String),

    #[error("not_tp: Kraus operators sum to {deviation:.3e} away from the identity")]
    NotTracePreserving { deviation: f64 },

    #[error("not_unitary: matrix deviates from unitarity by {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("not_traceless: trace has magnitude {magnitude:.3e}")]
    NotTraceless { magnitude: f64 },

    #[error("not_orthogonal: inner product has magnitude {magnitude:.3e}")]
    NotOrthogonal { magnitude: f64 },

    #[error("not_instrument: Kraus sets sum to {deviation:.3e} away from the identity")]
    NotInstrument { deviation: f64 },

    #[error("not_perfectly_discriminable: {0}")]
    NotPerfectlyDiscriminable(String),

    #[error("bad_family: {0}")]
    BadFamily(String),

    #[error("bad_measurement: {0}")]
    BadMeasurement(String),

    #[error("need_upper: {0}")]
    NeedUpper(String),

    #[error("chain_violation: {0}")]
    ChainViolation(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
}
