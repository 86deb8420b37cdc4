use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("constant vector field (degree 0) has no compactification multiplier")]
    ConstantField,

    #[error("the whole equator is singular; infinite equilibria are not isolated")]
    DegenerateEquator,

    #[error("not nondegenerate (delta = {delta}, gamma = {gamma}); use the semi-hyperbolic or blow-up path")]
    NotNondegenerate { delta: f64, gamma: f64 },

    #[error("semi-hyperbolic reduction undetermined at order {order}; raise truncation")]
    Undetermined { order: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("point is not singular: {0}")]
    NotSingular(String),

    #[error("step size underflow at t = {t} (state {state:?})")]
    StepUnderflow { t: f64, state: [f64; 2] },

    #[error("solution escapes to infinity near t = {t} (last state {state:?})")]
    BlowUp { t: f64, state: [f64; 2] },

    #[error("non-returning orbit: no section crossing within t = {t_max}")]
    NonReturning { t_max: f64 },

    #[error("orbit is captured by an equilibrium near {state:?} at t = {t} before returning")]
    Captured { t: f64, state: [f64; 2] },

    #[error("flow is tangent to the section at the start point")]
    NotTransversal,

    #[error("no cycle found: {0}")]
    NoCycle(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. }
                | Error::BlowUp { .. }
                | Error::NonReturning { .. }
                | Error::Captured { .. }
                | Error::NoCycle(_)
                | Error::Undetermined { .. }
        )
    }
}
