use thiserror::Error;

/// Failures shared by the geometric and numerical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point ({x}, {y}) is a singular point of the metric")]
    SingularPoint { x: f64, y: f64 },

    #[error("point ({x}, {y}) lies outside the chart of the metric")]
    OutsideChart { x: f64, y: f64 },

    #[error("cusp: atom at ({x}, {y}) carries ω₊-mass {mass} ≥ 4π{context}")]
    Cusp {
        x: f64,
        y: f64,
        mass: f64,
        context: String,
    },

    #[error("atom at ({x}, {y}) lies on the domain boundary")]
    AtomOnBoundary { x: f64, y: f64 },

    #[error("point ({x}, {y}) is within the boundary ambiguity band")]
    BoundaryAmbiguous { x: f64, y: f64 },

    #[error("evaluation point too close to a singularity or breakpoint: distance {distance} < {required}")]
    Proximity { distance: f64, required: f64 },

    #[error("operation requires a radially symmetric metric")]
    NotRadial,

    #[error("domain U is not contained in E")]
    NotSubset,

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

impl Error {
    /// Rejections caused by the geometry of the input rather than its shape.
    pub fn is_numerical_rejection(&self) -> bool {
        matches!(
            self,
            Error::SingularPoint { .. }
                | Error::Cusp { .. }
                | Error::AtomOnBoundary { .. }
                | Error::BoundaryAmbiguous { .. }
                | Error::Proximity { .. }
                | Error::Shooting(_)
                | Error::Precondition(_)
                | Error::OutsideChart { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn to_f64<T: num_traits::ToPrimitive>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
