use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the geometry, triangle, quadrature and composition code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid hbar {hbar}: {reason}")]
    InvalidHbar { hbar: f64, reason: &'static str },

    #[error("point {coords:?} is not on the {space}")]
    InvalidPoint { coords: Vec<f64>, space: &'static str },

    #[error("vector is not tangent at its base point (residual {residual:e})")]
    NotTangent { residual: f64 },

    #[error("antipodal points have no unique short geodesic")]
    AntipodalPair,

    #[error("tangent vector of length {length} lies outside the injectivity domain U")]
    OutsideU { length: f64 },

    #[error("midpoint triple lies outside the domain W")]
    OutsideW,

    #[error("a side of length {length} is not shorter than pi")]
    SideTooLong { length: f64 },

    #[error("amplitude diverges at the boundary of W (1 - det^2 = {margin:e})")]
    BoundaryDivergence { margin: f64 },

    #[error("midpoints determine infinitely many triangles")]
    DegenerateMidpoints,

    #[error("degenerate triangle")]
    Degenerate,

    #[error("quadrature refinement error {refine_error:e} exceeds the bound {bound:e}")]
    NonConvergent { refine_error: f64, bound: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence { iterations: usize, gradient_norm: f64 },

    #[error("Hessian is singular at the stationary point")]
    SingularHessian,

    #[error("Newton iterate left the domain W")]
    LeftDomain,

    #[error("polynomial degree {degree} exceeds the supported maximum {max}")]
    DegreeTooHigh { degree: u32, max: u32 },

    #[error("quadratic form is ill-conditioned")]
    IllConditioned,

    #[error("finite-difference Jacobian is numerically singular")]
    NearSingular,

    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),

    #[error("{0} is not supported on this space")]
    Unsupported(&'static str),
}

impl Error {
    /// True for errors caused by inputs outside a geometric domain
    /// (as opposed to numerical failures or malformed configuration).
    pub fn is_domain_error(&self) -> bool {
        matches!(
            self,
            Error::AntipodalPair
                | Error::OutsideU { .. }
                | Error::OutsideW
                | Error::SideTooLong { .. }
                | Error::BoundaryDivergence { .. }
                | Error::DegenerateMidpoints
                | Error::Degenerate
                | Error::LeftDomain
        )
    }
}
