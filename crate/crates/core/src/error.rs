use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the supported domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate}, error bound {error:e})"
    )]
    NoConvergence { estimate: Complex64, error: f64, subdivisions: usize },
}
