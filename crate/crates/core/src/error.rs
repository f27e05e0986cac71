use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// `P(s)` or `Q(s)` vanished (or nearly so) where it was needed as a divisor.
    #[error("transfer function vanishes at s = {s}: |{which}(s)| = {magnitude:e}")]
    Singular {
        which: &'static str,
        s: Complex64,
        magnitude: f64,
    },

    #[error("potential zero of P on the winding contour at s = {s} (|P| = {magnitude:e})")]
    OnContourZero { s: Complex64, magnitude: f64 },

    /// The integrand envelope did not fall below the tolerance before the frequency cap.
    #[error(
        "no convergence at x = {x}, t = {t}: envelope still {envelope:e} at tau = {cap:e}; \
         use x >= {x_min:.3e} or handle the impulse analytically"
    )]
    EnvelopeNotDecayed {
        x: f64,
        t: f64,
        cap: f64,
        envelope: f64,
        x_min: f64,
    },

    #[error("Bromwich integral not converged at t = {t}: tail {tail:e} exceeds tolerance {tol:e}")]
    BromwichNotConverged { t: f64, tail: f64, tol: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("at x = {x}, t = {t}: {source}")]
    Cell {
        x: f64,
        t: f64,
        source: Box<Error>,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}
