//! Wave propagation in a rod made of a complex-order fractional Zener
//! material: thermodynamic admissibility of the coefficients, the complex
//! modulus and wave function, numerical Laplace inversion of the solution
//! kernels, field assembly, and a Grünwald–Letnikov time-domain oracle.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod inversion;
pub mod modulus;
pub mod oracle;
pub mod params;
pub mod quadrature;
pub mod simulate;
mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{MaterialParams, RodLength};
pub use simulate::{BoundarySignal, WaveField};
