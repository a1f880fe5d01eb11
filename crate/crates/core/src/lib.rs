//! Spectral solver for linear systems of fractional differential equations
//! with rational Caputo orders.
//!
//! The solver expands each unknown in Müntz-Jacobi functions (shifted Jacobi
//! polynomials composed with t^(1/q)), reformulates the system in Volterra
//! form, and obtains the expansion coefficients by an explicit recurrence
//! instead of a dense linear solve. An independent truncated-series engine
//! provides reference solutions, and a harness runs convergence studies over
//! the bundled example problems at configurable precision.

pub mod error;
pub mod expr;
pub mod fracops;
pub mod galerkin;
pub mod harness;
pub mod kernel;
pub mod muntz;
pub mod oracle;
pub mod orthopoly;
pub mod problem;

pub use error::{Error, Result};
pub use kernel::complex::Cx;
pub use kernel::precision::Precision;
pub use kernel::real::Real;
