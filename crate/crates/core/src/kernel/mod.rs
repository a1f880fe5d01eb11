//! Arbitrary-precision arithmetic and the special functions built on it.

pub mod complex;
pub mod gamma;
pub mod precision;
pub mod real;
pub mod special;
