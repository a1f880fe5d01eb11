//! Closed-form coefficient expressions: parsing, evaluation, expansion.

mod ast;
mod expand;
mod parse;

pub use ast::{Atom, AtomKind, Expr};
pub use expand::expand;
pub use parse::parse;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at byte {pos}")]
    UnexpectedChar { pos: usize, ch: char },

    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEnd { expected: &'static str },

    #[error("expected {expected} at byte {pos}")]
    Expected { pos: usize, expected: &'static str },

    #[error("malformed number at byte {pos}")]
    BadNumber { pos: usize },

    #[error("unknown function {name:?} at byte {pos}")]
    UnknownName { pos: usize, name: String },

    #[error("trailing input at byte {pos}")]
    Trailing { pos: usize },

    #[error("expression nesting exceeds depth {max}")]
    TooDeep { max: usize },

    #[error("exponent denominator must be positive at byte {pos}")]
    BadExponent { pos: usize },

    #[error("argument of {atom} at byte {pos} must be a monomial a*t^(p/q)")]
    NonMonomialAtom { pos: usize, atom: &'static str },
}
