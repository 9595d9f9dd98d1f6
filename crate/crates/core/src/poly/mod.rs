//! Exact multivariate polynomials over the rationals, their text syntax,
//! and the dense linear algebra used by membership and syzygy solves.

mod matrix;
mod parse;
mod polynomial;
pub mod rational;
mod vector;

pub use matrix::{rank_of_vectors, QMatrix};
pub use parse::parse_polynomial;
pub use polynomial::{monomials_upto, CompiledPoly, Monomial, PolyText, Polynomial};
pub use rational::{format_rational, parse_rational, rat, ratio, Rational};
pub use vector::PolyVector;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable x{index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero denominator")]
    ZeroDenominator,
}
