//! Trivialized Lie algebroids, singular subalgebroids given by polynomial
//! generators, and the certificates and fiber computations built on them.

mod leaf;
mod presentation;
mod subalgebroid;

pub use leaf::{leaf_classify, leaf_trace, LeafClassification, LeafTrace, PatchExit, SignedGenerator};
pub use presentation::{
    derivation, so3_constants, vector_field_bracket, AlgebroidPresentation, PresentationReport, Section,
};
pub use subalgebroid::{
    AlgebroidMorphism, FiberDimension, InvolutivityCertificate, InvolutivityVerdict, PairCoefficients, Patch,
    SingularSubalgebroid, SyzygyBasis, DEFAULT_DEGREE_BOUND, WITNESS_SAMPLES,
};

use thiserror::Error;

use crate::poly::PolyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebroidError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("{block}: {message}")]
    Shape { block: String, message: String },
    #[error("section has rank {found_rank} over {found_nvars} variables, expected rank {expected_rank} over {expected_nvars}")]
    SectionShape {
        expected_rank: usize,
        expected_nvars: usize,
        found_rank: usize,
        found_nvars: usize,
    },
    #[error("a subalgebroid needs at least one generator")]
    NoGenerators,
    #[error("degree bound {bound} is below generator degree {generator_degree}")]
    DegreeBound { bound: u32, generator_degree: u32 },
    #[error("point has dimension {found}, expected {expected}")]
    PointDimension { expected: usize, found: usize },
    #[error("point {0:?} lies outside the patch")]
    OutsidePatch(Vec<f64>),
}
