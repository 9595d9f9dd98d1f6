//! Path-holonomy atlases: charts, words, bisections, and the equivalence
//! test on words, plus transport along morphisms and coverings.

mod bisection;
mod chart;
mod morphism;
mod oracle;
mod verdict;
mod word;

pub use bisection::{
    carried_bisection, carries_test, sample_points, translate_chart, Bisection, CarriedBisection, IdentityBisection,
    TranslatedChart, TranslatedPoint,
};
pub use chart::{
    chart_domain_check, chart_eval, Chart, ChartPoint, DomainReport, GridFailure, Region, SUBMERSION_TOLERANCE,
};
pub use morphism::{covering_lift_word, include_word, pushforward_word, GroupoidMorphism, LIFT_SAMPLES};
pub use oracle::{oracle_equiv, Membership, OracleReport, QuotientOracle};
pub use verdict::{equivalent, identity_test, EquivParams, SampleResidual, SampleStatus, Verdict, Witness};
pub use word::{compose, invert, word_phi, Word};

use thiserror::Error;

use crate::algebroid::AlgebroidError;
use crate::groupoid::GroupoidError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HolonomyError {
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error("{0}")]
    Shape(String),
    #[error("chart {chart}: ({lambda:?}, {base:?}) lies outside the chart domain")]
    ChartDomain {
        chart: String,
        lambda: Vec<f64>,
        base: Vec<f64>,
    },
    #[error("chart {chart}: inverse parameter {lambda:?} lies outside the parameter box")]
    InverseOutOfDomain { chart: String, lambda: Vec<f64> },
    #[error("words or charts live on different groupoids")]
    GroupoidMismatch,
    #[error("factors are not composable: junction gap {distance:e}")]
    NotComposable { distance: f64 },
    #[error("section {section} is not a member of the subalgebroid")]
    NotMember { section: String },
    #[error("section {section} is not a constant combination of the target generators")]
    NonExpressible { section: String },
    #[error("no preimage found for {point:?}")]
    NotInvertible { point: Vec<f64> },
    #[error("unsupported: {0}")]
    Unsupported(String),
}
