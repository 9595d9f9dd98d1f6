//! Quotient presentations `K / I` used as ground truth for equivalence.

use std::sync::Arc;

use serde::Serialize;

use crate::algebroid::{AlgebroidMorphism, Section};
use crate::groupoid::{GroupoidElement, GroupoidSpec, NumericSection};
use crate::ode::RkParams;

use super::word::Word;
use super::HolonomyError;

/// Membership rule for the normal subgroupoid `I` of the presenting
/// groupoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Membership {
    /// `I` consists of units only.
    Trivial { tolerance: f64 },
    /// For vector groups `R^k` (possibly acting on a base): elements whose
    /// offsets are multiples of `period` and which fix their base point.
    AngleKernel { period: f64, tolerance: f64 },
}

impl Membership {
    pub fn contains(&self, k: &GroupoidSpec, g: &GroupoidElement) -> Result<bool, HolonomyError> {
        match self {
            Membership::Trivial { tolerance } => Ok(k.distance_to_unit(g)? <= *tolerance),
            Membership::AngleKernel { period, tolerance } => {
                let offset = k.offset(g).ok_or_else(|| {
                    HolonomyError::Unsupported("angle kernels need a translation group".into())
                })?;
                let domain = k.base_domain();
                if domain.distance(&k.source(g), &k.target(g)) > *tolerance {
                    return Ok(false);
                }
                Ok(offset
                    .iter()
                    .all(|v| (v - period * (v / period).round()).abs() <= *tolerance))
            }
        }
    }
}

/// `k1 ~ k2` in `K / I`, i.e. `k1 k2^{-1}` lies in `I`.
pub fn oracle_equiv(
    k: &GroupoidSpec,
    k1: &GroupoidElement,
    k2: &GroupoidElement,
    membership: &Membership,
) -> Result<bool, HolonomyError> {
    let domain = k.base_domain();
    let ds = domain.distance(&k.source(k1), &k.source(k2));
    let dt = domain.distance(&k.target(k1), &k.target(k2));
    if ds > k.snap_tolerance() || dt > k.snap_tolerance() {
        return Err(HolonomyError::Shape(format!(
            "oracle elements differ in source ({ds:e}) or target ({dt:e})"
        )));
    }
    membership.contains(k, &k.multiply(k1, &k.invert(k2)?)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub equivalent: bool,
    pub left: GroupoidElement,
    pub right: GroupoidElement,
    /// `k1 k2^{-1}`.
    pub quotient_element: GroupoidElement,
}

/// A groupoid `K` over the same base together with lifts of the
/// subalgebroid generators to sections of its algebroid, presenting the
/// holonomy groupoid as `K / I`.
#[derive(Debug, Clone)]
pub struct QuotientOracle {
    presenting: Arc<GroupoidSpec>,
    generators: Vec<Section>,
    lift_sections: Vec<Section>,
    lifts: Vec<NumericSection>,
    membership: Membership,
    rk: RkParams,
}

impl QuotientOracle {
    pub fn new(
        presenting: Arc<GroupoidSpec>,
        generators: Vec<Section>,
        lifts: Vec<Section>,
        membership: Membership,
    ) -> Result<Self, HolonomyError> {
        if generators.len() != lifts.len() {
            return Err(HolonomyError::Shape("one lift per generator is required".into()));
        }
        for l in &lifts {
            presenting.presentation().check_section(l)?;
        }
        let compiled: Vec<NumericSection> = lifts.iter().map(NumericSection::compile).collect();
        for c in &compiled {
            presenting.check_section(c)?;
        }
        Ok(QuotientOracle {
            presenting,
            generators,
            lift_sections: lifts,
            lifts: compiled,
            membership,
            rk: RkParams::default(),
        })
    }

    pub fn with_rk(mut self, rk: RkParams) -> Self {
        self.rk = rk;
        self
    }

    pub fn presenting(&self) -> &Arc<GroupoidSpec> {
        &self.presenting
    }

    pub fn membership(&self) -> &Membership {
        &self.membership
    }

    /// Checks that `map` sends every lift to its generator.
    pub fn lifts_map_to_generators(&self, map: &AlgebroidMorphism) -> Result<bool, HolonomyError> {
        for (l, g) in self.lift_sections.iter().zip(&self.generators) {
            if &map.apply(l)? != g {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The element of `K` represented by a word: the product of the flows
    /// of the lifted sections with the same parameters and bases.
    pub fn lift_word(&self, w: &Word) -> Result<GroupoidElement, HolonomyError> {
        let k = &self.presenting;
        let mut acc = k.unit(w.source())?;
        for point in w.factors().iter().rev() {
            let mut parts = Vec::with_capacity(point.lambda.len());
            for s in point.chart.generators() {
                let j = self
                    .generators
                    .iter()
                    .position(|g| g == s)
                    .ok_or_else(|| HolonomyError::Unsupported(format!("generator {s} has no lift")))?;
                parts.push(self.lifts[j].clone());
            }
            let alpha = NumericSection::combination(&parts, &point.lambda);
            let g = k.right_invariant_flow(&alpha, &k.unit(&point.base)?, 1.0, &self.rk)?;
            acc = k.multiply(&g, &acc)?;
        }
        Ok(acc)
    }

    pub fn compare(&self, w1: &Word, w2: &Word) -> Result<OracleReport, HolonomyError> {
        let k = &self.presenting;
        let left = self.lift_word(w1)?;
        let right = self.lift_word(w2)?;
        let quotient_element = k.multiply(&left, &k.invert(&right)?)?;
        let equivalent = self.membership.contains(k, &quotient_element)?;
        Ok(OracleReport {
            equivalent,
            left,
            right,
            quotient_element,
        })
    }
}
