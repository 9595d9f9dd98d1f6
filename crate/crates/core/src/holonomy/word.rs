//! Words of chart points: finite compositions in the path-holonomy atlas.

use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::groupoid::{GroupoidElement, GroupoidSpec};

use super::chart::{Chart, ChartPoint};
use super::HolonomyError;

/// A product `u_1 * u_2 * ... * u_m` of chart points, stored in product
/// order: the base of `u_m` is the source of the word and the base of each
/// `u_k` is the target of `u_{k+1}`.
#[derive(Debug, Clone)]
pub struct Word {
    groupoid: Arc<GroupoidSpec>,
    source: Vec<f64>,
    target: Vec<f64>,
    factors: Vec<ChartPoint>,
    /// Bases as given before snapping, where snapping moved them.
    raw_bases: Vec<Option<Vec<f64>>>,
}

pub(crate) fn same_groupoid(a: &Arc<GroupoidSpec>, b: &Arc<GroupoidSpec>) -> bool {
    Arc::ptr_eq(a, b) || (a.model() == b.model() && a.presentation() == b.presentation())
}

impl Word {
    /// The empty word at `x`, representing the unit `1_x`.
    pub fn empty(groupoid: Arc<GroupoidSpec>, x: &[f64]) -> Result<Self, HolonomyError> {
        let domain = groupoid.base_domain();
        if !domain.contains(x) {
            return Err(HolonomyError::Groupoid(crate::groupoid::GroupoidError::OutOfDomain(x.to_vec())));
        }
        let x = domain.wrapped(x);
        Ok(Word {
            groupoid,
            source: x.clone(),
            target: x,
            factors: Vec::new(),
            raw_bases: Vec::new(),
        })
    }

    /// Single-factor word `(lambda, y)`.
    pub fn single(chart: &Arc<Chart>, lambda: &[f64], y: &[f64]) -> Result<Self, HolonomyError> {
        Word::empty(chart.groupoid().clone(), y)?.then(chart, lambda)
    }

    /// Multiplies on the left by the chart point `(lambda, t(self))`.
    pub fn then(mut self, chart: &Arc<Chart>, lambda: &[f64]) -> Result<Self, HolonomyError> {
        if !same_groupoid(chart.groupoid(), &self.groupoid) {
            return Err(HolonomyError::GroupoidMismatch);
        }
        let point = ChartPoint::new(chart.clone(), lambda.to_vec(), self.target.clone())?;
        let g = point.eval()?;
        self.target = self.groupoid.target(&g);
        self.factors.insert(0, point);
        self.raw_bases.insert(0, None);
        Ok(self)
    }

    /// Word from factors in product order. Each junction must match within
    /// the snapping tolerance and is snapped to the exact target of the
    /// following factor.
    pub fn from_factors(groupoid: Arc<GroupoidSpec>, factors: Vec<ChartPoint>) -> Result<Self, HolonomyError> {
        let Some(last) = factors.last() else {
            return Err(HolonomyError::Shape("use Word::empty for the empty word".into()));
        };
        let mut word = Word::empty(groupoid, &last.base)?;
        let domain = word.groupoid.base_domain();
        for point in factors.into_iter().rev() {
            if !same_groupoid(point.chart.groupoid(), &word.groupoid) {
                return Err(HolonomyError::GroupoidMismatch);
            }
            let gap = domain.distance(&point.base, &word.target);
            if gap > word.groupoid.snap_tolerance() {
                return Err(HolonomyError::NotComposable { distance: gap });
            }
            let raw = if point.base == word.target { None } else { Some(point.base.clone()) };
            word = word.then(&point.chart, &point.lambda)?;
            word.raw_bases[0] = raw;
        }
        Ok(word)
    }

    pub fn groupoid(&self) -> &Arc<GroupoidSpec> {
        &self.groupoid
    }

    pub fn source(&self) -> &[f64] {
        &self.source
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn factors(&self) -> &[ChartPoint] {
        &self.factors
    }

    pub fn raw_bases(&self) -> &[Option<Vec<f64>>] {
        &self.raw_bases
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// All factor parameters, concatenated in product order.
    pub fn lambdas(&self) -> Vec<f64> {
        self.factors.iter().flat_map(|p| p.lambda.iter().copied()).collect()
    }

    /// Same charts with new parameters (concatenated in product order),
    /// chained from the base point `y`.
    pub fn with_lambdas_at(&self, lambdas: &[f64], y: &[f64], checked: bool) -> Result<Self, HolonomyError> {
        let total: usize = self.factors.iter().map(|p| p.lambda.len()).sum();
        if lambdas.len() != total {
            return Err(HolonomyError::Shape(format!("expected {total} parameters, got {}", lambdas.len())));
        }
        let mut word = Word::empty(self.groupoid.clone(), y)?;
        let mut end = total;
        for point in self.factors.iter().rev() {
            let start = end - point.lambda.len();
            let lambda = &lambdas[start..end];
            end = start;
            if checked {
                word = word.then(&point.chart, lambda)?;
            } else {
                let g = point.chart.eval_unchecked(lambda, &word.target)?;
                let next = word.groupoid.target(&g);
                word.factors.insert(
                    0,
                    ChartPoint {
                        chart: point.chart.clone(),
                        lambda: lambda.to_vec(),
                        base: word.target.clone(),
                    },
                );
                word.raw_bases.insert(0, None);
                word.target = next;
            }
        }
        Ok(word)
    }

    /// The word with the same parameters, chained from `y`.
    pub fn rebase(&self, y: &[f64]) -> Result<Self, HolonomyError> {
        self.with_lambdas_at(&self.lambdas(), y, true)
    }

    /// Every parameter multiplied by `s`, chained from the same source.
    pub fn scaled(&self, s: f64) -> Result<Self, HolonomyError> {
        let l: Vec<f64> = self.lambdas().iter().map(|v| v * s).collect();
        self.with_lambdas_at(&l, &self.source, true)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Record<'a> {
            source: &'a [f64],
            factors: &'a [ChartPoint],
        }
        Record {
            source: &self.source,
            factors: &self.factors,
        }
        .serialize(serializer)
    }
}

/// Ordered groupoid product of the factor evaluations; the empty word maps
/// to the unit at its base point.
pub fn word_phi(w: &Word) -> Result<GroupoidElement, HolonomyError> {
    let g = w.groupoid();
    let mut acc = g.unit(w.source())?;
    for point in w.factors().iter().rev() {
        acc = g.multiply(&point.eval()?, &acc)?;
    }
    Ok(acc)
}

/// Concatenation `w1 * w2`, snapping the junction to `t(w2)`.
pub fn compose(w1: &Word, w2: &Word) -> Result<Word, HolonomyError> {
    if !same_groupoid(w1.groupoid(), w2.groupoid()) {
        return Err(HolonomyError::GroupoidMismatch);
    }
    let domain = w1.groupoid().base_domain();
    let gap = domain.distance(w1.source(), w2.target());
    if gap > w1.groupoid().snap_tolerance() {
        return Err(HolonomyError::NotComposable { distance: gap });
    }
    if w1.is_empty() {
        return Ok(w2.clone());
    }
    if w2.is_empty() {
        return Ok(w1.clone());
    }
    let mut factors = w1.factors.clone();
    let mut raw = w1.raw_bases.clone();
    let junction = factors.len() - 1;
    if factors[junction].base != w2.target {
        raw[junction] = Some(factors[junction].base.clone());
        factors[junction].base = w2.target.clone();
    }
    let target = if factors.len() == 1 {
        w1.groupoid().target(&factors[0].eval()?)
    } else {
        w1.target.clone()
    };
    factors.extend(w2.factors.iter().cloned());
    raw.extend(w2.raw_bases.iter().cloned());
    Ok(Word {
        groupoid: w1.groupoid.clone(),
        source: w2.source.clone(),
        target,
        factors,
        raw_bases: raw,
    })
}

/// Inverse word: factors reversed, each `(lambda, y) |-> (-lambda, t(lambda, y))`.
pub fn invert(w: &Word) -> Result<Word, HolonomyError> {
    let mut factors = Vec::with_capacity(w.len());
    for point in w.factors().iter().rev() {
        let neg: Vec<f64> = point.lambda.iter().map(|v| -v).collect();
        if !point.chart.lambda_box().contains(&neg) {
            return Err(HolonomyError::InverseOutOfDomain {
                chart: point.chart.id().to_string(),
                lambda: neg,
            });
        }
        let t = point.chart.target(&point.lambda, &point.base)?;
        factors.push(ChartPoint::new(point.chart.clone(), neg, t)?);
    }
    Ok(Word {
        groupoid: w.groupoid.clone(),
        source: w.target.clone(),
        target: w.source.clone(),
        raw_bases: vec![None; factors.len()],
        factors,
    })
}
