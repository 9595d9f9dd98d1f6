//! Transport of words along groupoid morphisms, inclusions of
//! subalgebroids, and lifts through coverings.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebroid::{AlgebroidMorphism, SingularSubalgebroid};
use crate::groupoid::{covering_lift_path, CoveringSpec, GroupoidElement, GroupoidModel, GroupoidSpec, LIFT_MAX_JUMP};
use crate::poly::rational::to_f64;

use super::chart::{Chart, ChartPoint, Region};
use super::word::{same_groupoid, word_phi, Word};
use super::HolonomyError;

/// Supported morphisms between models, all covering the identity of the
/// base (or of the point).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupoidMorphism {
    Identity,
    /// `G x| M -> M x M`, `(g, x) |-> (g . x, x)`.
    AnchorToPair,
    Covering(CoveringSpec),
}

impl GroupoidMorphism {
    fn check(&self, source: &GroupoidSpec, target: &GroupoidSpec) -> Result<(), HolonomyError> {
        let ok = match self {
            GroupoidMorphism::Identity => source.model() == target.model(),
            GroupoidMorphism::AnchorToPair => {
                matches!(source.model(), GroupoidModel::Transformation { .. })
                    && matches!(target.model(), GroupoidModel::PairBox { .. } | GroupoidModel::PairTorus { .. })
                    && source.base_dim() == target.base_dim()
                    && source.base_domain().is_torus() == target.base_domain().is_torus()
            }
            GroupoidMorphism::Covering(cov) => {
                cov.source_spec()?.model() == source.model() && cov.target_spec()?.model() == target.model()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(HolonomyError::Unsupported(format!(
                "{self:?} does not map {} to {}",
                source.tag(),
                target.tag()
            )))
        }
    }

    pub fn apply(
        &self,
        source: &GroupoidSpec,
        target: &GroupoidSpec,
        g: &GroupoidElement,
    ) -> Result<GroupoidElement, HolonomyError> {
        self.check(source, target)?;
        match self {
            GroupoidMorphism::Identity => Ok(g.clone()),
            GroupoidMorphism::AnchorToPair => Ok(target.pair_element(&source.target(g), &source.source(g))?),
            GroupoidMorphism::Covering(cov) => Ok(cov.project(g)?),
        }
    }

    /// Induced morphism of algebroids in the model frames.
    pub fn algebroid_map(&self, source: &GroupoidSpec) -> AlgebroidMorphism {
        match self {
            GroupoidMorphism::Identity => AlgebroidMorphism::identity(source.base_dim(), source.rank()),
            GroupoidMorphism::AnchorToPair => AlgebroidMorphism::anchor(source.presentation()),
            GroupoidMorphism::Covering(cov) => cov.algebroid_map(),
        }
    }
}

/// The word over `target_sub` whose factors use the pushed-forward
/// generators with the same parameters. Each pushed generator must lie in
/// `target_sub` (exact solve at its degree bound).
pub fn pushforward_word(
    w: &Word,
    morphism: &GroupoidMorphism,
    target: &Arc<GroupoidSpec>,
    target_sub: &Arc<SingularSubalgebroid>,
) -> Result<Word, HolonomyError> {
    let source = w.groupoid();
    morphism.check(source, target)?;
    let map = morphism.algebroid_map(source);
    if matches!(morphism, GroupoidMorphism::Identity) && target_sub.generators().iter().eq(w
        .factors()
        .first()
        .map(|p| p.chart.subalgebroid().generators())
        .unwrap_or(&[])
        .iter())
    {
        return Ok(w.clone());
    }
    if w.is_empty() {
        return Word::empty(target.clone(), w.source());
    }
    let target_domain = target.base_domain();
    let mut charts: HashMap<String, Arc<Chart>> = HashMap::new();
    let mut factors = Vec::with_capacity(w.len());
    for point in w.factors() {
        let chart = &point.chart;
        let pushed = match charts.get(chart.id()) {
            Some(c) => c.clone(),
            None => {
                let sections = chart
                    .generators()
                    .iter()
                    .map(|s| map.apply(s))
                    .collect::<Result<Vec<_>, _>>()?;
                let base_box = if target_domain.dim() == chart.base_box().dim() {
                    chart.base_box().clone()
                } else {
                    Region::symmetric(target_domain.dim(), 0.0)
                };
                let c = Arc::new(
                    Chart::from_sections(
                        format!("{}>{}", chart.id(), target.tag()),
                        target_sub.clone(),
                        sections,
                        target.clone(),
                        chart.lambda_box().clone(),
                        base_box,
                    )?
                    .with_rk(*chart.rk()),
                );
                charts.insert(chart.id().to_string(), c.clone());
                c
            }
        };
        factors.push(ChartPoint::new(pushed, point.lambda.clone(), point.base.clone())?);
    }
    Word::from_factors(target.clone(), factors)
}

/// The word re-expressed in a chart of a larger subalgebroid. Each
/// generator of the word's charts must be a constant combination of the
/// big chart's generators; parameters are mapped linearly, so that the
/// flowed section, and hence `Phi`, is unchanged.
pub fn include_word(w: &Word, big: &Arc<Chart>) -> Result<Word, HolonomyError> {
    if !same_groupoid(w.groupoid(), big.groupoid()) {
        return Err(HolonomyError::GroupoidMismatch);
    }
    if w.is_empty() {
        return Word::empty(w.groupoid().clone(), w.source());
    }
    let max_deg = big.generators().iter().filter_map(|g| g.degree()).max().unwrap_or(0);
    let span = SingularSubalgebroid::new(
        big.groupoid().presentation().clone(),
        big.generators().to_vec(),
        max_deg,
    )?;
    let mut maps: HashMap<String, Vec<Vec<f64>>> = HashMap::new();
    let mut factors = Vec::with_capacity(w.len());
    for point in w.factors() {
        let chart = &point.chart;
        if !maps.contains_key(chart.id()) {
            let mut columns = Vec::new();
            for g in chart.generators() {
                let coeffs = span
                    .solve_membership(g, 0)?
                    .ok_or_else(|| HolonomyError::NonExpressible { section: g.to_string() })?;
                columns.push(coeffs.iter().map(|c| to_f64(&c.constant_term())).collect());
            }
            maps.insert(chart.id().to_string(), columns);
        }
        let columns = &maps[chart.id()];
        let mut lambda = vec![0.0; big.num_params()];
        for (l, col) in point.lambda.iter().zip(columns) {
            for (out, c) in lambda.iter_mut().zip(col) {
                *out += l * c;
            }
        }
        factors.push(ChartPoint::new(big.clone(), lambda, point.base.clone())?);
    }
    Word::from_factors(w.groupoid().clone(), factors)
}

/// Number of uniform samples of `t |-> Phi(w scaled by t)` before refinement.
pub const LIFT_SAMPLES: usize = 64;

/// The pair `(w, g~)` where `g~` is the endpoint of the lift through the
/// covering of the path `t |-> Phi(w scaled by t)`, `t in [0, 1]`.
pub fn covering_lift_word(w: &Word, cov: &CoveringSpec) -> Result<(Word, GroupoidElement), HolonomyError> {
    let target = cov.target_spec()?;
    if w.groupoid().model() != target.model() {
        return Err(HolonomyError::Unsupported(format!(
            "word lives on {}, covering targets {}",
            w.groupoid().tag(),
            target.tag()
        )));
    }
    let g = w.groupoid();
    let sample = |t: f64| -> Result<GroupoidElement, HolonomyError> {
        if t == 0.0 {
            Ok(g.unit(w.source())?)
        } else {
            word_phi(&w.scaled(t)?)
        }
    };
    let mut path: Vec<(f64, GroupoidElement)> = Vec::with_capacity(LIFT_SAMPLES + 1);
    for i in 0..=LIFT_SAMPLES {
        let t = i as f64 / LIFT_SAMPLES as f64;
        path.push((t, sample(t)?));
    }
    // Bisect intervals whose endpoints are far apart until every jump is
    // well inside the lifting bound.
    let mut i = 0;
    let mut refinements = 0;
    while i + 1 < path.len() {
        let jump = g.distance(&path[i].1, &path[i + 1].1)?;
        if jump >= 0.5 * LIFT_MAX_JUMP && refinements < 4096 {
            let mid = 0.5 * (path[i].0 + path[i + 1].0);
            path.insert(i + 1, (mid, sample(mid)?));
            refinements += 1;
        } else {
            i += 1;
        }
    }
    let elements: Vec<GroupoidElement> = path.into_iter().map(|(_, e)| e).collect();
    let lift = covering_lift_path(cov, &elements)?;
    Ok((w.clone(), lift))
}
