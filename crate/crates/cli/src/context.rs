//! Resolution of scenario blocks into kernel objects.

use std::collections::BTreeMap;
use std::sync::Arc;

use holonoid::algebroid::{AlgebroidPresentation, Patch, Section, SingularSubalgebroid, DEFAULT_DEGREE_BOUND};
use holonoid::groupoid::{BaseDomain, CoveringSpec, GroupAction, GroupTag, GroupoidSpec, MatrixGroup};
use holonoid::holonomy::{Chart, EquivParams, Membership, QuotientOracle, Region, Word};
use holonoid::ode::RkParams;
use holonoid::poly::{parse_rational, PolyVector, Polynomial, QMatrix, Rational};
use serde::Serialize;
use thiserror::Error;

use crate::schema::*;

/// A problem with a scenario, attributed to the block where it occurs.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("{block}: {message}")]
pub struct Diagnostic {
    pub block: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(block: impl Into<String>, message: impl ToString) -> Self {
        Diagnostic {
            block: block.into(),
            message: message.to_string(),
        }
    }
}

/// Command-line values that replace scenario settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol_phi: Option<f64>,
    pub tol_residual: Option<f64>,
    pub rk_step: Option<f64>,
    pub degree_bound: Option<u32>,
}

/// Settings after overrides, as recorded in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Effective {
    pub seed: u64,
    pub equiv: EquivParams,
    pub rk: RkParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_bound: Option<u32>,
}

impl Effective {
    pub fn resolve(settings: &Settings, overrides: &Overrides) -> Result<Self, Diagnostic> {
        let mut equiv = EquivParams::default();
        if let Some(t) = overrides.tol_phi.or(settings.tol_phi) {
            equiv.tol_phi = t;
        }
        if let Some(t) = overrides.tol_residual.or(settings.tol_residual) {
            equiv.tol_residual = t;
        }
        let mut rk = RkParams::default();
        if let Some(h) = overrides.rk_step.or(settings.rk_step) {
            rk.step = h;
        }
        for (name, v) in [("tol_phi", equiv.tol_phi), ("tol_residual", equiv.tol_residual), ("rk_step", rk.step)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Diagnostic::new("settings", format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Effective {
            seed: overrides.seed.unwrap_or(settings.seed),
            equiv,
            rk,
            degree_bound: overrides.degree_bound.or(settings.degree_bound),
        })
    }
}

pub struct Context {
    pub effective: Effective,
    pub presentations: BTreeMap<String, Arc<AlgebroidPresentation>>,
    pub groupoids: BTreeMap<String, Arc<GroupoidSpec>>,
    pub subalgebroids: BTreeMap<String, Arc<SingularSubalgebroid>>,
    pub charts: BTreeMap<String, Arc<Chart>>,
    pub oracles: BTreeMap<String, QuotientOracle>,
}

fn rationals(block: &str, texts: &[String]) -> Result<Vec<Rational>, Diagnostic> {
    texts
        .iter()
        .map(|t| parse_rational(t).map_err(|e| Diagnostic::new(block, format!("{t:?}: {e}"))))
        .collect()
}

fn section(block: &str, texts: &[String], n: usize) -> Result<Section, Diagnostic> {
    PolyVector::parse(texts, n).map_err(|e| Diagnostic::new(block, e))
}

fn group_tag(g: GroupName) -> GroupTag {
    match g {
        GroupName::Gl => GroupTag::GL,
        GroupName::So => GroupTag::SO,
        GroupName::Translation => GroupTag::Translation,
        GroupName::Torus => GroupTag::Torus,
    }
}

pub fn covering_spec(c: &CoveringBlock) -> CoveringSpec {
    match *c {
        CoveringBlock::ActionOverTorusPair { dim } => CoveringSpec::ActionOverTorusPair { dim },
        CoveringBlock::VectorGroupOverTorus { dim } => CoveringSpec::VectorGroupOverTorus { dim },
    }
}

fn presentation(block: &str, p: &PresentationBlock) -> Result<AlgebroidPresentation, Diagnostic> {
    let err = |e: holonoid::algebroid::AlgebroidError| Diagnostic::new(block, e);
    match p {
        PresentationBlock::Tangent { n } => Ok(AlgebroidPresentation::tangent(*n)),
        PresentationBlock::Poisson { matrix } => {
            let n = matrix.len();
            let rows = matrix
                .iter()
                .map(|r| {
                    if r.len() != n {
                        return Err(Diagnostic::new(block, format!("Poisson matrix must be {n} x {n}")));
                    }
                    rationals(block, r)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let pi = QMatrix::from_rows(rows, n).map_err(|e| Diagnostic::new(block, e))?;
            AlgebroidPresentation::cotangent_constant_poisson(&pi).map_err(err)
        }
        PresentationBlock::LieAlgebra { n, constants } => {
            let r = constants.len();
            let mut c = Vec::with_capacity(r);
            for (i, plane) in constants.iter().enumerate() {
                if plane.len() != r || plane.iter().any(|row| row.len() != r) {
                    return Err(Diagnostic::new(block, format!("constants[{i}] must be {r} x {r}")));
                }
                c.push(plane.iter().map(|row| rationals(block, row)).collect::<Result<Vec<_>, _>>()?);
            }
            AlgebroidPresentation::lie_algebra_bundle(*n, &c).map_err(err)
        }
        PresentationBlock::Explicit { n, r, anchor, structure } => {
            let rows = anchor
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|t| Polynomial::parse(t, *n).map_err(|e| Diagnostic::new(block, format!("anchor {t:?}: {e}"))))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut map = BTreeMap::new();
            for e in structure {
                map.insert((e.i, e.j), section(block, &e.coefficients, *n)?);
            }
            AlgebroidPresentation::new(*n, *r, rows, map)
                .map_err(|e| Diagnostic::new(format!("{block}.{}", shape_block(&e)), e))
        }
    }
}

fn shape_block(e: &holonoid::algebroid::AlgebroidError) -> String {
    match e {
        holonoid::algebroid::AlgebroidError::Shape { block, .. } => block.clone(),
        _ => "shape".into(),
    }
}

fn groupoid(block: &str, g: &GroupoidBlock) -> Result<GroupoidSpec, Diagnostic> {
    let err = |e: holonoid::groupoid::GroupoidError| Diagnostic::new(block, e);
    let (spec, snap) = match g {
        GroupoidBlock::PairBox {
            lower,
            upper,
            snap_tolerance,
        } => (GroupoidSpec::pair_box(lower.clone(), upper.clone()).map_err(err)?, *snap_tolerance),
        GroupoidBlock::PairTorus { dim, snap_tolerance } => (GroupoidSpec::pair_torus(*dim).map_err(err)?, *snap_tolerance),
        GroupoidBlock::MatrixGroup { group, k } => (GroupoidSpec::matrix_group(group_tag(*group), *k).map_err(err)?, None),
        GroupoidBlock::Transformation {
            group,
            k,
            base,
            action,
            snap_tolerance,
        } => {
            let mg = MatrixGroup::new(group_tag(*group), *k, 1e-9).map_err(err)?;
            let base = match base {
                BaseBlock::Box { lower, upper } => BaseDomain::Box {
                    lower: lower.clone(),
                    upper: upper.clone(),
                },
                BaseBlock::Torus { dim } => BaseDomain::Torus { dim: *dim },
            };
            let action = match action {
                ActionBlock::Linear => GroupAction::Linear,
                ActionBlock::Translation(rows) => {
                    let cols = rows.first().map_or(0, Vec::len);
                    let q = rows.iter().map(|r| rationals(block, r)).collect::<Result<Vec<_>, _>>()?;
                    GroupAction::Translation(QMatrix::from_rows(q, cols).map_err(|e| Diagnostic::new(block, e))?)
                }
            };
            (GroupoidSpec::transformation(mg, base, action).map_err(err)?, *snap_tolerance)
        }
    };
    Ok(match snap {
        Some(t) => spec.with_snap_tolerance(t),
        None => spec,
    })
}

fn region(block: &str, r: &RegionBlock) -> Result<Region, Diagnostic> {
    Region::new(r.lower.clone(), r.upper.clone()).map_err(|e| Diagnostic::new(block, e))
}

impl Context {
    /// Resolves every block; the first problem found is returned.
    pub fn build(s: &Scenario, overrides: &Overrides) -> Result<Self, Diagnostic> {
        if s.schema_version != SCHEMA_VERSION {
            return Err(Diagnostic::new(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", s.schema_version),
            ));
        }
        let effective = Effective::resolve(&s.settings, overrides)?;
        let mut presentations = BTreeMap::new();
        for (name, p) in &s.presentations {
            let block = format!("presentations.{name}");
            presentations.insert(name.clone(), Arc::new(presentation(&block, p)?));
        }
        let mut groupoids = BTreeMap::new();
        for (name, g) in &s.groupoids {
            let block = format!("groupoids.{name}");
            groupoids.insert(name.clone(), Arc::new(groupoid(&block, g)?));
        }
        let mut subalgebroids = BTreeMap::new();
        for (name, b) in &s.subalgebroids {
            let block = format!("subalgebroids.{name}");
            let p = presentations
                .get(&b.presentation)
                .cloned()
                .or_else(|| groupoids.get(&b.presentation).map(|g: &Arc<GroupoidSpec>| g.presentation().clone()))
                .ok_or_else(|| Diagnostic::new(&block, format!("unknown presentation {:?}", b.presentation)))?;
            let n = p.base_dim();
            let gens = b
                .generators
                .iter()
                .map(|g| section(&block, g, n))
                .collect::<Result<Vec<_>, _>>()?;
            let bound = effective.degree_bound.or(b.degree_bound).unwrap_or(DEFAULT_DEGREE_BOUND);
            let sub = match &b.patch {
                Some(patch) => {
                    let patch = Patch::new(rationals(&block, &patch.lower)?, rationals(&block, &patch.upper)?)
                        .map_err(|e| Diagnostic::new(&block, e))?;
                    SingularSubalgebroid::with_patch(p, gens, bound, patch)
                }
                None => SingularSubalgebroid::new(p, gens, bound),
            }
            .map_err(|e| Diagnostic::new(&block, e))?;
            subalgebroids.insert(name.clone(), Arc::new(sub));
        }
        let mut charts = BTreeMap::new();
        for (name, c) in &s.charts {
            let block = format!("charts.{name}");
            let sub = subalgebroids
                .get(&c.subalgebroid)
                .ok_or_else(|| Diagnostic::new(&block, format!("unknown subalgebroid {:?}", c.subalgebroid)))?;
            let g = groupoids
                .get(&c.groupoid)
                .ok_or_else(|| Diagnostic::new(&block, format!("unknown groupoid {:?}", c.groupoid)))?;
            let idx = c.generators.clone().unwrap_or_else(|| (0..sub.num_generators()).collect());
            let mut chart = Chart::new(
                name.clone(),
                sub.clone(),
                idx,
                g.clone(),
                region(&format!("{block}.lambda_box"), &c.lambda_box)?,
                region(&format!("{block}.base_box"), &c.base_box)?,
            )
            .map_err(|e| Diagnostic::new(&block, e))?
            .with_rk(effective.rk);
            if let Some(x) = &c.minimal_at {
                chart = chart.with_minimal_at(x.clone()).map_err(|e| Diagnostic::new(&block, e))?;
            }
            charts.insert(name.clone(), Arc::new(chart));
        }
        let mut oracles = BTreeMap::new();
        for (name, o) in &s.oracles {
            let block = format!("oracles.{name}");
            let k = groupoids
                .get(&o.presenting)
                .ok_or_else(|| Diagnostic::new(&block, format!("unknown groupoid {:?}", o.presenting)))?;
            let sub = subalgebroids
                .get(&o.subalgebroid)
                .ok_or_else(|| Diagnostic::new(&block, format!("unknown subalgebroid {:?}", o.subalgebroid)))?;
            let lifts = o
                .lifts
                .iter()
                .map(|l| section(&block, l, k.base_dim()))
                .collect::<Result<Vec<_>, _>>()?;
            let membership = match o.membership {
                MembershipBlock::Trivial { tolerance } => Membership::Trivial { tolerance },
                MembershipBlock::AngleKernel { period, tolerance } => Membership::AngleKernel { period, tolerance },
            };
            let oracle = QuotientOracle::new(k.clone(), sub.generators().to_vec(), lifts, membership)
                .map_err(|e| Diagnostic::new(&block, e))?
                .with_rk(effective.rk);
            oracles.insert(name.clone(), oracle);
        }
        Ok(Context {
            effective,
            presentations,
            groupoids,
            subalgebroids,
            charts,
            oracles,
        })
    }

    pub fn chart(&self, block: &str, name: &str) -> Result<&Arc<Chart>, Diagnostic> {
        self.charts
            .get(name)
            .ok_or_else(|| Diagnostic::new(block, format!("unknown chart {name:?}")))
    }

    pub fn subalgebroid(&self, block: &str, name: &str) -> Result<&Arc<SingularSubalgebroid>, Diagnostic> {
        self.subalgebroids
            .get(name)
            .ok_or_else(|| Diagnostic::new(block, format!("unknown subalgebroid {name:?}")))
    }

    pub fn groupoid(&self, block: &str, name: &str) -> Result<&Arc<GroupoidSpec>, Diagnostic> {
        self.groupoids
            .get(name)
            .ok_or_else(|| Diagnostic::new(block, format!("unknown groupoid {name:?}")))
    }

    pub fn oracle(&self, block: &str, name: Option<&String>) -> Result<Option<&QuotientOracle>, Diagnostic> {
        name.map(|n| {
            self.oracles
                .get(n)
                .ok_or_else(|| Diagnostic::new(block, format!("unknown oracle {n:?}")))
        })
        .transpose()
    }

    pub fn word(&self, block: &str, w: &WordBlock) -> Result<Word, Diagnostic> {
        let err = |e: holonoid::holonomy::HolonomyError| Diagnostic::new(block, e);
        if !w.factors.is_empty() {
            if !w.steps.is_empty() {
                return Err(Diagnostic::new(block, "give either factors or steps"));
            }
            let mut points = Vec::with_capacity(w.factors.len());
            for f in &w.factors {
                let chart = self.chart(block, &f.chart)?;
                points.push(
                    holonoid::holonomy::ChartPoint::new(chart.clone(), f.lambda.clone(), f.base.clone()).map_err(err)?,
                );
            }
            let g = points[0].chart.groupoid().clone();
            let word = Word::from_factors(g, points).map_err(err)?;
            if let Some(x) = &w.source {
                let d = word.groupoid().base_domain().distance(x, word.source());
                if d > word.groupoid().snap_tolerance() {
                    return Err(Diagnostic::new(block, format!("source {x:?} does not match the factors")));
                }
            }
            return Ok(word);
        }
        let source = w
            .source
            .as_ref()
            .ok_or_else(|| Diagnostic::new(block, "a word needs a source or factors"))?;
        let groupoid = match (&w.groupoid, w.steps.first()) {
            (Some(g), _) => self.groupoid(block, g)?.clone(),
            (None, Some(step)) => self.chart(block, &step.chart)?.groupoid().clone(),
            (None, None) => return Err(Diagnostic::new(block, "an empty word needs its groupoid")),
        };
        let mut word = Word::empty(groupoid, source).map_err(err)?;
        for step in &w.steps {
            word = word.then(self.chart(block, &step.chart)?, &step.lambda).map_err(err)?;
        }
        Ok(word)
    }
}
