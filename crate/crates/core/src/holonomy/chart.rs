//! Path-holonomy charts `(lambda, y) |-> exp_y(sum_i lambda_i alpha_i)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::algebroid::{Section, SingularSubalgebroid};
use crate::groupoid::{GroupoidElement, GroupoidSpec, NumericSection};
use crate::ode::RkParams;
use crate::poly::rational::from_f64;

use super::HolonomyError;

/// Axis-aligned closed box; degenerate axes are allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

const REGION_SLACK: f64 = 1e-12;

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, HolonomyError> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(a, b)| !(a <= b)) {
            return Err(HolonomyError::Shape("region needs matching bounds with lower <= upper".into()));
        }
        Ok(Region { lower, upper })
    }

    /// `[-h, h]^dim`.
    pub fn symmetric(dim: usize, h: f64) -> Self {
        Region {
            lower: vec![-h; dim],
            upper: vec![h; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| *a - REGION_SLACK <= *v && *v <= *b + REGION_SLACK)
    }

    /// `density` evenly spaced values per axis, endpoints included; a single
    /// value means the midpoint.
    pub fn grid(&self, density: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| {
                if density <= 1 || a == b {
                    vec![0.5 * (a + b)]
                } else {
                    (0..density).map(|i| a + (b - a) * i as f64 / (density - 1) as f64).collect()
                }
            })
            .collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

/// A path-holonomy chart of a subalgebroid over a groupoid model.
#[derive(Debug, Clone)]
pub struct Chart {
    id: String,
    subalgebroid: Arc<SingularSubalgebroid>,
    gen_idx: Option<Vec<usize>>,
    generators: Vec<Section>,
    fields: Vec<NumericSection>,
    groupoid: Arc<GroupoidSpec>,
    lambda_box: Region,
    base_box: Region,
    minimal_at: Option<Vec<f64>>,
    rk: RkParams,
}

impl Chart {
    /// Chart of the generators `gen_idx` of `subalgebroid`.
    pub fn new(
        id: impl Into<String>,
        subalgebroid: Arc<SingularSubalgebroid>,
        gen_idx: Vec<usize>,
        groupoid: Arc<GroupoidSpec>,
        lambda_box: Region,
        base_box: Region,
    ) -> Result<Self, HolonomyError> {
        let generators = gen_idx
            .iter()
            .map(|&i| {
                subalgebroid
                    .generators()
                    .get(i)
                    .cloned()
                    .ok_or_else(|| HolonomyError::Shape(format!("generator index {i} out of range")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::build(id.into(), subalgebroid, Some(gen_idx), generators, groupoid, lambda_box, base_box)
    }

    /// Chart of arbitrary sections, each verified to lie in the module by
    /// an exact coefficient solve at the subalgebroid's degree bound.
    pub fn from_sections(
        id: impl Into<String>,
        subalgebroid: Arc<SingularSubalgebroid>,
        sections: Vec<Section>,
        groupoid: Arc<GroupoidSpec>,
        lambda_box: Region,
        base_box: Region,
    ) -> Result<Self, HolonomyError> {
        for s in &sections {
            if subalgebroid.solve_membership(s, subalgebroid.degree_bound())?.is_none() {
                return Err(HolonomyError::NotMember {
                    section: s.to_string(),
                });
            }
        }
        let gen_idx = sections
            .iter()
            .map(|s| subalgebroid.generators().iter().position(|g| g == s))
            .collect::<Option<Vec<usize>>>();
        Self::build(id.into(), subalgebroid, gen_idx, sections, groupoid, lambda_box, base_box)
    }

    fn build(
        id: String,
        subalgebroid: Arc<SingularSubalgebroid>,
        gen_idx: Option<Vec<usize>>,
        generators: Vec<Section>,
        groupoid: Arc<GroupoidSpec>,
        lambda_box: Region,
        base_box: Region,
    ) -> Result<Self, HolonomyError> {
        if subalgebroid.presentation() != groupoid.presentation().as_ref() {
            return Err(HolonomyError::Shape(format!(
                "chart {id}: subalgebroid presentation differs from the algebroid of the {} model",
                groupoid.tag()
            )));
        }
        if lambda_box.dim() != generators.len() || !lambda_box.contains(&vec![0.0; generators.len()]) {
            return Err(HolonomyError::Shape(format!(
                "chart {id}: lambda box must have dimension {} and contain 0",
                generators.len()
            )));
        }
        let domain = groupoid.base_domain();
        if base_box.dim() != domain.dim()
            || !domain.contains(&base_box.lower)
            || !domain.contains(&base_box.upper)
        {
            return Err(HolonomyError::Shape(format!(
                "chart {id}: base box must be a sub-box of the {} base",
                groupoid.tag()
            )));
        }
        let fields: Vec<NumericSection> = generators.iter().map(NumericSection::compile).collect();
        for f in &fields {
            groupoid.check_section(f)?;
        }
        Ok(Chart {
            id,
            subalgebroid,
            gen_idx,
            generators,
            fields,
            groupoid,
            lambda_box,
            base_box,
            minimal_at: None,
            rk: RkParams::default(),
        })
    }

    pub fn with_rk(mut self, rk: RkParams) -> Self {
        self.rk = rk;
        self
    }

    /// Records a point where the generators are a minimal generating set;
    /// fails unless their number equals the fiber dimension there.
    pub fn with_minimal_at(mut self, x: Vec<f64>) -> Result<Self, HolonomyError> {
        let exact: Vec<_> = x
            .iter()
            .map(|v| from_f64(*v).ok_or_else(|| HolonomyError::Shape("non-finite point".into())))
            .collect::<Result<_, _>>()?;
        let fiber = self.subalgebroid.fiber_dim_at(&exact, self.subalgebroid.degree_bound())?;
        if fiber.dim != self.generators.len() {
            return Err(HolonomyError::Shape(format!(
                "chart {}: {} generators but fiber dimension {} at {:?}",
                self.id,
                self.generators.len(),
                fiber.dim,
                x
            )));
        }
        self.minimal_at = Some(x);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn subalgebroid(&self) -> &Arc<SingularSubalgebroid> {
        &self.subalgebroid
    }

    pub fn gen_idx(&self) -> Option<&[usize]> {
        self.gen_idx.as_deref()
    }

    pub fn generators(&self) -> &[Section] {
        &self.generators
    }

    pub fn num_params(&self) -> usize {
        self.generators.len()
    }

    pub fn groupoid(&self) -> &Arc<GroupoidSpec> {
        &self.groupoid
    }

    pub fn lambda_box(&self) -> &Region {
        &self.lambda_box
    }

    pub fn base_box(&self) -> &Region {
        &self.base_box
    }

    pub fn minimal_at(&self) -> Option<&[f64]> {
        self.minimal_at.as_deref()
    }

    pub fn rk(&self) -> &RkParams {
        &self.rk
    }

    pub(crate) fn check_domain(&self, lambda: &[f64], y: &[f64]) -> Result<(), HolonomyError> {
        if !self.lambda_box.contains(lambda) {
            return Err(HolonomyError::ChartDomain {
                chart: self.id.clone(),
                lambda: lambda.to_vec(),
                base: y.to_vec(),
            });
        }
        if !self.base_box.contains(y) {
            return Err(HolonomyError::ChartDomain {
                chart: self.id.clone(),
                lambda: lambda.to_vec(),
                base: y.to_vec(),
            });
        }
        Ok(())
    }

    pub fn section_at(&self, lambda: &[f64]) -> NumericSection {
        NumericSection::combination(&self.fields, lambda)
    }

    /// Flow without the chart box checks; only the groupoid domain applies.
    pub(crate) fn eval_unchecked(&self, lambda: &[f64], y: &[f64]) -> Result<GroupoidElement, HolonomyError> {
        let unit = self.groupoid.unit(y)?;
        Ok(self
            .groupoid
            .right_invariant_flow(&self.section_at(lambda), &unit, 1.0, &self.rk)?)
    }

    /// Time-one flow of the right-invariant extension of
    /// `sum_i lambda_i alpha_i` from the unit at `y`.
    pub fn eval(&self, lambda: &[f64], y: &[f64]) -> Result<GroupoidElement, HolonomyError> {
        let y = self.groupoid.base_domain().wrapped(y);
        self.check_domain(lambda, &y)?;
        self.eval_unchecked(lambda, &y)
    }

    pub fn target(&self, lambda: &[f64], y: &[f64]) -> Result<Vec<f64>, HolonomyError> {
        Ok(self.groupoid.target(&self.eval(lambda, y)?))
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chart {} over {}", self.id, self.groupoid.tag())
    }
}

pub fn chart_eval(c: &Chart, lambda: &[f64], y: &[f64]) -> Result<GroupoidElement, HolonomyError> {
    c.eval(lambda, y)
}

/// A point `(lambda, y)` of a chart.
#[derive(Debug, Clone)]
pub struct ChartPoint {
    pub chart: Arc<Chart>,
    pub lambda: Vec<f64>,
    pub base: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: Arc<Chart>, lambda: Vec<f64>, base: Vec<f64>) -> Result<Self, HolonomyError> {
        let base = chart.groupoid().base_domain().wrapped(&base);
        chart.check_domain(&lambda, &base)?;
        Ok(ChartPoint { chart, lambda, base })
    }

    pub fn eval(&self) -> Result<GroupoidElement, HolonomyError> {
        self.chart.eval(&self.lambda, &self.base)
    }
}

impl Serialize for ChartPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Record<'a> {
            chart: &'a str,
            lambda: &'a [f64],
            base: &'a [f64],
        }
        Record {
            chart: self.chart.id(),
            lambda: &self.lambda,
            base: &self.base,
        }
        .serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFailure {
    pub lambda: Vec<f64>,
    pub base: Vec<f64>,
    /// Smallest singular value of the Jacobian of `t o phi`, or `None` when
    /// the evaluation itself failed.
    pub singular_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainReport {
    pub passed: bool,
    pub points_checked: usize,
    pub min_singular_value: f64,
    pub failure: Option<GridFailure>,
}

/// Smallest accepted singular value of the Jacobian of `t o phi`.
pub const SUBMERSION_TOLERANCE: f64 = 1e-6;

/// Checks on a grid over `lambda_box x base_box` that `t o phi` is a
/// submersion, with central-difference Jacobians.
pub fn chart_domain_check(c: &Chart, density: usize) -> DomainReport {
    let n = c.groupoid().base_dim();
    let k = c.num_params();
    let domain = c.groupoid().base_domain();
    let h = 1e-6;
    let mut checked = 0;
    let mut min_sv = f64::INFINITY;
    for lambda in c.lambda_box().grid(density) {
        for y in c.base_box().grid(density) {
            checked += 1;
            if n == 0 {
                if let Err(_) = c.eval_unchecked(&lambda, &y) {
                    return fail(checked, min_sv, lambda, y, None);
                }
                continue;
            }
            let target = |l: &[f64], b: &[f64]| c.eval_unchecked(l, b).map(|g| c.groupoid().target(&g));
            let Ok(center) = target(&lambda, &y) else {
                return fail(checked, min_sv, lambda, y, None);
            };
            let mut jac = DMatrix::<f64>::zeros(n, k + n);
            for col in 0..(k + n) {
                let shifted = |sign: f64| {
                    let mut l = lambda.clone();
                    let mut b = y.clone();
                    if col < k {
                        l[col] += sign * h;
                    } else {
                        b[col - k] += sign * h;
                    }
                    target(&l, &b)
                };
                // One-sided differences where the stencil leaves the domain.
                let (d, width) = match (shifted(1.0), shifted(-1.0)) {
                    (Ok(plus), Ok(minus)) => (domain.diff(&plus, &minus), 2.0 * h),
                    (Ok(plus), Err(_)) => (domain.diff(&plus, &center), h),
                    (Err(_), Ok(minus)) => (domain.diff(&center, &minus), h),
                    (Err(_), Err(_)) => return fail(checked, min_sv, lambda, y, None),
                };
                for (row, v) in d.iter().enumerate() {
                    jac[(row, col)] = v / width;
                }
            }
            let sv = jac.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
            min_sv = min_sv.min(sv);
            if !(sv >= SUBMERSION_TOLERANCE) {
                return fail(checked, min_sv, lambda, y, Some(sv));
            }
        }
    }
    DomainReport {
        passed: true,
        points_checked: checked,
        min_singular_value: min_sv,
        failure: None,
    }
}

fn fail(checked: usize, min_sv: f64, lambda: Vec<f64>, base: Vec<f64>, sv: Option<f64>) -> DomainReport {
    DomainReport {
        passed: false,
        points_checked: checked,
        min_singular_value: min_sv,
        failure: Some(GridFailure {
            lambda,
            base,
            singular_value: sv,
        }),
    }
}
