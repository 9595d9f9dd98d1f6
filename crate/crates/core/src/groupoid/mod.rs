//! Concrete Lie groupoid models: pair groupoids of a box or torus, matrix
//! groups, and transformation groupoids of linear or translation actions,
//! with tolerance-aware arrow arithmetic and right-invariant flows.

mod covering;
mod flow;
mod model;

pub use covering::{covering_lift_path, CoveringSpec, LIFT_MAX_JUMP};
pub use flow::NumericSection;
pub use model::{wrap_centered, wrap_unit, BaseDomain, GroupAction, GroupTag, MatrixGroup};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::ser::Serializer;
use serde::Serialize;
use thiserror::Error;

use crate::algebroid::{AlgebroidError, AlgebroidPresentation};
use crate::poly::{CompiledPoly, PolyVector, Polynomial, QMatrix};

use model::norm;

/// Default distance within which `s(g)` and `t(h)` count as equal.
pub const DEFAULT_SNAP_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupoidError {
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error("{0}")]
    Shape(String),
    #[error("point {0:?} lies outside the base domain")]
    OutOfDomain(Vec<f64>),
    #[error("arrows are not composable: |s(g) - t(h)| = {distance:e}")]
    NotComposable { distance: f64 },
    #[error("group membership residual {residual:e} exceeds tolerance")]
    Membership { residual: f64 },
    #[error("elements belong to different models")]
    ModelMismatch,
    #[error("trajectory left the domain at {sample:?} after time {time}")]
    DomainExit { sample: Vec<f64>, time: f64 },
    #[error("sections over a torus must be constant")]
    NonPeriodic,
    #[error("path sample {index} jumps {jump} in torus coordinates")]
    CoarseSampling { index: usize, jump: f64 },
    #[error("path does not start at a unit (distance {distance:e})")]
    NotAtUnit { distance: f64 },
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupoidModel {
    /// `M x M` for a box `M` in `R^n`.
    PairBox { lower: Vec<f64>, upper: Vec<f64> },
    /// `T^n x T^n`.
    PairTorus { dim: usize },
    MatrixGroup(MatrixGroup),
    /// `G x M` with `s(g, x) = x` and `t(g, x) = g . x`.
    Transformation {
        group: MatrixGroup,
        base: BaseDomain,
        action: GroupAction,
    },
}

/// A groupoid model together with its Lie algebroid, presented in the
/// frame induced by the model (coordinate fields for pair groupoids, the
/// matrix basis of [`MatrixGroup::basis`] otherwise).
#[derive(Debug, Clone)]
pub struct GroupoidSpec {
    model: GroupoidModel,
    presentation: Arc<AlgebroidPresentation>,
    basis: Vec<DMatrix<f64>>,
    anchor: Vec<Vec<CompiledPoly>>,
    snap_tolerance: f64,
}

impl GroupoidSpec {
    pub fn new(model: GroupoidModel) -> Result<Self, GroupoidError> {
        let presentation = Arc::new(canonical_presentation(&model)?);
        let basis = match &model {
            GroupoidModel::MatrixGroup(g) | GroupoidModel::Transformation { group: g, .. } => g.basis_f64(),
            _ => Vec::new(),
        };
        let anchor = presentation
            .anchor_matrix()
            .iter()
            .map(|row| row.iter().map(Polynomial::compile).collect())
            .collect();
        Ok(GroupoidSpec {
            model,
            presentation,
            basis,
            anchor,
            snap_tolerance: DEFAULT_SNAP_TOLERANCE,
        })
    }

    pub fn pair_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, GroupoidError> {
        Self::new(GroupoidModel::PairBox { lower, upper })
    }

    pub fn pair_torus(dim: usize) -> Result<Self, GroupoidError> {
        Self::new(GroupoidModel::PairTorus { dim })
    }

    pub fn matrix_group(tag: GroupTag, k: usize) -> Result<Self, GroupoidError> {
        Self::new(GroupoidModel::MatrixGroup(MatrixGroup::new(tag, k, 1e-9)?))
    }

    pub fn transformation(group: MatrixGroup, base: BaseDomain, action: GroupAction) -> Result<Self, GroupoidError> {
        Self::new(GroupoidModel::Transformation { group, base, action })
    }

    pub fn with_snap_tolerance(mut self, tol: f64) -> Self {
        self.snap_tolerance = tol;
        self
    }

    pub fn model(&self) -> &GroupoidModel {
        &self.model
    }

    pub fn presentation(&self) -> &Arc<AlgebroidPresentation> {
        &self.presentation
    }

    pub fn snap_tolerance(&self) -> f64 {
        self.snap_tolerance
    }

    pub fn base_dim(&self) -> usize {
        self.presentation.base_dim()
    }

    pub fn rank(&self) -> usize {
        self.presentation.rank()
    }

    pub fn base_domain(&self) -> BaseDomain {
        match &self.model {
            GroupoidModel::PairBox { lower, upper } => BaseDomain::Box {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            GroupoidModel::PairTorus { dim } => BaseDomain::Torus { dim: *dim },
            GroupoidModel::MatrixGroup(_) => BaseDomain::Point,
            GroupoidModel::Transformation { base, .. } => base.clone(),
        }
    }

    pub fn tag(&self) -> &'static str {
        match &self.model {
            GroupoidModel::PairBox { .. } => "pair_box",
            GroupoidModel::PairTorus { .. } => "pair_torus",
            GroupoidModel::MatrixGroup(_) => "matrix_group",
            GroupoidModel::Transformation { .. } => "transformation",
        }
    }

    fn group(&self) -> Option<&MatrixGroup> {
        match &self.model {
            GroupoidModel::MatrixGroup(g) | GroupoidModel::Transformation { group: g, .. } => Some(g),
            _ => None,
        }
    }

    pub(crate) fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    /// `rho(alpha)(y)` given `alpha(y)`.
    pub(crate) fn anchor_apply(&self, y: &[f64], alpha: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.anchor) {
            *o = row.iter().zip(alpha).map(|(p, a)| if *a == 0.0 { 0.0 } else { p.eval(y) * a }).sum();
        }
    }

    /// `g . x` for transformation groupoids.
    pub(crate) fn act(&self, g: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
        let GroupoidModel::Transformation { group, base, action } = &self.model else {
            return x.to_vec();
        };
        let mut y = match action {
            GroupAction::Linear => (0..x.len()).map(|i| (0..x.len()).map(|j| g[(i, j)] * x[j]).sum()).collect(),
            GroupAction::Translation(b) => {
                let v = group.offset(g);
                (0..x.len())
                    .map(|i| {
                        x[i] + (0..v.len())
                            .map(|j| crate::poly::rational::to_f64(b.get(i, j)) * v[j])
                            .sum::<f64>()
                    })
                    .collect::<Vec<f64>>()
            }
        };
        base.wrap(&mut y);
        y
    }

    fn checked_base(&self, x: &[f64]) -> Result<Vec<f64>, GroupoidError> {
        let domain = self.base_domain();
        if !domain.contains(x) {
            return Err(GroupoidError::OutOfDomain(x.to_vec()));
        }
        Ok(domain.wrapped(x))
    }

    pub fn unit(&self, x: &[f64]) -> Result<GroupoidElement, GroupoidError> {
        let x = self.checked_base(x)?;
        Ok(match &self.model {
            GroupoidModel::PairBox { .. } | GroupoidModel::PairTorus { .. } => GroupoidElement::Pair {
                target: x.clone(),
                source: x,
            },
            GroupoidModel::MatrixGroup(g) => GroupoidElement::Matrix(g.identity()),
            GroupoidModel::Transformation { group, .. } => GroupoidElement::Action {
                group: group.identity(),
                base: x,
            },
        })
    }

    pub fn source(&self, g: &GroupoidElement) -> Vec<f64> {
        match g {
            GroupoidElement::Pair { source, .. } => source.clone(),
            GroupoidElement::Matrix(_) => Vec::new(),
            GroupoidElement::Action { base, .. } => base.clone(),
        }
    }

    pub fn target(&self, g: &GroupoidElement) -> Vec<f64> {
        match g {
            GroupoidElement::Pair { target, .. } => target.clone(),
            GroupoidElement::Matrix(_) => Vec::new(),
            GroupoidElement::Action { group, base } => self.act(group, base),
        }
    }

    /// Checks that `g` is an arrow of this model.
    pub fn validate(&self, g: &GroupoidElement) -> Result<(), GroupoidError> {
        let domain = self.base_domain();
        let inside = |x: &[f64]| {
            if domain.contains(x) {
                Ok(())
            } else {
                Err(GroupoidError::OutOfDomain(x.to_vec()))
            }
        };
        match (&self.model, g) {
            (GroupoidModel::PairBox { .. } | GroupoidModel::PairTorus { .. }, GroupoidElement::Pair { target, source }) => {
                inside(target)?;
                inside(source)
            }
            (GroupoidModel::MatrixGroup(group), GroupoidElement::Matrix(m)) => membership(group, m),
            (GroupoidModel::Transformation { group, .. }, GroupoidElement::Action { group: m, base }) => {
                membership(group, m)?;
                inside(base)?;
                inside(&self.act(m, base))
            }
            _ => Err(GroupoidError::ModelMismatch),
        }
    }

    /// `g h`, defined when `s(g)` and `t(h)` agree within the snapping
    /// tolerance; the junction is snapped to `s(g)`.
    pub fn multiply(&self, g: &GroupoidElement, h: &GroupoidElement) -> Result<GroupoidElement, GroupoidError> {
        let domain = self.base_domain();
        let gap = domain.distance(&self.source(g), &self.target(h));
        if gap > self.snap_tolerance {
            return Err(GroupoidError::NotComposable { distance: gap });
        }
        match (g, h) {
            (GroupoidElement::Pair { target, .. }, GroupoidElement::Pair { source, .. }) => Ok(GroupoidElement::Pair {
                target: target.clone(),
                source: source.clone(),
            }),
            (GroupoidElement::Matrix(a), GroupoidElement::Matrix(b)) => {
                let group = self.group().ok_or(GroupoidError::ModelMismatch)?;
                Ok(GroupoidElement::Matrix(group.multiply(a, b)))
            }
            (GroupoidElement::Action { group: a, .. }, GroupoidElement::Action { group: b, base }) => {
                let group = self.group().ok_or(GroupoidError::ModelMismatch)?;
                Ok(GroupoidElement::Action {
                    group: group.multiply(a, b),
                    base: base.clone(),
                })
            }
            _ => Err(GroupoidError::ModelMismatch),
        }
    }

    pub fn invert(&self, g: &GroupoidElement) -> Result<GroupoidElement, GroupoidError> {
        match g {
            GroupoidElement::Pair { target, source } => Ok(GroupoidElement::Pair {
                target: source.clone(),
                source: target.clone(),
            }),
            GroupoidElement::Matrix(m) => {
                let group = self.group().ok_or(GroupoidError::ModelMismatch)?;
                Ok(GroupoidElement::Matrix(group.invert(m)?))
            }
            GroupoidElement::Action { group: m, base } => {
                let group = self.group().ok_or(GroupoidError::ModelMismatch)?;
                Ok(GroupoidElement::Action {
                    group: group.invert(m)?,
                    base: self.act(m, base),
                })
            }
        }
    }

    /// Coordinate difference `a - b`, wrapped on tori; its norm is the
    /// groupoid distance.
    pub fn difference(&self, a: &GroupoidElement, b: &GroupoidElement) -> Result<Vec<f64>, GroupoidError> {
        let domain = self.base_domain();
        match (a, b) {
            (
                GroupoidElement::Pair { target: ta, source: sa },
                GroupoidElement::Pair { target: tb, source: sb },
            ) => {
                let mut d = domain.diff(ta, tb);
                d.extend(domain.diff(sa, sb));
                Ok(d)
            }
            (GroupoidElement::Matrix(x), GroupoidElement::Matrix(y)) => {
                Ok(self.group().ok_or(GroupoidError::ModelMismatch)?.difference(x, y))
            }
            (GroupoidElement::Action { group: x, base: bx }, GroupoidElement::Action { group: y, base: by }) => {
                let mut d = self.group().ok_or(GroupoidError::ModelMismatch)?.difference(x, y);
                d.extend(domain.diff(bx, by));
                Ok(d)
            }
            _ => Err(GroupoidError::ModelMismatch),
        }
    }

    pub fn distance(&self, a: &GroupoidElement, b: &GroupoidElement) -> Result<f64, GroupoidError> {
        Ok(norm(&self.difference(a, b)?))
    }

    /// Distance from `g` to the unit at its source.
    pub fn distance_to_unit(&self, g: &GroupoidElement) -> Result<f64, GroupoidError> {
        let u = self.unit(&self.source(g))?;
        self.distance(g, &u)
    }

    /// Element of a matrix group or transformation groupoid from a group
    /// matrix, normalized onto the group.
    pub fn group_element(&self, m: DMatrix<f64>, base: &[f64]) -> Result<GroupoidElement, GroupoidError> {
        let group = self.group().ok_or(GroupoidError::ModelMismatch)?;
        let mut m = m;
        if m.nrows() != group.matrix_size() || m.ncols() != group.matrix_size() {
            return Err(GroupoidError::Shape(format!(
                "group matrices are {0}x{0}",
                group.matrix_size()
            )));
        }
        group.normalize(&mut m);
        let g = match &self.model {
            GroupoidModel::MatrixGroup(_) => GroupoidElement::Matrix(m),
            _ => GroupoidElement::Action {
                group: m,
                base: self.checked_base(base)?,
            },
        };
        self.validate(&g)?;
        Ok(g)
    }

    /// Pair-groupoid arrow `(target, source)`.
    pub fn pair_element(&self, target: &[f64], source: &[f64]) -> Result<GroupoidElement, GroupoidError> {
        if !matches!(self.model, GroupoidModel::PairBox { .. } | GroupoidModel::PairTorus { .. }) {
            return Err(GroupoidError::ModelMismatch);
        }
        Ok(GroupoidElement::Pair {
            target: self.checked_base(target)?,
            source: self.checked_base(source)?,
        })
    }

    /// Offset vector of a vector-group element (translation or torus),
    /// either bare or as the group part of an action arrow.
    pub fn offset(&self, g: &GroupoidElement) -> Option<Vec<f64>> {
        let group = self.group().filter(|g| g.is_vector_group())?;
        match g {
            GroupoidElement::Matrix(m) | GroupoidElement::Action { group: m, .. } => Some(group.offset(m)),
            _ => None,
        }
    }

    pub fn vector_group_element(&self, offset: &[f64], base: &[f64]) -> Result<GroupoidElement, GroupoidError> {
        let group = self
            .group()
            .filter(|g| g.is_vector_group() && g.k == offset.len())
            .ok_or(GroupoidError::ModelMismatch)?;
        self.group_element(group.from_offset(offset), base)
    }
}

fn membership(group: &MatrixGroup, m: &DMatrix<f64>) -> Result<(), GroupoidError> {
    let residual = group.membership_residual(m);
    if residual > group.tolerance {
        Err(GroupoidError::Membership { residual })
    } else {
        Ok(())
    }
}

fn canonical_presentation(model: &GroupoidModel) -> Result<AlgebroidPresentation, GroupoidError> {
    let shape = |m: &str| Err(GroupoidError::Shape(m.to_string()));
    match model {
        GroupoidModel::PairBox { lower, upper } => {
            if lower.is_empty() || lower.len() != upper.len() || lower.iter().zip(upper).any(|(a, b)| !(a < b)) {
                return shape("pair box needs matching bounds with lower < upper");
            }
            Ok(AlgebroidPresentation::tangent(lower.len()))
        }
        GroupoidModel::PairTorus { dim } => {
            if *dim == 0 {
                return shape("torus dimension must be positive");
            }
            Ok(AlgebroidPresentation::tangent(*dim))
        }
        GroupoidModel::MatrixGroup(g) => Ok(AlgebroidPresentation::lie_algebra_bundle(0, &g.structure_constants())?),
        GroupoidModel::Transformation { group, base, action } => {
            let n = base.dim();
            if n == 0 {
                return shape("transformation groupoids need a positive-dimensional base");
            }
            if let BaseDomain::Box { lower, upper } = base {
                if lower.len() != upper.len() || lower.iter().zip(upper).any(|(a, b)| !(a < b)) {
                    return shape("base box needs matching bounds with lower < upper");
                }
            }
            let basis = group.basis();
            let anchor: Vec<Vec<Polynomial>> = match action {
                GroupAction::Linear => {
                    if group.is_vector_group() || group.k != n {
                        return shape("a linear action needs GL(n) or SO(n) acting on an n-dimensional box");
                    }
                    if base.is_torus() {
                        return shape("linear actions are defined on boxes only");
                    }
                    (0..n)
                        .map(|row| {
                            basis
                                .iter()
                                .map(|e| {
                                    (0..n).fold(Polynomial::zero(n), |acc, c| {
                                        acc + Polynomial::var(n, c).scale(e.get(row, c))
                                    })
                                })
                                .collect()
                        })
                        .collect()
                }
                GroupAction::Translation(b) => {
                    if !group.is_vector_group() || b.rows() != n || b.cols() != group.k {
                        return shape("a translation action needs a vector group and an n x k matrix");
                    }
                    if group.tag == GroupTag::Torus && !base.is_torus() {
                        return shape("a torus group can only translate a torus");
                    }
                    (0..n)
                        .map(|row| (0..group.k).map(|i| Polynomial::constant(n, b.get(row, i).clone())).collect())
                        .collect()
                }
            };
            let constants = group.structure_constants();
            let r = basis.len();
            let mut structure = BTreeMap::new();
            for i in 0..r {
                for j in (i + 1)..r {
                    let entries = (0..r)
                        .map(|m| Polynomial::constant(n, constants[i][j][m].clone()))
                        .collect();
                    structure.insert((i, j), PolyVector::new(n, entries).map_err(AlgebroidError::from)?);
                }
            }
            Ok(AlgebroidPresentation::new(n, r, anchor, structure)?)
        }
    }
}

/// An arrow of one of the models. Torus coordinates are kept in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupoidElement {
    Pair { target: Vec<f64>, source: Vec<f64> },
    Matrix(DMatrix<f64>),
    /// `(g, x)` with source `x` and target `g . x`.
    Action { group: DMatrix<f64>, base: Vec<f64> },
}

impl GroupoidElement {
    pub fn model_tag(&self) -> &'static str {
        match self {
            GroupoidElement::Pair { .. } => "pair",
            GroupoidElement::Matrix(_) => "matrix",
            GroupoidElement::Action { .. } => "action",
        }
    }

    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            GroupoidElement::Matrix(m) | GroupoidElement::Action { group: m, .. } => Some(m),
            GroupoidElement::Pair { .. } => None,
        }
    }
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
    format!("({})", parts.join(", "))
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = rows_of(m).iter().map(|r| fmt_vec(r)).collect();
    format!("[{}]", rows.join(", "))
}

/// Model tag followed by coordinates at 17 significant digits.
impl fmt::Display for GroupoidElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupoidElement::Pair { target, source } => {
                write!(f, "pair target={} source={}", fmt_vec(target), fmt_vec(source))
            }
            GroupoidElement::Matrix(m) => write!(f, "matrix {}", fmt_matrix(m)),
            GroupoidElement::Action { group, base } => {
                write!(f, "action group={} base={}", fmt_matrix(group), fmt_vec(base))
            }
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum ElementView<'a> {
    Pair { target: &'a [f64], source: &'a [f64] },
    Matrix { rows: Vec<Vec<f64>> },
    Action { group: Vec<Vec<f64>>, base: &'a [f64] },
}

impl Serialize for GroupoidElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            GroupoidElement::Pair { target, source } => ElementView::Pair { target, source },
            GroupoidElement::Matrix(m) => ElementView::Matrix { rows: rows_of(m) },
            GroupoidElement::Action { group, base } => ElementView::Action {
                group: rows_of(group),
                base,
            },
        }
        .serialize(serializer)
    }
}

/// `n x n` identity as an exact translation matrix.
pub fn identity_action(n: usize) -> GroupAction {
    GroupAction::Translation(QMatrix::identity(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot2(theta: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
    }

    fn rotation_action() -> GroupoidSpec {
        GroupoidSpec::transformation(
            MatrixGroup::new(GroupTag::SO, 2, 1e-9).unwrap(),
            BaseDomain::Box {
                lower: vec![-4.0; 2],
                upper: vec![4.0; 2],
            },
            GroupAction::Linear,
        )
        .unwrap()
    }

    #[test]
    fn units() {
        let pb = GroupoidSpec::pair_box(vec![-3.0; 2], vec![3.0; 2]).unwrap();
        let u = pb.unit(&[1.0, 2.0]).unwrap();
        assert_eq!(
            u,
            GroupoidElement::Pair {
                target: vec![1.0, 2.0],
                source: vec![1.0, 2.0]
            }
        );
        assert!(pb.unit(&[4.0, 0.0]).is_err());
        let ra = rotation_action();
        assert_eq!(
            ra.unit(&[1.0, 0.0]).unwrap(),
            GroupoidElement::Action {
                group: DMatrix::identity(2, 2),
                base: vec![1.0, 0.0]
            }
        );
        let t = GroupoidSpec::pair_torus(1).unwrap();
        let u = t.unit(&[0.25]).unwrap();
        assert_eq!(t.source(&u), vec![0.25]);
        assert_eq!(t.target(&u), vec![0.25]);
    }

    #[test]
    fn pair_product_and_inverse() {
        let pb = GroupoidSpec::pair_box(vec![-3.0; 2], vec![3.0; 2]).unwrap();
        let g = pb.pair_element(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let h = pb.pair_element(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(pb.multiply(&g, &h).unwrap(), pb.pair_element(&[0.0, 0.0], &[2.0, 2.0]).unwrap());
        assert!(matches!(pb.multiply(&h, &g), Err(GroupoidError::NotComposable { .. })));
        assert_eq!(pb.invert(&g).unwrap(), pb.pair_element(&[1.0, 1.0], &[0.0, 0.0]).unwrap());
    }

    #[test]
    fn so2_inverse_law() {
        let so2 = GroupoidSpec::matrix_group(GroupTag::SO, 2).unwrap();
        let a = so2.group_element(rot2(0.7), &[]).unwrap();
        let b = so2.group_element(rot2(-0.7), &[]).unwrap();
        let p = so2.multiply(&a, &b).unwrap();
        assert!(so2.distance_to_unit(&p).unwrap() < 1e-12);
    }

    #[test]
    fn transformation_law_on_rotations() {
        let ra = rotation_action();
        let x = [1.0, 0.5];
        let h = ra.group_element(rot2(0.4), &x).unwrap();
        let hx = ra.target(&h);
        let g = ra.group_element(rot2(1.1), &hx).unwrap();
        let gh = ra.multiply(&g, &h).unwrap();
        let expect = rot2(1.1) * rot2(0.4);
        let GroupoidElement::Action { group, base } = &gh else { panic!() };
        assert!((group - expect).norm() < 1e-12);
        assert_eq!(base, &x.to_vec());
        let inv = ra.invert(&g).unwrap();
        assert!(ra.distance(&ra.multiply(&inv, &g).unwrap(), &ra.unit(&hx).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn torus_distance_wraps() {
        let t = GroupoidSpec::pair_torus(1).unwrap();
        let a = t.pair_element(&[0.99], &[0.0]).unwrap();
        let b = t.pair_element(&[0.01], &[0.0]).unwrap();
        assert!((t.distance(&a, &b).unwrap() - 0.02).abs() < 1e-12);
        let g = GroupoidSpec::matrix_group(GroupTag::Torus, 1).unwrap();
        let x = g.vector_group_element(&[1.25], &[]).unwrap();
        assert!((g.offset(&x).unwrap()[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn canonical_presentations_are_valid() {
        let specs = [
            rotation_action(),
            GroupoidSpec::matrix_group(GroupTag::SO, 3).unwrap(),
            GroupoidSpec::matrix_group(GroupTag::GL, 2).unwrap(),
            GroupoidSpec::transformation(
                MatrixGroup::new(GroupTag::GL, 2, 1e-9).unwrap(),
                BaseDomain::Box {
                    lower: vec![-1.0; 2],
                    upper: vec![1.0; 2],
                },
                GroupAction::Linear,
            )
            .unwrap(),
            GroupoidSpec::transformation(
                MatrixGroup::new(GroupTag::Translation, 1, 1e-9).unwrap(),
                BaseDomain::Torus { dim: 1 },
                identity_action(1),
            )
            .unwrap(),
        ];
        for s in &specs {
            assert!(s.presentation().verify(2).is_valid(), "{}", s.tag());
        }
        // Rotation generator acts by x d/dy - y d/dx.
        let ra = rotation_action();
        let a = ra.presentation().anchor_of(&ra.presentation().frame(0)).unwrap();
        assert_eq!(a, PolyVector::parse(&["-x1", "x0"], 2).unwrap());
    }

    #[test]
    fn shape_errors() {
        let bad = GroupoidSpec::transformation(
            MatrixGroup::new(GroupTag::SO, 3, 1e-9).unwrap(),
            BaseDomain::Box {
                lower: vec![-1.0; 2],
                upper: vec![1.0; 2],
            },
            GroupAction::Linear,
        );
        assert!(matches!(bad, Err(GroupoidError::Shape(_))));
        assert!(GroupoidSpec::pair_box(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn display_uses_seventeen_digits() {
        let pb = GroupoidSpec::pair_box(vec![-3.0; 1], vec![3.0; 1]).unwrap();
        let g = pb.pair_element(&[0.1], &[1.0]).unwrap();
        let text = g.to_string();
        assert_eq!(text, "pair target=(1.0000000000000001e-1) source=(1.0000000000000000e0)");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }
}
