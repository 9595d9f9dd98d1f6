//! Right-invariant flows on the groupoid models and anchor flows on bases.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebroid::Section;
use crate::ode::{integrate, RkParams, StepFailure};
use crate::poly::{CompiledPoly, Polynomial};

use super::{GroupAction, GroupoidElement, GroupoidError, GroupoidModel, GroupoidSpec};

/// A section with float weights, `sum_j w_j alpha_j`, evaluated through
/// compiled polynomials.
#[derive(Debug, Clone)]
pub struct NumericSection {
    nvars: usize,
    rank: usize,
    parts: Vec<(f64, Arc<Vec<CompiledPoly>>)>,
    constant: bool,
}

impl NumericSection {
    pub fn compile(s: &Section) -> Self {
        let comps: Vec<CompiledPoly> = s.entries().iter().map(Polynomial::compile).collect();
        NumericSection {
            nvars: s.nvars(),
            rank: s.len(),
            parts: vec![(1.0, Arc::new(comps))],
            constant: s.degree().unwrap_or(0) == 0,
        }
    }

    pub fn zero(nvars: usize, rank: usize) -> Self {
        NumericSection {
            nvars,
            rank,
            parts: Vec::new(),
            constant: true,
        }
    }

    /// `sum_j weights[j] * sections[j]`; all sections must share a shape.
    pub fn combination(sections: &[NumericSection], weights: &[f64]) -> Self {
        let (nvars, rank) = sections.first().map(|s| (s.nvars, s.rank)).unwrap_or((0, 0));
        let mut parts = Vec::new();
        let mut constant = true;
        for (s, w) in sections.iter().zip(weights) {
            if *w == 0.0 {
                continue;
            }
            constant &= s.constant;
            parts.extend(s.parts.iter().map(|(c, p)| (c * w, p.clone())));
        }
        NumericSection {
            nvars,
            rank,
            parts,
            constant,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::combination(std::slice::from_ref(self), &[c])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.parts
            .iter()
            .all(|(w, p)| *w == 0.0 || p.iter().all(CompiledPoly::is_zero))
    }

    pub fn eval(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (w, comps) in &self.parts {
            for (o, p) in out.iter_mut().zip(comps.iter()) {
                if !p.is_zero() {
                    *o += w * p.eval(y);
                }
            }
        }
    }
}

fn exit(f: StepFailure) -> GroupoidError {
    GroupoidError::DomainExit {
        sample: f.sample,
        time: f.time,
    }
}

/// `out = a * g` for column-major `m x m` slices.
fn mul_into(a: &[f64], g: &[f64], m: usize, out: &mut [f64]) {
    for j in 0..m {
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                acc += a[i + k * m] * g[k + j * m];
            }
            out[i + j * m] = acc;
        }
    }
}

impl GroupoidSpec {
    pub fn check_section(&self, alpha: &NumericSection) -> Result<(), GroupoidError> {
        if alpha.nvars() != self.base_dim() || alpha.rank() != self.rank() {
            return Err(GroupoidError::Shape(format!(
                "section of rank {} over {} variables does not fit rank {} over {}",
                alpha.rank(),
                alpha.nvars(),
                self.rank(),
                self.base_dim()
            )));
        }
        if self.base_domain().is_torus() && !alpha.is_constant() {
            return Err(GroupoidError::NonPeriodic);
        }
        Ok(())
    }

    /// Time-`t` flow of `rho(alpha)` from `x`.
    pub fn anchor_flow(
        &self,
        alpha: &NumericSection,
        x: &[f64],
        t: f64,
        rk: &RkParams,
    ) -> Result<Vec<f64>, GroupoidError> {
        self.check_section(alpha)?;
        let domain = self.base_domain();
        if !domain.contains(x) {
            return Err(GroupoidError::OutOfDomain(x.to_vec()));
        }
        if t == 0.0 || alpha.is_zero() || self.base_dim() == 0 {
            return Ok(domain.wrapped(x));
        }
        let mut a = vec![0.0; self.rank()];
        let mut field = |y: &[f64], out: &mut [f64]| {
            alpha.eval(y, &mut a);
            self.anchor_apply(y, &a, out);
        };
        let torus = domain.is_torus();
        let mut check = |y: &[f64]| torus || domain.contains(y);
        let mut y = integrate(&mut field, x, t, rk, &mut check).map_err(exit)?;
        domain.wrap(&mut y);
        Ok(y)
    }

    /// Time-`t` flow of the right-invariant extension of `alpha` starting
    /// at `g0`. The source is carried along unchanged.
    pub fn right_invariant_flow(
        &self,
        alpha: &NumericSection,
        g0: &GroupoidElement,
        t: f64,
        rk: &RkParams,
    ) -> Result<GroupoidElement, GroupoidError> {
        self.check_section(alpha)?;
        self.validate(g0)?;
        if t == 0.0 || alpha.is_zero() {
            return Ok(g0.clone());
        }
        match (self.model(), g0) {
            (GroupoidModel::PairBox { .. } | GroupoidModel::PairTorus { .. }, GroupoidElement::Pair { target, source }) => {
                Ok(GroupoidElement::Pair {
                    target: self.anchor_flow(alpha, target, t, rk)?,
                    source: source.clone(),
                })
            }
            (GroupoidModel::MatrixGroup(group), GroupoidElement::Matrix(m)) => {
                let size = m.nrows();
                let mut coeffs = vec![0.0; self.rank()];
                alpha.eval(&[], &mut coeffs);
                let a = group.algebra_element(self.basis(), &coeffs);
                let a = a.as_slice().to_vec();
                let mut field = |y: &[f64], out: &mut [f64]| mul_into(&a, y, size, out);
                let y = integrate(&mut field, m.as_slice(), t, rk, &mut |_| true).map_err(exit)?;
                let mut g = DMatrix::from_column_slice(size, size, &y);
                group.normalize(&mut g);
                Ok(GroupoidElement::Matrix(g))
            }
            (GroupoidModel::Transformation { group, base, action }, GroupoidElement::Action { group: m, base: x }) => {
                let size = m.nrows();
                let n = x.len();
                let basis: Vec<Vec<f64>> = self.basis().iter().map(|e| e.as_slice().to_vec()).collect();
                let offset_matrix: Option<Vec<Vec<f64>>> = match action {
                    GroupAction::Translation(b) => Some(
                        (0..b.rows())
                            .map(|i| (0..b.cols()).map(|j| crate::poly::rational::to_f64(b.get(i, j))).collect())
                            .collect(),
                    ),
                    GroupAction::Linear => None,
                };
                let act = |g: &[f64], p: &mut [f64]| match &offset_matrix {
                    None => {
                        for i in 0..n {
                            p[i] = (0..n).map(|j| g[i + j * size] * x[j]).sum();
                        }
                    }
                    Some(b) => {
                        let k = size - 1;
                        for i in 0..n {
                            p[i] = x[i] + (0..k).map(|j| b[i][j] * g[j + k * size]).sum::<f64>();
                        }
                    }
                };
                let mut point = vec![0.0; n];
                let mut coeffs = vec![0.0; self.rank()];
                let mut a = vec![0.0; size * size];
                let mut field = |y: &[f64], out: &mut [f64]| {
                    act(y, &mut point);
                    alpha.eval(&point, &mut coeffs);
                    a.iter_mut().for_each(|v| *v = 0.0);
                    for (e, c) in basis.iter().zip(&coeffs) {
                        if *c != 0.0 {
                            for (v, ev) in a.iter_mut().zip(e) {
                                *v += c * ev;
                            }
                        }
                    }
                    mul_into(&a, y, size, out);
                };
                let torus = base.is_torus();
                let mut probe = vec![0.0; n];
                let mut check = |y: &[f64]| {
                    if torus {
                        return true;
                    }
                    act(y, &mut probe);
                    base.contains(&probe)
                };
                let y = integrate(&mut field, m.as_slice(), t, rk, &mut check).map_err(exit)?;
                let mut g = DMatrix::from_column_slice(size, size, &y);
                group.normalize(&mut g);
                Ok(GroupoidElement::Action { group: g, base: x.clone() })
            }
            _ => Err(GroupoidError::ModelMismatch),
        }
    }

    /// [`Self::right_invariant_flow`] for an exact section.
    pub fn flow_section(
        &self,
        alpha: &Section,
        g0: &GroupoidElement,
        t: f64,
        rk: &RkParams,
    ) -> Result<GroupoidElement, GroupoidError> {
        self.right_invariant_flow(&NumericSection::compile(alpha), g0, t, rk)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::groupoid::{BaseDomain, GroupTag, MatrixGroup};
    use crate::poly::PolyVector;

    fn sec(t: &[&str], n: usize) -> NumericSection {
        NumericSection::compile(&PolyVector::parse(t, n).unwrap())
    }

    #[test]
    fn zero_section_is_stationary() {
        let pb = GroupoidSpec::pair_box(vec![-3.0; 2], vec![3.0; 2]).unwrap();
        let g0 = pb.pair_element(&[0.5, 1.0], &[0.0, 0.0]).unwrap();
        let z = NumericSection::zero(2, 2);
        assert_eq!(pb.right_invariant_flow(&z, &g0, 3.0, &RkParams::default()).unwrap(), g0);
        assert_eq!(pb.anchor_flow(&z, &[1.0, 1.0], 2.0, &RkParams::default()).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn translation_flow_on_pair_box() {
        let pb = GroupoidSpec::pair_box(vec![-3.0; 2], vec![3.0; 2]).unwrap();
        let g = pb
            .right_invariant_flow(&sec(&["1", "0"], 2), &pb.unit(&[0.0, 0.0]).unwrap(), 1.0, &RkParams::default())
            .unwrap();
        let d = pb.distance(&g, &pb.pair_element(&[1.0, 0.0], &[0.0, 0.0]).unwrap()).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn so2_flow_matches_closed_form_rotation() {
        let so2 = GroupoidSpec::matrix_group(GroupTag::SO, 2).unwrap();
        let j = sec(&["1"], 0);
        let g = so2
            .right_invariant_flow(&j, &so2.unit(&[]).unwrap(), FRAC_PI_2, &RkParams::default())
            .unwrap();
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((g.matrix().unwrap() - r).norm() < 1e-9);
    }

    #[test]
    fn rotation_anchor_flow() {
        let pb = GroupoidSpec::pair_box(vec![-3.0; 2], vec![3.0; 2]).unwrap();
        let y = pb
            .anchor_flow(&sec(&["-x1", "x0"], 2), &[1.0, 0.0], FRAC_PI_2, &RkParams::default())
            .unwrap();
        assert!((y[0]).abs() < 1e-9 && (y[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn domain_exit_is_reported() {
        let pb = GroupoidSpec::pair_box(vec![-1.0; 1], vec![1.0; 1]).unwrap();
        let e = pb.anchor_flow(&sec(&["1"], 1), &[0.0], 2.0, &RkParams::default());
        assert!(matches!(e, Err(GroupoidError::DomainExit { .. })));
    }

    #[test]
    fn torus_sections_must_be_constant() {
        let t = GroupoidSpec::pair_torus(1).unwrap();
        let e = t.anchor_flow(&sec(&["x0"], 1), &[0.5], 1.0, &RkParams::default());
        assert_eq!(e, Err(GroupoidError::NonPeriodic));
        let y = t.anchor_flow(&sec(&["1"], 1), &[0.75], 0.5, &RkParams::default()).unwrap();
        assert!((y[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn translation_action_on_torus_wraps_target() {
        let s = GroupoidSpec::transformation(
            MatrixGroup::new(GroupTag::Translation, 1, 1e-9).unwrap(),
            BaseDomain::Torus { dim: 1 },
            crate::groupoid::identity_action(1),
        )
        .unwrap();
        let g = s
            .right_invariant_flow(&sec(&["1"], 1), &s.unit(&[0.5]).unwrap(), 1.25, &RkParams::default())
            .unwrap();
        assert!((s.offset(&g).unwrap()[0] - 1.25).abs() < 1e-12);
        assert!((s.target(&g)[0] - 0.75).abs() < 1e-12);
    }
}
