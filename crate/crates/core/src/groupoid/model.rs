//! Base domains and matrix groups underlying the groupoid models.

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::poly::rational::to_f64;
use crate::poly::{QMatrix, Rational};

use super::GroupoidError;

/// Points of a base manifold: a closed box, the torus `R^n / Z^n` with
/// coordinates in `[0, 1)`, or a single point (dimension zero).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseDomain {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Torus { dim: usize },
    Point,
}

const BOX_SLACK: f64 = 1e-12;

impl BaseDomain {
    pub fn dim(&self) -> usize {
        match self {
            BaseDomain::Box { lower, .. } => lower.len(),
            BaseDomain::Torus { dim } => *dim,
            BaseDomain::Point => 0,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, BaseDomain::Torus { .. })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            BaseDomain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (a, b))| *a - BOX_SLACK <= *v && *v <= *b + BOX_SLACK),
            _ => true,
        }
    }

    pub fn wrap(&self, x: &mut [f64]) {
        if self.is_torus() {
            for v in x.iter_mut() {
                *v = wrap_unit(*v);
            }
        }
    }

    pub fn wrapped(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.wrap(&mut y);
        y
    }

    /// `a - b`, taken to the nearest representative on a torus.
    pub fn diff(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| if self.is_torus() { wrap_centered(x - y) } else { x - y })
            .collect()
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        norm(&self.diff(a, b))
    }
}

/// Representative in `[0, 1)`.
pub fn wrap_unit(v: f64) -> f64 {
    let w = v - v.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Representative in `[-1/2, 1/2)`.
pub fn wrap_centered(v: f64) -> f64 {
    let w = wrap_unit(v + 0.5) - 0.5;
    if w < -0.5 {
        -0.5
    } else {
        w
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupTag {
    /// Invertible `k x k` matrices.
    GL,
    /// Rotations of `R^k`.
    SO,
    /// `R^k` under addition, embedded as unipotent `(k+1) x (k+1)` matrices.
    Translation,
    /// `R^k / Z^k`, embedded like `Translation` with the offset wrapped.
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixGroup {
    pub tag: GroupTag,
    pub k: usize,
    /// Accepted membership residual, e.g. `|g^T g - 1|` for `SO`.
    pub tolerance: f64,
}

impl MatrixGroup {
    pub fn new(tag: GroupTag, k: usize, tolerance: f64) -> Result<Self, GroupoidError> {
        if k == 0 || (tag == GroupTag::SO && k < 2) {
            return Err(GroupoidError::Shape(format!("{tag:?}({k}) is not supported")));
        }
        if !(tolerance > 0.0) {
            return Err(GroupoidError::Shape("membership tolerance must be positive".into()));
        }
        Ok(MatrixGroup { tag, k, tolerance })
    }

    /// Side length of the representing matrices.
    pub fn matrix_size(&self) -> usize {
        match self.tag {
            GroupTag::GL | GroupTag::SO => self.k,
            GroupTag::Translation | GroupTag::Torus => self.k + 1,
        }
    }

    /// Dimension of the Lie algebra.
    pub fn algebra_dim(&self) -> usize {
        match self.tag {
            GroupTag::GL => self.k * self.k,
            GroupTag::SO => self.k * (self.k - 1) / 2,
            GroupTag::Translation | GroupTag::Torus => self.k,
        }
    }

    pub fn is_vector_group(&self) -> bool {
        matches!(self.tag, GroupTag::Translation | GroupTag::Torus)
    }

    /// Exact Lie algebra basis. For `SO(3)` the basis generates rotations
    /// about the coordinate axes, `(E_i)_jk = -eps_ijk`; for other `SO(k)`
    /// it is `E_ji - E_ij` over pairs `i < j` in lexicographic order.
    pub fn basis(&self) -> Vec<QMatrix> {
        let m = self.matrix_size();
        let unit = |i: usize, j: usize| {
            let mut e = QMatrix::zeros(m, m);
            e.set(i, j, Rational::one());
            e
        };
        let rotation = |i: usize, j: usize| {
            let mut e = QMatrix::zeros(m, m);
            e.set(j, i, Rational::one());
            e.set(i, j, -Rational::one());
            e
        };
        match self.tag {
            GroupTag::GL => (0..m * m).map(|ij| unit(ij / m, ij % m)).collect(),
            GroupTag::SO if m == 3 => vec![rotation(1, 2), rotation(2, 0), rotation(0, 1)],
            GroupTag::SO => {
                let mut out = Vec::new();
                for i in 0..m {
                    for j in (i + 1)..m {
                        out.push(rotation(i, j));
                    }
                }
                out
            }
            GroupTag::Translation | GroupTag::Torus => (0..self.k).map(|i| unit(i, self.k)).collect(),
        }
    }

    pub fn basis_f64(&self) -> Vec<DMatrix<f64>> {
        self.basis().iter().map(to_dmatrix).collect()
    }

    /// `c[i][j][m]` with `E_j E_i - E_i E_j = sum_m c[i][j][m] E_m`, the
    /// bracket of right-invariant fields.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<Rational>>> {
        let basis = self.basis();
        let m = self.matrix_size();
        let r = basis.len();
        let mut coords = QMatrix::zeros(m * m, r);
        for (c, e) in basis.iter().enumerate() {
            for i in 0..m {
                for j in 0..m {
                    coords.set(i * m + j, c, e.get(i, j).clone());
                }
            }
        }
        let mut out = vec![vec![vec![Rational::zero(); r]; r]; r];
        for i in 0..r {
            for j in 0..r {
                let a = qmul(&basis[j], &basis[i]);
                let b = qmul(&basis[i], &basis[j]);
                let flat: Vec<Rational> = (0..m * m)
                    .map(|ij| a.get(ij / m, ij % m) - b.get(ij / m, ij % m))
                    .collect();
                let sol = coords
                    .solve_affine(&flat)
                    .expect("shapes agree")
                    .expect("matrix Lie algebra is closed under commutators");
                out[i][j] = sol;
            }
        }
        out
    }

    pub fn identity(&self) -> DMatrix<f64> {
        DMatrix::identity(self.matrix_size(), self.matrix_size())
    }

    /// Offset vector of a translation or torus element.
    pub fn offset(&self, g: &DMatrix<f64>) -> Vec<f64> {
        (0..self.k).map(|i| g[(i, self.k)]).collect()
    }

    pub fn from_offset(&self, v: &[f64]) -> DMatrix<f64> {
        let mut g = self.identity();
        for (i, x) in v.iter().enumerate() {
            g[(i, self.k)] = *x;
        }
        self.normalize(&mut g);
        g
    }

    /// Pulls a numerically drifted element back onto the group:
    /// Gram-Schmidt for `SO`, exact unipotent shape for vector groups,
    /// offsets wrapped into `[0, 1)` for the torus.
    pub fn normalize(&self, g: &mut DMatrix<f64>) {
        match self.tag {
            GroupTag::GL => {}
            GroupTag::SO => gram_schmidt(g),
            GroupTag::Translation | GroupTag::Torus => {
                let k = self.k;
                for i in 0..=k {
                    for j in 0..k {
                        g[(i, j)] = if i == j { 1.0 } else { 0.0 };
                    }
                }
                g[(k, k)] = 1.0;
                if self.tag == GroupTag::Torus {
                    for i in 0..k {
                        g[(i, k)] = wrap_unit(g[(i, k)]);
                    }
                }
            }
        }
    }

    pub fn membership_residual(&self, g: &DMatrix<f64>) -> f64 {
        let m = self.matrix_size();
        if g.nrows() != m || g.ncols() != m || g.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        match self.tag {
            GroupTag::GL => {
                if g.clone().determinant().abs() > self.tolerance {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            GroupTag::SO => {
                if g.clone().determinant() <= 0.0 {
                    return f64::INFINITY;
                }
                (g.transpose() * g - DMatrix::<f64>::identity(m, m)).norm()
            }
            GroupTag::Translation | GroupTag::Torus => {
                let k = self.k;
                let mut worst: f64 = 0.0;
                for i in 0..=k {
                    for j in 0..k {
                        let want = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((g[(i, j)] - want).abs());
                    }
                }
                worst.max((g[(k, k)] - 1.0).abs())
            }
        }
    }

    pub fn multiply(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut p = a * b;
        self.normalize(&mut p);
        p
    }

    pub fn invert(&self, g: &DMatrix<f64>) -> Result<DMatrix<f64>, GroupoidError> {
        let mut inv = match self.tag {
            GroupTag::SO => g.transpose(),
            GroupTag::Translation | GroupTag::Torus => {
                let v: Vec<f64> = self.offset(g).iter().map(|x| -x).collect();
                self.from_offset(&v)
            }
            GroupTag::GL => g
                .clone()
                .try_inverse()
                .ok_or_else(|| GroupoidError::Membership { residual: f64::INFINITY })?,
        };
        self.normalize(&mut inv);
        Ok(inv)
    }

    /// Difference used for distances: offsets of torus elements are
    /// compared modulo 1.
    pub fn difference(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
        if self.tag == GroupTag::Torus {
            return self
                .offset(a)
                .iter()
                .zip(self.offset(b))
                .map(|(x, y)| wrap_centered(x - y))
                .collect();
        }
        if self.tag == GroupTag::Translation {
            return self.offset(a).iter().zip(self.offset(b)).map(|(x, y)| x - y).collect();
        }
        (a - b).iter().copied().collect()
    }

    /// `sum_i a_i E_i`.
    pub fn algebra_element(&self, basis: &[DMatrix<f64>], coefficients: &[f64]) -> DMatrix<f64> {
        let m = self.matrix_size();
        let mut out = DMatrix::zeros(m, m);
        for (e, c) in basis.iter().zip(coefficients) {
            if *c != 0.0 {
                out += e * *c;
            }
        }
        out
    }
}

fn gram_schmidt(g: &mut DMatrix<f64>) {
    let n = g.ncols();
    for j in 0..n {
        for i in 0..j {
            let d = g.column(j).dot(&g.column(i));
            let ci = g.column(i).clone_owned();
            let mut cj = g.column_mut(j);
            cj.axpy(-d, &ci, 1.0);
        }
        let len = g.column(j).norm();
        if len > 0.0 {
            let mut cj = g.column_mut(j);
            cj /= len;
        }
    }
}

fn qmul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let mut out = QMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = Rational::zero();
            for k in 0..a.cols() {
                acc += a.get(i, k) * b.get(k, j);
            }
            out.set(i, j, acc);
        }
    }
    out
}

pub(crate) fn to_dmatrix(q: &QMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(q.rows(), q.cols(), |i, j| to_f64(q.get(i, j)))
}

/// How the group part of a transformation groupoid moves base points.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupAction {
    /// `g . x = g x` for `SO(k)` or `GL(k)` acting on `R^k`.
    Linear,
    /// `v . x = x + B v` for a vector group `R^k` or `T^k` acting on an
    /// `n`-dimensional base through the `n x k` matrix `B`.
    Translation(QMatrix),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::so3_constants;

    #[test]
    fn so3_basis_constants_match_cross_product_convention() {
        let g = MatrixGroup::new(GroupTag::SO, 3, 1e-9).unwrap();
        assert_eq!(g.structure_constants(), so3_constants());
    }

    #[test]
    fn so2_is_abelian_and_gl2_is_not() {
        let so2 = MatrixGroup::new(GroupTag::SO, 2, 1e-9).unwrap();
        assert_eq!(so2.algebra_dim(), 1);
        assert!(so2.structure_constants()[0][0].iter().all(Zero::is_zero));
        let gl2 = MatrixGroup::new(GroupTag::GL, 2, 1e-9).unwrap();
        let c = gl2.structure_constants();
        // E_01 E_00 - E_00 E_01 = -E_01
        assert_eq!(c[0][1][1], -Rational::one());
    }

    #[test]
    fn wraps() {
        assert_eq!(wrap_unit(-0.25), 0.75);
        assert_eq!(wrap_unit(1.0), 0.0);
        assert_eq!(wrap_unit(-1e-18), 0.0);
        assert!((wrap_centered(0.9) + 0.1).abs() < 1e-15);
        assert_eq!(wrap_centered(0.5), -0.5);
    }

    #[test]
    fn gram_schmidt_restores_orthogonality() {
        let g = MatrixGroup::new(GroupTag::SO, 3, 1e-9).unwrap();
        let mut m = DMatrix::from_row_slice(3, 3, &[1.0, 1e-4, 0.0, 0.0, 1.0, 2e-4, 1e-4, 0.0, 1.0]);
        g.normalize(&mut m);
        assert!(g.membership_residual(&m) < 1e-14);
    }
}
