use std::collections::BTreeMap;

use num_traits::Zero;

use crate::poly::{PolyVector, Polynomial, QMatrix, Rational};

use super::AlgebroidError;

/// A section of the trivialized bundle: `r` polynomial coefficients with
/// respect to the global frame `e_0, ..., e_{r-1}`.
pub type Section = PolyVector;

/// A Lie algebroid over a patch of `R^n`, trivialized by a frame.
///
/// `anchor[k][i]` is the `k`-th component of the vector field `rho(e_i)`;
/// `structure[(i, j)]` for `i < j` lists `c_ij^k` with
/// `[e_i, e_j] = sum_k c_ij^k e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebroidPresentation {
    base_dim: usize,
    rank: usize,
    anchor: Vec<Vec<Polynomial>>,
    structure: BTreeMap<(usize, usize), PolyVector>,
}

/// Defects found by [`AlgebroidPresentation::verify`]. Empty lists mean the
/// presentation satisfies the Jacobi identity and anchor compatibility.
#[derive(Debug, Clone, Default)]
pub struct PresentationReport {
    /// `(description, defect)` for Jacobi sums that do not vanish.
    pub jacobi_defects: Vec<(String, Section)>,
    /// `((i, j), rho([e_i, e_j]) - [rho e_i, rho e_j])` when nonzero.
    pub anchor_defects: Vec<((usize, usize), PolyVector)>,
}

impl PresentationReport {
    pub fn is_valid(&self) -> bool {
        self.jacobi_defects.is_empty() && self.anchor_defects.is_empty()
    }
}

impl AlgebroidPresentation {
    pub fn new(
        base_dim: usize,
        rank: usize,
        anchor: Vec<Vec<Polynomial>>,
        structure: BTreeMap<(usize, usize), PolyVector>,
    ) -> Result<Self, AlgebroidError> {
        if anchor.len() != base_dim {
            return Err(AlgebroidError::Shape {
                block: "anchor".into(),
                message: format!("expected {base_dim} rows, found {}", anchor.len()),
            });
        }
        for (k, row) in anchor.iter().enumerate() {
            if row.len() != rank {
                return Err(AlgebroidError::Shape {
                    block: "anchor".into(),
                    message: format!("row {k}: expected {rank} columns, found {}", row.len()),
                });
            }
            if row.iter().any(|p| p.nvars() != base_dim) {
                return Err(AlgebroidError::Shape {
                    block: "anchor".into(),
                    message: format!("row {k}: polynomials must use {base_dim} variables"),
                });
            }
        }
        let mut cleaned = BTreeMap::new();
        for ((i, j), c) in structure {
            if i >= rank || j >= rank || i == j {
                return Err(AlgebroidError::Shape {
                    block: "structure".into(),
                    message: format!("invalid frame pair ({i}, {j}) for rank {rank}"),
                });
            }
            if c.len() != rank || c.nvars() != base_dim {
                return Err(AlgebroidError::Shape {
                    block: "structure".into(),
                    message: format!("pair ({i}, {j}): expected {rank} coefficients in {base_dim} variables"),
                });
            }
            let (key, value) = if i < j {
                ((i, j), c)
            } else {
                ((j, i), c.scale(&-Rational::from_integer(1.into())))
            };
            if cleaned.insert(key, value).is_some() {
                return Err(AlgebroidError::Shape {
                    block: "structure".into(),
                    message: format!("pair {key:?} given twice"),
                });
            }
        }
        cleaned.retain(|_, v| !v.is_zero());
        Ok(AlgebroidPresentation {
            base_dim,
            rank,
            anchor,
            structure: cleaned,
        })
    }

    /// `TR^n` with the coordinate frame.
    pub fn tangent(n: usize) -> Self {
        let anchor = (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| if i == k { Polynomial::one(n) } else { Polynomial::zero(n) })
                    .collect()
            })
            .collect();
        Self::new(n, n, anchor, BTreeMap::new()).expect("tangent presentation")
    }

    /// Cotangent algebroid of a constant Poisson bivector `pi` (antisymmetric
    /// `n x n`), frame `dx_0, ..., dx_{n-1}`. The anchor sends `dx_i` to
    /// `sum_k pi[i][k] d/dx_k`, so `f dx_0 + g dx_1` maps to
    /// `f d/dx_1 - g d/dx_0` for `pi = d/dx_0 ^ d/dx_1`.
    pub fn cotangent_constant_poisson(pi: &QMatrix) -> Result<Self, AlgebroidError> {
        let n = pi.rows();
        if pi.cols() != n {
            return Err(AlgebroidError::Shape {
                block: "poisson".into(),
                message: "bivector must be square".into(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if *pi.get(i, j) != -pi.get(j, i).clone() {
                    return Err(AlgebroidError::Shape {
                        block: "poisson".into(),
                        message: "bivector must be antisymmetric".into(),
                    });
                }
            }
        }
        let anchor = (0..n)
            .map(|k| (0..n).map(|i| Polynomial::constant(n, pi.get(i, k).clone())).collect())
            .collect();
        Self::new(n, n, anchor, BTreeMap::new())
    }

    /// A Lie algebra with structure constants `[e_i, e_j] = sum_k c[i][j][k] e_k`,
    /// extended trivially over `R^n` with zero anchor.
    pub fn lie_algebra_bundle(n: usize, constants: &[Vec<Vec<Rational>>]) -> Result<Self, AlgebroidError> {
        let r = constants.len();
        let anchor = vec![vec![Polynomial::zero(n); r]; n];
        let mut structure = BTreeMap::new();
        for i in 0..r {
            for j in (i + 1)..r {
                let entries = (0..r)
                    .map(|k| Polynomial::constant(n, constants[i][j][k].clone()))
                    .collect();
                structure.insert((i, j), PolyVector::new(n, entries)?);
            }
        }
        Self::new(n, r, anchor, structure)
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn anchor_matrix(&self) -> &[Vec<Polynomial>] {
        &self.anchor
    }

    pub fn structure_entries(&self) -> impl Iterator<Item = (&(usize, usize), &PolyVector)> {
        self.structure.iter()
    }

    /// Structure coefficients of `[e_i, e_j]`, antisymmetric in `(i, j)`.
    pub fn structure(&self, i: usize, j: usize) -> Section {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => PolyVector::zero(self.base_dim, self.rank),
            Less => self
                .structure
                .get(&(i, j))
                .cloned()
                .unwrap_or_else(|| PolyVector::zero(self.base_dim, self.rank)),
            Greater => self.structure(j, i).scale(&-Rational::from_integer(1.into())),
        }
    }

    pub fn frame(&self, i: usize) -> Section {
        PolyVector::unit(self.base_dim, self.rank, i)
    }

    pub fn zero_section(&self) -> Section {
        PolyVector::zero(self.base_dim, self.rank)
    }

    pub fn check_section(&self, s: &Section) -> Result<(), AlgebroidError> {
        if s.len() != self.rank || s.nvars() != self.base_dim {
            return Err(AlgebroidError::SectionShape {
                expected_rank: self.rank,
                expected_nvars: self.base_dim,
                found_rank: s.len(),
                found_nvars: s.nvars(),
            });
        }
        Ok(())
    }

    /// The vector field `rho(s)` as `n` polynomial components.
    pub fn anchor_of(&self, s: &Section) -> Result<PolyVector, AlgebroidError> {
        self.check_section(s)?;
        let comps = self
            .anchor
            .iter()
            .map(|row| {
                row.iter()
                    .zip(s.entries())
                    .fold(Polynomial::zero(self.base_dim), |acc, (a, c)| &acc + &(a * c))
            })
            .collect();
        Ok(PolyVector::new(self.base_dim, comps)?)
    }

    /// Section bracket, extended from the frame by the Leibniz rule:
    /// `[sum a_i e_i, sum b_j e_j] = sum a_i b_j [e_i, e_j]
    ///   + sum_j rho(alpha)(b_j) e_j - sum_i rho(beta)(a_i) e_i`.
    pub fn bracket(&self, s1: &Section, s2: &Section) -> Result<Section, AlgebroidError> {
        self.check_section(s1)?;
        self.check_section(s2)?;
        let n = self.base_dim;
        let r = self.rank;
        let mut out = PolyVector::zero(n, r);
        for i in 0..r {
            let a = s1.get(i);
            if a.is_zero() {
                continue;
            }
            for j in 0..r {
                let b = s2.get(j);
                if b.is_zero() || i == j {
                    continue;
                }
                let c = self.structure(i, j);
                if c.is_zero() {
                    continue;
                }
                out = out.add(&c.mul_poly(&(a * b)))?;
            }
        }
        let rho1 = self.anchor_of(s1)?;
        let rho2 = self.anchor_of(s2)?;
        let derived: Vec<Polynomial> = (0..r)
            .map(|k| &derivation(&rho1, s2.get(k)) - &derivation(&rho2, s1.get(k)))
            .collect();
        Ok(out.add(&PolyVector::new(n, derived)?)?)
    }

    /// Jacobi sums over frame triples (and frame triples with one element
    /// multiplied by a monomial of degree `<= check_degree`), plus anchor
    /// compatibility on frame pairs. Defects are reported, not raised.
    pub fn verify(&self, check_degree: u32) -> PresentationReport {
        let r = self.rank;
        let n = self.base_dim;
        let mut report = PresentationReport::default();
        let multipliers = crate::poly::monomials_upto(n, check_degree);
        for m in &multipliers {
            let mp = Polynomial::monomial(m.clone(), Rational::from_integer(1.into()));
            for i in 0..r {
                for j in 0..r {
                    for k in 0..r {
                        if m.degree() == 0 && !(i < j && j < k) {
                            continue;
                        }
                        let a = self.frame(i).mul_poly(&mp);
                        let b = self.frame(j);
                        let c = self.frame(k);
                        let defect = self.jacobi_sum(&a, &b, &c).expect("frame sections");
                        if !defect.is_zero() {
                            let label = if m.degree() == 0 {
                                format!("(e{i}, e{j}, e{k})")
                            } else {
                                format!("({mp}*e{i}, e{j}, e{k})")
                            };
                            report.jacobi_defects.push((label, defect));
                        }
                    }
                }
            }
        }
        for i in 0..r {
            for j in (i + 1)..r {
                let lhs = self.anchor_of(&self.structure(i, j)).expect("frame section");
                let x = self.anchor_of(&self.frame(i)).expect("frame section");
                let y = self.anchor_of(&self.frame(j)).expect("frame section");
                let rhs = vector_field_bracket(&x, &y);
                let defect = lhs.sub(&rhs).expect("same shape");
                if !defect.is_zero() {
                    report.anchor_defects.push(((i, j), defect));
                }
            }
        }
        report
    }

    fn jacobi_sum(&self, a: &Section, b: &Section, c: &Section) -> Result<Section, AlgebroidError> {
        let t1 = self.bracket(&self.bracket(a, b)?, c)?;
        let t2 = self.bracket(&self.bracket(b, c)?, a)?;
        let t3 = self.bracket(&self.bracket(c, a)?, b)?;
        Ok(t1.add(&t2)?.add(&t3)?)
    }
}

/// `X(f) = sum_k X_k df/dx_k`.
pub fn derivation(field: &PolyVector, f: &Polynomial) -> Polynomial {
    if f.is_zero() || f.is_constant() {
        return Polynomial::zero(f.nvars());
    }
    field
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, xk)| !xk.is_zero())
        .fold(Polynomial::zero(f.nvars()), |acc, (k, xk)| {
            &acc + &(xk * &f.diff(k).expect("index within nvars"))
        })
}

/// Lie bracket of polynomial vector fields: `[X, Y]_k = X(Y_k) - Y(X_k)`.
pub fn vector_field_bracket(x: &PolyVector, y: &PolyVector) -> PolyVector {
    let comps = x
        .entries()
        .iter()
        .zip(y.entries())
        .map(|(xk, yk)| &derivation(x, yk) - &derivation(y, xk))
        .collect();
    PolyVector::new(x.nvars(), comps).expect("same nvars")
}

/// Structure constants of `so(3)` in the right-invariant convention used
/// for group models: `[e_i, e_j] = -eps_ijk e_k`.
pub fn so3_constants() -> Vec<Vec<Vec<Rational>>> {
    let mut c = vec![vec![vec![Rational::zero(); 3]; 3]; 3];
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        c[i][j][k] = Rational::from_integer((-1).into());
        c[j][i][k] = Rational::from_integer(1.into());
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn sec(texts: &[&str], n: usize) -> Section {
        PolyVector::parse(texts, n).unwrap()
    }

    #[test]
    fn tangent_presentation_is_valid() {
        assert!(AlgebroidPresentation::tangent(3).verify(1).is_valid());
    }

    #[test]
    fn so3_bundle_is_valid() {
        let p = AlgebroidPresentation::lie_algebra_bundle(3, &so3_constants()).unwrap();
        assert!(p.verify(0).is_valid());
        let b = p.bracket(&p.frame(0), &p.frame(1)).unwrap();
        assert_eq!(b, sec(&["0", "0", "-1"], 3));
    }

    #[test]
    fn bracket_in_tangent_plane() {
        let t = AlgebroidPresentation::tangent(2);
        let dx = sec(&["1", "0"], 2);
        let x_dy = sec(&["0", "x0"], 2);
        assert_eq!(t.bracket(&dx, &x_dy).unwrap(), sec(&["0", "1"], 2));
        assert!(t.bracket(&x_dy, &x_dy).unwrap().is_zero());
    }

    #[test]
    fn anchor_incompatible_structure_is_reported() {
        // [e0, e1] = x0 e0 while rho(e0) = d/dx0 and rho(e1) = 0.
        let anchor = vec![vec![Polynomial::one(1), Polynomial::zero(1)]];
        let mut structure = BTreeMap::new();
        structure.insert((0, 1), sec(&["x0", "0"], 1));
        let p = AlgebroidPresentation::new(1, 2, anchor, structure).unwrap();
        let report = p.verify(1);
        assert!(!report.is_valid());
        assert_eq!(report.anchor_defects.len(), 1);
        assert_eq!(report.anchor_defects[0].1, sec(&["x0"], 1));
    }

    #[test]
    fn pointwise_lie_bracket_bundle_has_no_defect() {
        // Any 2-dimensional bracket is a Lie bracket, so a bundle of such with
        // zero anchor is a Lie algebroid even with nonconstant structure.
        let anchor = vec![vec![Polynomial::zero(1), Polynomial::zero(1)]];
        let mut structure = BTreeMap::new();
        structure.insert((0, 1), sec(&["x0", "0"], 1));
        let p = AlgebroidPresentation::new(1, 2, anchor, structure).unwrap();
        assert!(p.verify(2).is_valid());
    }

    #[test]
    fn shape_errors_name_the_block() {
        let err = AlgebroidPresentation::new(2, 2, vec![vec![Polynomial::zero(2); 2]], BTreeMap::new())
            .unwrap_err();
        assert!(err.to_string().contains("anchor"));
        let pi = QMatrix::from_rows(vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]], 2).unwrap();
        assert!(AlgebroidPresentation::cotangent_constant_poisson(&pi).is_err());
    }
}
