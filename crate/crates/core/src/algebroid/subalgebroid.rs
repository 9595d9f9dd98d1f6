use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::poly::{
    monomials_upto, rank_of_vectors, Monomial, PolyVector, Polynomial, QMatrix, Rational,
};

use super::presentation::{AlgebroidPresentation, Section};
use super::AlgebroidError;

pub const DEFAULT_DEGREE_BOUND: u32 = 4;
pub const WITNESS_SAMPLES: usize = 64;

/// Axis-aligned box with rational bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    lower: Vec<Rational>,
    upper: Vec<Rational>,
}

impl Patch {
    pub fn new(lower: Vec<Rational>, upper: Vec<Rational>) -> Result<Self, AlgebroidError> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(a, b)| a > b) {
            return Err(AlgebroidError::Shape {
                block: "patch".into(),
                message: "bounds must have equal length with lower <= upper".into(),
            });
        }
        Ok(Patch { lower, upper })
    }

    /// The default patch `[-3, 3]^n`.
    pub fn cube(n: usize, half_width: i64) -> Self {
        Patch {
            lower: vec![Rational::from_integer((-half_width).into()); n],
            upper: vec![Rational::from_integer(half_width.into()); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[Rational] {
        &self.lower
    }

    pub fn upper(&self) -> &[Rational] {
        &self.upper
    }

    pub fn lower_f64(&self) -> Vec<f64> {
        self.lower.iter().map(crate::poly::rational::to_f64).collect()
    }

    pub fn upper_f64(&self) -> Vec<f64> {
        self.upper.iter().map(crate::poly::rational::to_f64).collect()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, a), b)| a <= v && v <= b)
    }

    pub fn contains_f64(&self, x: &[f64]) -> bool {
        let lo = self.lower_f64();
        let hi = self.upper_f64();
        x.len() == self.dim() && x.iter().zip(lo.iter().zip(&hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Deterministic rank-1 lattice of `count` points in the box: coordinate
    /// `k` of point `i` is `frac(i * 19^k / count)` rescaled to the bounds.
    pub fn lattice(&self, count: usize) -> Vec<Vec<Rational>> {
        if self.dim() == 0 {
            return vec![Vec::new()];
        }
        let mut gens = Vec::with_capacity(self.dim());
        let mut g: usize = 1;
        for _ in 0..self.dim() {
            gens.push(g);
            g = (g * 19) % count;
        }
        (0..count)
            .map(|i| {
                gens.iter()
                    .enumerate()
                    .map(|(k, &a)| {
                        let frac = Rational::new(((i * a) % count).into(), count.into());
                        &self.lower[k] + (&self.upper[k] - &self.lower[k]) * frac
                    })
                    .collect()
            })
            .collect()
    }
}

/// Finitely many polynomial generator sections of a trivialized algebroid,
/// together with the degree bound used by every coefficient solve.
#[derive(Debug, Clone)]
pub struct SingularSubalgebroid {
    presentation: Arc<AlgebroidPresentation>,
    generators: Vec<Section>,
    degree_bound: u32,
    patch: Patch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InvolutivityVerdict {
    Certified,
    /// `pair = (i, j)` whose bracket leaves the pointwise span at `point`.
    NotInvolutive { point: Vec<String>, pair: (usize, usize) },
    UndeterminedUpTo(u32),
}

/// Coefficients `f_ij^k` with `[alpha_i, alpha_j] = sum_k f_ij^k alpha_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCoefficients {
    pub i: usize,
    pub j: usize,
    pub coefficients: Vec<Polynomial>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvolutivityCertificate {
    pub verdict: InvolutivityVerdict,
    pub coefficients: Vec<PairCoefficients>,
    pub witness_point: Option<Vec<Rational>>,
}

impl InvolutivityCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == InvolutivityVerdict::Certified
    }

    /// Expands every stored identity symbolically; true iff all vanish.
    pub fn reverify(&self, b: &SingularSubalgebroid) -> bool {
        if !self.is_certified() {
            return false;
        }
        self.coefficients.iter().all(|pc| {
            let Ok(lhs) = b.presentation.bracket(&b.generators[pc.i], &b.generators[pc.j]) else {
                return false;
            };
            b.combine(&pc.coefficients)
                .and_then(|rhs| Ok(lhs.sub(&rhs)?))
                .map(|d| d.is_zero())
                .unwrap_or(false)
        })
    }
}

/// Relations `sum_i s_i alpha_i = 0` with `deg s_i <= degree_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyzygyBasis {
    pub relations: Vec<PolyVector>,
    pub degree_bound: u32,
}

/// Fiber dimension computed from degree-bounded syzygies. It is an upper
/// bound on `dim B / I_x B`, exact when the bounded syzygies generate all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FiberDimension {
    pub dim: usize,
    pub degree_bound: u32,
    pub upper_bound_only: bool,
}

/// Linear system matching coefficients of `sum_k f_k alpha_k` with
/// `deg f_k <= bound`; columns are `(generator, monomial)` pairs.
struct CoefficientSystem {
    matrix: QMatrix,
    rows: HashMap<(usize, Monomial), usize>,
    monomials: Vec<Monomial>,
}

impl SingularSubalgebroid {
    pub fn new(
        presentation: Arc<AlgebroidPresentation>,
        generators: Vec<Section>,
        degree_bound: u32,
    ) -> Result<Self, AlgebroidError> {
        let patch = Patch::cube(presentation.base_dim(), 3);
        Self::with_patch(presentation, generators, degree_bound, patch)
    }

    pub fn with_patch(
        presentation: Arc<AlgebroidPresentation>,
        generators: Vec<Section>,
        degree_bound: u32,
        patch: Patch,
    ) -> Result<Self, AlgebroidError> {
        if generators.is_empty() {
            return Err(AlgebroidError::NoGenerators);
        }
        for g in &generators {
            presentation.check_section(g)?;
        }
        let max_deg = generators.iter().filter_map(PolyVector::degree).max().unwrap_or(0);
        if degree_bound < max_deg {
            return Err(AlgebroidError::DegreeBound {
                bound: degree_bound,
                generator_degree: max_deg,
            });
        }
        if patch.dim() != presentation.base_dim() {
            return Err(AlgebroidError::Shape {
                block: "patch".into(),
                message: format!("expected dimension {}", presentation.base_dim()),
            });
        }
        Ok(SingularSubalgebroid {
            presentation,
            generators,
            degree_bound,
            patch,
        })
    }

    pub fn presentation(&self) -> &AlgebroidPresentation {
        &self.presentation
    }

    pub fn presentation_arc(&self) -> &Arc<AlgebroidPresentation> {
        &self.presentation
    }

    pub fn generators(&self) -> &[Section] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn patch(&self) -> &Patch {
        &self.patch
    }

    /// `sum_k f_k alpha_k`.
    pub fn combine(&self, coefficients: &[Polynomial]) -> Result<Section, AlgebroidError> {
        if coefficients.len() != self.generators.len() {
            return Err(AlgebroidError::Shape {
                block: "coefficients".into(),
                message: format!("expected {} coefficients", self.generators.len()),
            });
        }
        let mut acc = self.presentation.zero_section();
        for (f, g) in coefficients.iter().zip(&self.generators) {
            if !f.is_zero() {
                acc = acc.add(&g.mul_poly(f))?;
            }
        }
        Ok(acc)
    }

    fn coefficient_system(&self, bound: u32, extra_rows: &[&Section]) -> CoefficientSystem {
        let n = self.presentation.base_dim();
        let monomials = monomials_upto(n, bound);
        let m = self.generators.len();
        let mut rows: HashMap<(usize, Monomial), usize> = HashMap::new();
        let mut entries: Vec<(usize, usize, Rational)> = Vec::new();
        let row_of = |rows: &mut HashMap<(usize, Monomial), usize>, key: (usize, Monomial)| {
            let next = rows.len();
            *rows.entry(key).or_insert(next)
        };
        for (k, g) in self.generators.iter().enumerate() {
            for (mi, mu) in monomials.iter().enumerate() {
                let col = k * monomials.len() + mi;
                for (c, comp) in g.entries().iter().enumerate() {
                    for (tau, a) in comp.terms() {
                        let row = row_of(&mut rows, (c, mu.mul(tau)));
                        entries.push((row, col, a.clone()));
                    }
                }
            }
        }
        for s in extra_rows {
            for (c, comp) in s.entries().iter().enumerate() {
                for (tau, _) in comp.terms() {
                    row_of(&mut rows, (c, tau.clone()));
                }
            }
        }
        let mut matrix = QMatrix::zeros(rows.len(), m * monomials.len());
        for (r, c, v) in entries {
            let cur = matrix.get(r, c).clone();
            matrix.set(r, c, cur + v);
        }
        CoefficientSystem {
            matrix,
            rows,
            monomials,
        }
    }

    fn coefficients_from_solution(&self, sys: &CoefficientSystem, x: &[Rational]) -> Vec<Polynomial> {
        let n = self.presentation.base_dim();
        let width = sys.monomials.len();
        (0..self.generators.len())
            .map(|k| {
                sys.monomials
                    .iter()
                    .enumerate()
                    .map(|(mi, mu)| Polynomial::monomial(mu.clone(), x[k * width + mi].clone()))
                    .fold(Polynomial::zero(n), |acc, t| &acc + &t)
            })
            .collect()
    }

    /// Exact membership: polynomials `f_k` with `deg f_k <= bound` and
    /// `target = sum_k f_k alpha_k`, if any exist.
    pub fn solve_membership(&self, target: &Section, bound: u32) -> Result<Option<Vec<Polynomial>>, AlgebroidError> {
        self.presentation.check_section(target)?;
        let sys = self.coefficient_system(bound, &[target]);
        let mut rhs = vec![Rational::zero(); sys.matrix.rows()];
        for (c, comp) in target.entries().iter().enumerate() {
            for (tau, a) in comp.terms() {
                rhs[sys.rows[&(c, tau.clone())]] = a.clone();
            }
        }
        let solution = sys.matrix.solve_affine(&rhs)?;
        Ok(solution.map(|x| self.coefficients_from_solution(&sys, &x)))
    }

    pub fn involutivity_certificate(&self) -> Result<InvolutivityCertificate, AlgebroidError> {
        let m = self.generators.len();
        let mut coefficients = Vec::new();
        let mut all_solved = true;
        let mut brackets = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                let b = self.presentation.bracket(&self.generators[i], &self.generators[j])?;
                match self.solve_membership(&b, self.degree_bound)? {
                    Some(f) => coefficients.push(PairCoefficients { i, j, coefficients: f }),
                    None => all_solved = false,
                }
                brackets.push(((i, j), b));
            }
        }
        if all_solved {
            return Ok(InvolutivityCertificate {
                verdict: InvolutivityVerdict::Certified,
                coefficients,
                witness_point: None,
            });
        }
        let r = self.presentation.rank();
        for x in self.patch.lattice(WITNESS_SAMPLES) {
            let values: Vec<Vec<Rational>> = self
                .generators
                .iter()
                .map(|g| g.eval(&x))
                .collect::<Result<_, _>>()?;
            let base_rank = rank_of_vectors(&values, r);
            for ((i, j), b) in &brackets {
                let mut with_bracket = values.clone();
                with_bracket.push(b.eval(&x)?);
                if rank_of_vectors(&with_bracket, r) > base_rank {
                    return Ok(InvolutivityCertificate {
                        verdict: InvolutivityVerdict::NotInvolutive {
                            point: x.iter().map(crate::poly::format_rational).collect(),
                            pair: (*i, *j),
                        },
                        coefficients: Vec::new(),
                        witness_point: Some(x),
                    });
                }
            }
        }
        Ok(InvolutivityCertificate {
            verdict: InvolutivityVerdict::UndeterminedUpTo(self.degree_bound),
            coefficients: Vec::new(),
            witness_point: None,
        })
    }

    pub fn syzygy_basis_upto(&self, bound: u32) -> SyzygyBasis {
        let sys = self.coefficient_system(bound, &[]);
        let n = self.presentation.base_dim();
        let relations = sys
            .matrix
            .nullspace()
            .into_iter()
            .map(|v| {
                PolyVector::new(n, self.coefficients_from_solution(&sys, &v)).expect("uniform nvars")
            })
            .collect();
        SyzygyBasis {
            relations,
            degree_bound: bound,
        }
    }

    /// Span of the evaluated syzygies in `Q^m`.
    fn evaluated_syzygies(&self, x: &[Rational], bound: u32) -> Result<Vec<Vec<Rational>>, AlgebroidError> {
        self.check_point(x)?;
        let syz = self.syzygy_basis_upto(bound);
        Ok(syz
            .relations
            .iter()
            .map(|s| s.eval(x))
            .collect::<Result<_, _>>()?)
    }

    fn check_point(&self, x: &[Rational]) -> Result<(), AlgebroidError> {
        if x.len() != self.presentation.base_dim() {
            return Err(AlgebroidError::PointDimension {
                expected: self.presentation.base_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn fiber_dim_at(&self, x: &[Rational], bound: u32) -> Result<FiberDimension, AlgebroidError> {
        let m = self.generators.len();
        let evaluated = self.evaluated_syzygies(x, bound)?;
        Ok(FiberDimension {
            dim: m - rank_of_vectors(&evaluated, m),
            degree_bound: bound,
            upper_bound_only: true,
        })
    }

    /// Lexicographically smallest index set whose classes form a basis of
    /// `Q^m` modulo the evaluated syzygies (greedy selection is optimal for
    /// this matroid).
    pub fn minimal_generators_at(&self, x: &[Rational], bound: u32) -> Result<Vec<usize>, AlgebroidError> {
        let m = self.generators.len();
        let mut span = self.evaluated_syzygies(x, bound)?;
        let mut rank = rank_of_vectors(&span, m);
        let mut chosen = Vec::new();
        for i in 0..m {
            let mut e = vec![Rational::zero(); m];
            e[i] = Rational::one();
            span.push(e);
            let next = rank_of_vectors(&span, m);
            if next > rank {
                chosen.push(i);
                rank = next;
            } else {
                span.pop();
            }
        }
        Ok(chosen)
    }

    /// `(dim span alpha_i(x), dim span rho(alpha_i)(x))`.
    pub fn evaluation_ranks(&self, x: &[Rational]) -> Result<(usize, usize), AlgebroidError> {
        self.check_point(x)?;
        let r = self.presentation.rank();
        let n = self.presentation.base_dim();
        let fiber: Vec<Vec<Rational>> = self
            .generators
            .iter()
            .map(|g| g.eval(x))
            .collect::<Result<_, _>>()?;
        let anchored: Vec<Vec<Rational>> = self
            .generators
            .iter()
            .map(|g| Ok(self.presentation.anchor_of(g)?.eval(x)?))
            .collect::<Result<_, AlgebroidError>>()?;
        Ok((rank_of_vectors(&fiber, r), rank_of_vectors(&anchored, n)))
    }

    /// Images `F alpha_i` of the generators under a bundle map over the
    /// identity of the base.
    pub fn pushforward_generators(
        &self,
        morphism: &AlgebroidMorphism,
        target: Arc<AlgebroidPresentation>,
    ) -> Result<SingularSubalgebroid, AlgebroidError> {
        let images = self
            .generators
            .iter()
            .map(|g| morphism.apply(g))
            .collect::<Result<Vec<_>, _>>()?;
        let max_deg = images.iter().filter_map(PolyVector::degree).max().unwrap_or(0);
        SingularSubalgebroid::with_patch(
            target,
            images,
            self.degree_bound.max(max_deg),
            self.patch.clone(),
        )
    }
}

/// A bundle map `A_1 -> A_2` over the identity, as an `r2 x r1` matrix of
/// polynomials acting on frame coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebroidMorphism {
    nvars: usize,
    source_rank: usize,
    rows: Vec<Vec<Polynomial>>,
}

impl AlgebroidMorphism {
    pub fn new(nvars: usize, source_rank: usize, rows: Vec<Vec<Polynomial>>) -> Result<Self, AlgebroidError> {
        if rows.iter().any(|r| r.len() != source_rank || r.iter().any(|p| p.nvars() != nvars)) {
            return Err(AlgebroidError::Shape {
                block: "morphism".into(),
                message: format!("rows must have {source_rank} entries in {nvars} variables"),
            });
        }
        Ok(AlgebroidMorphism {
            nvars,
            source_rank,
            rows,
        })
    }

    pub fn identity(nvars: usize, rank: usize) -> Self {
        let rows = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| if i == j { Polynomial::one(nvars) } else { Polynomial::zero(nvars) })
                    .collect()
            })
            .collect();
        AlgebroidMorphism {
            nvars,
            source_rank: rank,
            rows,
        }
    }

    /// The anchor `A -> TM` of a presentation.
    pub fn anchor(p: &AlgebroidPresentation) -> Self {
        AlgebroidMorphism {
            nvars: p.base_dim(),
            source_rank: p.rank(),
            rows: p.anchor_matrix().to_vec(),
        }
    }

    pub fn target_rank(&self) -> usize {
        self.rows.len()
    }

    pub fn apply(&self, s: &Section) -> Result<Section, AlgebroidError> {
        if s.len() != self.source_rank || s.nvars() != self.nvars {
            return Err(AlgebroidError::SectionShape {
                expected_rank: self.source_rank,
                expected_nvars: self.nvars,
                found_rank: s.len(),
                found_nvars: s.nvars(),
            });
        }
        let comps = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(s.entries())
                    .fold(Polynomial::zero(self.nvars), |acc, (a, c)| &acc + &(a * c))
            })
            .collect();
        Ok(PolyVector::new(self.nvars, comps)?)
    }
}
