use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{abs_is_one, format_rational, to_f64, Rational};
use super::PolyError;

/// Exponent vector ordered by graded lexicographic order: total degree
/// first, then lexicographic with `x0 > x1 > ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `nvars` variables of total degree `<= max_degree`,
/// ascending in graded lexicographic order.
pub fn monomials_upto(nvars: usize, max_degree: u32) -> Vec<Monomial> {
    fn fill(prefix: &mut Vec<u32>, remaining_vars: usize, degree: u32, out: &mut Vec<Monomial>) {
        if remaining_vars == 1 {
            prefix.push(degree);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=degree).rev() {
            prefix.push(e);
            fill(prefix, remaining_vars - 1, degree - e, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        out.push(Monomial(Vec::new()));
        return out;
    }
    for d in 0..=max_degree {
        let mut block = Vec::new();
        fill(&mut Vec::with_capacity(nvars), nvars, d, &mut block);
        block.sort();
        out.extend(block);
    }
    out
}

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, i), Rational::one());
        p
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(PolyError::DimensionMismatch {
                    expected: nvars,
                    found: exps.len(),
                });
            }
            p.add_term(Monomial(exps), c);
        }
        Ok(p)
    }

    pub fn parse(text: &str, nvars: usize) -> Result<Self, PolyError> {
        super::parse::parse_polynomial(text, nvars)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending graded lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn is_constant(&self) -> bool {
        self.degree().map_or(true, |d| d == 0)
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one(self.nvars))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative with respect to `x{var}`.
    pub fn diff(&self, var: usize) -> Result<Self, PolyError> {
        if var >= self.nvars {
            return Err(PolyError::VariableOutOfRange {
                index: var,
                nvars: self.nvars,
            });
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] -= 1;
            out.add_term(Monomial(exps), c * Rational::from_integer(e.into()));
        }
        Ok(out)
    }

    fn check_point_len(&self, len: usize) -> Result<(), PolyError> {
        if len != self.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.nvars,
                found: len,
            });
        }
        Ok(())
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        self.check_point_len(point.len())?;
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, PolyError> {
        self.check_point_len(point.len())?;
        Ok(self.compile().eval(point))
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (to_f64(c), m.0.clone()))
                .collect(),
        }
    }

    /// Substitutes `x_i -> images[i]`; all images share one target `nvars`.
    pub fn substitute(&self, images: &[Polynomial], target_nvars: usize) -> Result<Self, PolyError> {
        self.check_point_len(images.len())?;
        let mut out = Self::zero(target_nvars);
        for (m, c) in &self.terms {
            let mut t = Self::constant(target_nvars, c.clone());
            for (img, &e) in images.iter().zip(&m.0) {
                if e > 0 {
                    t = &t * &img.pow(e);
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }
}

impl fmt::Display for Polynomial {
    /// Canonical form: graded-lex descending, explicit `*` and `^`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            let negative = c.is_negative();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let magnitude = c.abs();
            let factors: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{i}")
                    } else {
                        format!("x{i}^{e}")
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{}", format_rational(&magnitude))?;
            } else if abs_is_one(c) {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&magnitude), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Polynomials deserialize from text given the variable count out of band,
/// so a bare `Deserialize` impl is not provided; this helper carries it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyText(pub String);

impl PolyText {
    pub fn to_polynomial(&self, nvars: usize) -> Result<Polynomial, PolyError> {
        Polynomial::parse(&self.0, nvars)
    }
}

fn assert_same_nvars(a: &Polynomial, b: &Polynomial) {
    assert_eq!(
        a.nvars, b.nvars,
        "polynomial arithmetic across different variable counts"
    );
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_same_nvars(self, rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_same_nvars(self, rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_same_nvars(self, rhs);
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Float evaluator built once from a polynomial for hot loops (flows).
#[derive(Debug, Clone, Default)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl CompiledPoly {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, exps) in &self.terms {
            let mut t = *c;
            for (xi, &e) in x.iter().zip(exps) {
                match e {
                    0 => {}
                    1 => t *= xi,
                    2 => t *= xi * xi,
                    _ => t *= xi.powi(e as i32),
                }
            }
            acc += t;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational::rat;

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    #[test]
    fn eval_examples() {
        let q = p("x0^2 - 2*x1", 2);
        assert_eq!(q.eval(&[rat(3), rat(1)]).unwrap(), rat(7));
        let c = p("(x0+x1)^3", 2);
        assert_eq!(c.eval(&[rat(1), rat(1)]).unwrap(), rat(8));
        let k = p("5 + x0*x1 - 7*x1^3", 2);
        assert_eq!(k.eval(&[rat(0), rat(0)]).unwrap(), rat(5));
        assert!(q.eval(&[rat(1)]).is_err());
        assert_eq!(q.eval_f64(&[3.0, 1.0]).unwrap(), 7.0);
    }

    #[test]
    fn diff_examples() {
        assert!(p("5", 1).diff(0).unwrap().is_zero());
        assert_eq!(p("x0^2*x1", 2).diff(0).unwrap(), p("2*x0*x1", 2));
        assert_eq!(p("x0^2 - 2*x1", 2).diff(1).unwrap(), p("-2", 2));
        assert!(p("x0", 1).diff(1).is_err());
    }

    #[test]
    fn grlex_order_and_printing() {
        let q = p("x1 + x0 + x0*x1 + 3 + x1^2", 2);
        assert_eq!(q.to_string(), "x0*x1 + x1^2 + x0 + x1 + 3");
        assert_eq!(p("-x0 + 1/2*x1^2", 2).to_string(), "1/2*x1^2 - x0");
        assert_eq!(p("0", 3).to_string(), "0");
    }

    #[test]
    fn monomial_enumeration_counts() {
        assert_eq!(monomials_upto(3, 2).len(), 10);
        assert_eq!(monomials_upto(0, 4).len(), 1);
        let ms = monomials_upto(2, 2);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn substitution() {
        let q = p("x0*x1", 2);
        let images = [p("x0 + 1", 1), p("x0 - 1", 1)];
        assert_eq!(q.substitute(&images, 1).unwrap(), p("x0^2 - 1", 1));
    }
}
