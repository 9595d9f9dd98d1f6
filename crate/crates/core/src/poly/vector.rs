use std::fmt;

use super::polynomial::Polynomial;
use super::rational::Rational;
use super::PolyError;

/// Fixed-length tuple of polynomials over a shared variable count.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyVector {
    nvars: usize,
    entries: Vec<Polynomial>,
}

impl PolyVector {
    pub fn new(nvars: usize, entries: Vec<Polynomial>) -> Result<Self, PolyError> {
        if let Some(bad) = entries.iter().find(|p| p.nvars() != nvars) {
            return Err(PolyError::DimensionMismatch {
                expected: nvars,
                found: bad.nvars(),
            });
        }
        Ok(PolyVector { nvars, entries })
    }

    pub fn zero(nvars: usize, len: usize) -> Self {
        PolyVector {
            nvars,
            entries: vec![Polynomial::zero(nvars); len],
        }
    }

    /// The `i`-th unit vector with constant entries.
    pub fn unit(nvars: usize, len: usize, i: usize) -> Self {
        let mut v = Self::zero(nvars, len);
        v.entries[i] = Polynomial::one(nvars);
        v
    }

    pub fn parse(texts: &[impl AsRef<str>], nvars: usize) -> Result<Self, PolyError> {
        let entries = texts
            .iter()
            .map(|t| Polynomial::parse(t.as_ref(), nvars))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyVector { nvars, entries })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &Polynomial {
        &self.entries[i]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Polynomial::is_zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.entries.iter().filter_map(Polynomial::degree).max()
    }

    fn check_len(&self, other: &PolyVector) -> Result<(), PolyError> {
        if self.len() != other.len() || self.nvars != other.nvars {
            return Err(PolyError::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &PolyVector) -> Result<Self, PolyError> {
        self.check_len(other)?;
        Ok(PolyVector {
            nvars: self.nvars,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &PolyVector) -> Result<Self, PolyError> {
        self.check_len(other)?;
        Ok(PolyVector {
            nvars: self.nvars,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    /// Multiplies every entry by the polynomial `f`.
    pub fn mul_poly(&self, f: &Polynomial) -> Self {
        PolyVector {
            nvars: self.nvars,
            entries: self.entries.iter().map(|a| a * f).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PolyVector {
            nvars: self.nvars,
            entries: self.entries.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Vec<Rational>, PolyError> {
        self.entries.iter().map(|p| p.eval(point)).collect()
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<Vec<f64>, PolyError> {
        self.entries.iter().map(|p| p.eval_f64(point)).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.entries.iter().map(Polynomial::to_string).collect()
    }
}

impl fmt::Display for PolyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}
