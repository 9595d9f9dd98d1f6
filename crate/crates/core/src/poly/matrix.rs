//! Dense exact matrices over the rationals.

use num_traits::{One, Zero};

use super::rational::Rational;
use super::PolyError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self, PolyError> {
        if entries.len() != rows * cols {
            return Err(PolyError::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(QMatrix { rows, cols, entries })
    }

    /// Builds from row vectors; an empty list gives a `0 x cols` matrix.
    pub fn from_rows(rows: Vec<Vec<Rational>>, cols: usize) -> Result<Self, PolyError> {
        let nrows = rows.len();
        let mut entries = Vec::with_capacity(nrows * cols);
        for r in rows {
            if r.len() != cols {
                return Err(PolyError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            entries.extend(r);
        }
        Ok(QMatrix {
            rows: nrows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>, PolyError> {
        if v.len() != self.cols {
            return Err(PolyError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m.get(row, col).recip();
            for c in col..m.cols {
                let v = m.get(row, c) * &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    if m.get(row, c).is_zero() {
                        continue;
                    }
                    let v = m.get(r, c) - &factor * m.get(row, c);
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right nullspace, itself brought to reduced echelon form
    /// so the result does not depend on elimination order.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let raw: Vec<Vec<Rational>> = (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![Rational::zero(); self.cols];
                v[free] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(row, free).clone();
                }
                v
            })
            .collect();
        if raw.is_empty() {
            return raw;
        }
        let basis = QMatrix::from_rows(raw, self.cols).expect("uniform rows");
        let (reduced, pivots) = basis.rref();
        (0..pivots.len()).map(|i| reduced.row(i).to_vec()).collect()
    }

    /// One exact solution of `self * x = rhs`, with every free variable set
    /// to zero, or `None` when the system is inconsistent.
    pub fn solve_affine(&self, rhs: &[Rational]) -> Result<Option<Vec<Rational>>, PolyError> {
        if rhs.len() != self.rows {
            return Err(PolyError::DimensionMismatch {
                expected: self.rows,
                found: rhs.len(),
            });
        }
        let mut aug = QMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, rhs[r].clone());
        }
        let (red, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = red.get(row, self.cols).clone();
        }
        Ok(Some(x))
    }
}

/// Rank of a list of rational vectors of common length.
pub fn rank_of_vectors(vectors: &[Vec<Rational>], len: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    QMatrix::from_rows(vectors.to_vec(), len)
        .map(|m| m.rank())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational::rat;

    fn m(rows: &[&[i64]]) -> QMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        QMatrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect(),
            cols,
        )
        .unwrap()
    }

    #[test]
    fn nullspace_examples() {
        assert!(QMatrix::identity(2).nullspace().is_empty());
        assert_eq!(m(&[&[1, 1]]).nullspace(), vec![vec![rat(1), rat(-1)]]);
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(a.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn solve_examples() {
        let id = QMatrix::identity(2);
        assert_eq!(id.solve_affine(&[rat(1), rat(2)]).unwrap(), Some(vec![rat(1), rat(2)]));
        assert_eq!(m(&[&[1, 1]]).solve_affine(&[rat(0)]).unwrap(), Some(vec![rat(0), rat(0)]));
        assert_eq!(m(&[&[1], &[1]]).solve_affine(&[rat(0), rat(1)]).unwrap(), None);
        assert!(id.solve_affine(&[rat(1)]).is_err());
    }

    #[test]
    fn rank_counts() {
        assert_eq!(m(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(QMatrix::zeros(0, 3).rank(), 0);
        assert_eq!(rank_of_vectors(&[vec![rat(0), rat(0)]], 2), 0);
    }
}
