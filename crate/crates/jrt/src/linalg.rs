//! Dense matrices over an exact field.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::plocal::{Scalar, Q};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data: Vec<T> = rows.into_iter().flatten().collect();
        Self::new(r, c, data)
    }

    pub fn from_cols(cols: &[Vec<T>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| cols[j][i].clone())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diag(d: &[T]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i].clone() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let cur = std::mem::replace(&mut out[(i, j)], T::zero());
                    out[(i, j)] = cur + a.clone() * b.clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(T::zero(), |acc, j| acc + self[(i, j)].clone() * v[j].clone())
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len());
        (0..self.cols)
            .map(|j| {
                (0..self.rows).fold(T::zero(), |acc, i| acc + v[i].clone() * self[(i, j)].clone())
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + o[(i, j)].clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - o[(i, j)].clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn hstack(&self, o: &Self) -> Self {
        assert_eq!(self.rows, o.rows);
        Self::from_fn(self.rows, self.cols + o.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                o[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::identity(self.rows), |acc, _| acc.mul(self))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn det(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| !m[(r, c)].is_zero()) else {
                return T::zero();
            };
            if piv != c {
                m.swap_rows(piv, c);
                det = -det;
            }
            let pv = m[(c, c)].clone();
            det = det * pv.clone();
            for r in c + 1..n {
                if m[(r, c)].is_zero() {
                    continue;
                }
                let f = m[(r, c)].clone() / pv.clone();
                for k in c..n {
                    let v = m[(r, k)].clone() - f.clone() * m[(c, k)].clone();
                    m[(r, k)] = v;
                }
            }
        }
        det
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(piv, r);
            let inv = T::one() / m[(r, c)].clone();
            for k in 0..m.cols {
                let v = m[(r, k)].clone() * inv.clone();
                m[(r, k)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for k in 0..m.cols {
                    let v = m[(i, k)].clone() - f.clone() * m[(r, k)].clone();
                    m[(i, k)] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = self.hstack(&Self::identity(n));
        let (r, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| r[(i, n + j)].clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    /// Every entry has nonnegative valuation.
    pub fn is_integral(&self, p: u64) -> bool {
        self.data.iter().all(|x| x.is_integral(p))
    }

    /// Minimal valuation over the nonzero entries.
    pub fn min_val(&self, p: u64) -> Option<i64> {
        self.data.iter().filter_map(|x| x.val(p)).min()
    }

    /// Coefficients of the characteristic polynomial det(x − A), constant term first.
    pub fn charpoly(&self) -> Vec<T> {
        // Faddeev–LeVerrier needs division by integers, fine in characteristic 0.
        let n = self.rows;
        let mut coeffs = vec![T::zero(); n + 1];
        coeffs[n] = T::one();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            let mut next = self.mul(&m);
            for i in 0..n {
                let v = next[(i, i)].clone() + coeffs[n - k + 1].clone();
                next[(i, i)] = v;
            }
            m = next;
            let am = self.mul(&m);
            let tr = (0..n).fold(T::zero(), |acc, i| acc + am[(i, i)].clone());
            coeffs[n - k] = -(tr / T::from_q(Q::from_integer((k as i64).into())));
        }
        coeffs
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
        }
        write!(f, "]")
    }
}

pub fn unit_vector<T: Scalar>(n: usize, i: usize) -> Vec<T> {
    (0..n).map(|k| if k == i { T::one() } else { T::zero() }).collect()
}

pub fn lift_q<T: Scalar>(m: &Matrix<Q>) -> Matrix<T> {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| T::from_q(m[(i, j)].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plocal::qi;

    fn qm(rows: Vec<Vec<i64>>) -> Matrix<Q> {
        Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(qi).collect()).collect())
    }

    #[test]
    fn det_and_inverse() {
        let a = qm(vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        assert_eq!(a.det(), qi(18));
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert!(qm(vec![vec![1, 2], vec![2, 4]]).inverse().is_none());
    }

    #[test]
    fn charpoly_matches_det() {
        let a = qm(vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(a.charpoly(), vec![qi(-2), qi(-5), qi(1)]);
        let b = qm(vec![vec![2, 0, 1], vec![1, -1, 0], vec![0, 3, 1]]);
        let cp = b.charpoly();
        // det(x - B) at x = 2
        let x = qi(2);
        let val = cp.iter().rev().fold(qi(0), |acc, c| acc * x.clone() + c.clone());
        let m = Matrix::identity(3).scale(&x).sub(&b);
        assert_eq!(val, m.det());
    }
}
