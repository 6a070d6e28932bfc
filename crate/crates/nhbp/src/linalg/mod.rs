//! Small dense complex linear algebra: a row-major matrix, LU inversion for
//! tiny Gram matrices, and a Hessenberg/QR eigensolver in [`eigen`].

pub mod band;
pub mod eigen;

use crate::scalar::{Real, C};
use num_traits::{One, Zero};
use std::ops::{Index, IndexMut};

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        CMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn from_columns(cols: &[Vec<C<T>>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| cols[j][i])
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C<T>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C<T>]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = *x;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(C::zero(), |a, (x, y)| a + x * y))
            .collect()
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let orow = o.row(k);
                let dst = out.row_mut(i);
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn norm_fro(&self) -> T {
        crate::scalar::norm2(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| f(*z)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// ⟨a|b⟩ = Σ conj(a_i) b_i
pub fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(C::zero(), |acc, (x, y)| acc + x.conj() * y)
}

/// Inverse by partial-pivot LU. Returns `None` when a pivot falls below
/// `tol` times the largest entry.
pub fn invert<T: Real>(m: &CMatrix<T>, tol: T) -> Option<CMatrix<T>> {
    assert!(m.is_square());
    let n = m.nrows();
    let scale = m.max_abs();
    if scale == T::zero() {
        return None;
    }
    let mut a = m.clone();
    let mut inv = CMatrix::identity(n);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| a[(x, k)].norm().partial_cmp(&a[(y, k)].norm()).unwrap())
            .unwrap();
        if a[(p, k)].norm() <= tol * scale {
            return None;
        }
        if p != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = t;
                let t = inv[(k, j)];
                inv[(k, j)] = inv[(p, j)];
                inv[(p, j)] = t;
            }
        }
        let piv = a[(k, k)].inv();
        for j in 0..n {
            a[(k, j)] = a[(k, j)] * piv;
            inv[(k, j)] = inv[(k, j)] * piv;
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let f = a[(i, k)];
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let (akj, ikj) = (a[(k, j)], inv[(k, j)]);
                a[(i, j)] = a[(i, j)] - f * akj;
                inv[(i, j)] = inv[(i, j)] - f * ikj;
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn invert_roundtrip() {
        let m = CMatrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.5, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 0.0), c(3.0, 0.1), c(1.0, 1.0)],
            vec![c(2.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)],
        ]);
        let inv = invert(&m, 1e-14).unwrap();
        let id = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - c(e, 0.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_is_detected() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        assert!(invert(&m, 1e-12).is_none());
    }

    #[test]
    fn adjoint_and_matvec() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 1.0), c(2.0, 0.0)], vec![c(0.0, 3.0), c(4.0, -1.0)]]);
        let a = m.adjoint();
        assert_eq!(a[(0, 1)], c(0.0, -3.0));
        let v = m.matvec(&[c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(v, vec![c(1.0, 3.0), c(1.0, 7.0)]);
    }
}
