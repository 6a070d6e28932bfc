//! Banded LU with partial pivoting, used for inverse iteration on the
//! block-tridiagonal chain Hamiltonians.

use super::CMatrix;
use crate::scalar::{Real, C};
use num_traits::Zero;

/// (lower, upper) bandwidths of the nonzero pattern.
pub fn bandwidths<T: Real>(a: &CMatrix<T>) -> (usize, usize) {
    let (mut kl, mut ku) = (0, 0);
    for i in 0..a.nrows() {
        for (j, z) in a.row(i).iter().enumerate() {
            if !z.is_zero() {
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
    }
    (kl, ku)
}

/// LU factors of A − σI in band storage. Row pivoting widens the upper
/// band to kl + ku.
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    /// upper bandwidth of U
    ku: usize,
    /// row i holds columns i − kl ..= i + ku (offset by kl)
    rows: Vec<Vec<C<T>>>,
    piv: Vec<usize>,
    /// multipliers l[k][r] for rows k+1 ..= k+kl
    mult: Vec<Vec<C<T>>>,
}

impl<T: Real> BandLu<T> {
    pub fn new(a: &CMatrix<T>, kl: usize, ku: usize, sigma: C<T>, tiny: T) -> Self {
        let n = a.nrows();
        let w = kl + ku + kl + 1;
        let uk = kl + ku;
        let mut rows: Vec<Vec<C<T>>> = (0..n)
            .map(|i| {
                let mut r = vec![C::zero(); w];
                let lo = i.saturating_sub(kl);
                let hi = (i + ku).min(n - 1);
                for j in lo..=hi {
                    r[j + kl - i] = a[(i, j)];
                }
                r[kl] = r[kl] - sigma;
                r
            })
            .collect();
        // entry (i, j) lives at rows[i][j + kl − i]
        let at = |i: usize, j: usize| j + kl - i;
        let mut piv = vec![0; n];
        let mut mult = vec![Vec::new(); n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[k][at(k, k)].norm();
            for i in k + 1..=last {
                let v = rows[i][at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if p != k {
                // swap the overlapping parts of rows k and p (cols k ..= k+uk)
                let hi = (k + uk).min(n - 1);
                for j in k..=hi {
                    let (a1, a2) = (at(k, j), at(p, j));
                    if a2 < w {
                        let t = rows[k][a1];
                        rows[k][a1] = rows[p][a2];
                        rows[p][a2] = t;
                    }
                }
            }
            if rows[k][at(k, k)].norm() <= tiny {
                rows[k][at(k, k)] = C::new(tiny, T::zero());
            }
            let d = rows[k][at(k, k)];
            let hi = (k + uk).min(n - 1);
            let mut m = Vec::with_capacity(last - k);
            for i in k + 1..=last {
                let f = rows[i][at(i, k)] / d;
                rows[i][at(i, k)] = C::zero();
                if !f.is_zero() {
                    for j in k + 1..=hi {
                        let u = rows[k][at(k, j)];
                        let s = at(i, j);
                        if s < w {
                            rows[i][s] = rows[i][s] - f * u;
                        }
                    }
                }
                m.push(f);
            }
            mult[k] = m;
        }
        BandLu {
            n,
            kl,
            ku: uk,
            rows,
            piv,
            mult,
        }
    }

    fn u(&self, i: usize, j: usize) -> C<T> {
        self.rows[i][j + self.kl - i]
    }

    /// Solves (A − σI) x = b.
    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for (r, f) in self.mult[k].iter().enumerate() {
                x[k + 1 + r] = x[k + 1 + r] - *f * xk;
            }
        }
        for i in (0..n).rev() {
            let hi = (i + self.ku).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s = s - self.u(i, j) * x[j];
            }
            x[i] = s / self.u(i, i);
        }
        x
    }

    /// Solves (A − σI)† y = b.
    pub fn solve_adjoint(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        let mut y = b.to_vec();
        // U† z = b (forward)
        for i in 0..n {
            let mut s = y[i];
            let lo = i.saturating_sub(self.ku);
            for j in lo..i {
                s = s - self.u(j, i).conj() * y[j];
            }
            y[i] = s / self.u(i, i).conj();
        }
        // L† then the pivots, in reverse
        for k in (0..n).rev() {
            let mut s = y[k];
            for (r, f) in self.mult[k].iter().enumerate() {
                s = s - f.conj() * y[k + 1 + r];
            }
            y[k] = s;
            y.swap(k, self.piv[k]);
        }
        y
    }
}
