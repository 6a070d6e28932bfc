//! Complex non-symmetric eigensolver: Householder reduction to Hessenberg
//! form, single-shift QR with Wilkinson shifts to Schur form, eigenvectors
//! by back-substitution on the triangular factor.

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use num_traits::{One, Zero};

#[inline]
fn cabs1<T: Real>(z: C<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// Reduces `a` to upper Hessenberg form in place, A = Q H Q†. When `q` is
/// given it must be the identity on entry and receives Q.
pub fn hessenberg<T: Real>(a: &mut CMatrix<T>, mut q: Option<&mut CMatrix<T>>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![C::<T>::zero(); n];
    let mut w = vec![C::<T>::zero(); n];
    for k in 0..n - 2 {
        // trailing zeros of the column (banded input) shorten the reflector
        let last = (k + 1..n).rev().find(|&i| !a[(i, k)].is_zero()).unwrap_or(k + 1);
        let m = last - k;
        let x: Vec<C<T>> = (k + 1..=last).map(|i| a[(i, k)]).collect();
        let xn = crate::scalar::norm2(&x);
        if xn == T::zero() {
            continue;
        }
        let tail = crate::scalar::norm2(&x[1..]);
        if tail == T::zero() {
            continue;
        }
        let phase = if x[0].norm() > T::zero() {
            x[0] / x[0].norm()
        } else {
            C::one()
        };
        let alpha = -phase * xn;
        let vv = &mut v[..m];
        vv.copy_from_slice(&x);
        vv[0] = vv[0] - alpha;
        let vn = crate::scalar::norm2(vv);
        for z in vv.iter_mut() {
            *z = *z / vn;
        }
        let two = T::lit(2.0);
        // rows: A[k+1.., k..] -= 2 v (v† A)
        let ww = &mut w[..n];
        for z in ww.iter_mut() {
            *z = C::zero();
        }
        for (r, vr) in vv.iter().enumerate() {
            let cv = vr.conj();
            let row = a.row(k + 1 + r);
            for j in k..n {
                ww[j] = ww[j] + cv * row[j];
            }
        }
        for (r, vr) in vv.iter().enumerate() {
            let f = *vr * two;
            let row = a.row_mut(k + 1 + r);
            for j in k..n {
                row[j] = row[j] - f * ww[j];
            }
        }
        // columns: A[.., k+1..] -= 2 (A v) v†
        for i in 0..n {
            let row = a.row_mut(i);
            let s = vv
                .iter()
                .enumerate()
                .fold(C::zero(), |acc, (r, vr)| acc + row[k + 1 + r] * vr);
            let f = s * two;
            for (r, vr) in vv.iter().enumerate() {
                row[k + 1 + r] = row[k + 1 + r] - f * vr.conj();
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..=last {
            a[(i, k)] = C::zero();
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let row = q.row_mut(i);
                let s = vv
                    .iter()
                    .enumerate()
                    .fold(C::zero(), |acc, (r, vr)| acc + row[k + 1 + r] * vr);
                let f = s * two;
                for (r, vr) in vv.iter().enumerate() {
                    row[k + 1 + r] = row[k + 1 + r] - f * vr.conj();
                }
            }
        }
    }
}

/// Rotation [c s; −s̄ c] taking (a, b) to (r, 0).
#[inline]
fn givens<T: Real>(a: C<T>, b: C<T>) -> (T, C<T>, C<T>) {
    let an = a.norm();
    if b.is_zero() {
        return (T::one(), C::zero(), a);
    }
    if an == T::zero() {
        let bn = b.norm();
        return (T::zero(), b.conj() / bn, C::new(bn, T::zero()));
    }
    let nrm = an.hypot(b.norm());
    let ph = a / an;
    (an / nrm, ph * b.conj() / nrm, ph * nrm)
}

/// Eigenvalue of the 2×2 block [[a, b], [c, d]] closer to d.
fn wilkinson<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> C<T> {
    let half = T::lit(0.5);
    let p = (a - d) * half;
    let bc = b * c;
    let disc = (p * p + bc).sqrt();
    let den = if (p.conj() * disc).re >= T::zero() {
        p + disc
    } else {
        p - disc
    };
    if den.is_zero() {
        d
    } else {
        d - bc / den
    }
}

/// Overwrites the Hessenberg matrix `h` with its Schur form T (when `full`)
/// or just converges its diagonal to the eigenvalues. Rotations are
/// accumulated into `z` when given.
fn hqr<T: Real>(h: &mut CMatrix<T>, mut z: Option<&mut CMatrix<T>>, full: bool) -> Result<()> {
    let n = h.nrows();
    if n < 2 {
        return Ok(());
    }
    let eps = T::epsilon();
    let small = T::min_positive_value() / eps;
    let max_sweeps = 40 * n.max(10);
    let mut sweeps = 0;
    let mut its = 0usize;
    let mut hi = n - 1;
    let mut rots: Vec<(T, C<T>)> = Vec::with_capacity(n);
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs1(h[(lo, lo - 1)]);
            let mut s = cabs1(h[(lo, lo)]) + cabs1(h[(lo - 1, lo - 1)]);
            if s == T::zero() {
                s = (lo.saturating_sub(1)..=hi.min(n - 1))
                    .map(|i| cabs1(h[(i, i)]))
                    .fold(T::zero(), |a, b| a + b);
            }
            if sub <= small.max(eps * s) {
                h[(lo, lo - 1)] = C::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::NoConvergence(sweeps));
        }
        let mu = if its % 10 == 0 {
            h[(hi, hi)] + C::new(T::lit(0.75) * cabs1(h[(hi, hi - 1)]), T::zero())
        } else {
            wilkinson(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        let col_end = if full { n } else { hi + 1 };
        let row_start = if full { 0 } else { lo };
        for i in lo..=hi {
            h[(i, i)] = h[(i, i)] - mu;
        }
        rots.clear();
        for k in lo..hi {
            let (cs, sn, r) = givens(h[(k, k)], h[(k + 1, k)]);
            h[(k, k)] = r;
            h[(k + 1, k)] = C::zero();
            let snc = sn.conj();
            for j in k + 1..col_end {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * cs + sn * y;
                h[(k + 1, j)] = y * cs - snc * x;
            }
            rots.push((cs, sn));
        }
        // right rotations row by row: rows are independent, so each one is
        // a single streaming pass over columns lo..=hi
        for i in row_start..=hi {
            let first = i.saturating_sub(1).max(lo);
            rotate_row(&mut h.row_mut(i)[first..=hi], &rots[first - lo..]);
        }
        if let Some(z) = z.as_deref_mut() {
            for i in 0..n {
                rotate_row(&mut z.row_mut(i)[lo..=hi], &rots);
            }
        }
        for i in lo..=hi {
            h[(i, i)] = h[(i, i)] + mu;
        }
    }
    Ok(())
}

/// Applies rotations k = 0, 1, … to column pairs (k, k+1) of one row.
#[inline]
fn rotate_row<T: Real>(row: &mut [C<T>], rots: &[(T, C<T>)]) {
    let mut x = row[0];
    for (k, &(cs, sn)) in rots.iter().enumerate() {
        let y = row[k + 1];
        row[k] = x * cs + y * sn.conj();
        x = y * cs - x * sn;
    }
    row[rots.len()] = x;
}

fn check_input<T: Real>(a: &CMatrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Eigenvalues only, in Schur-diagonal order.
pub fn eigenvalues<T: Real>(a: &CMatrix<T>) -> Result<Vec<C<T>>> {
    check_input(a)?;
    let mut h = a.clone();
    hessenberg(&mut h, None);
    hqr(&mut h, None, false)?;
    Ok((0..h.nrows()).map(|i| h[(i, i)]).collect())
}

/// Schur decomposition A = Z T Z†.
pub struct Schur<T> {
    pub t: CMatrix<T>,
    pub z: CMatrix<T>,
}

pub fn schur<T: Real>(a: &CMatrix<T>) -> Result<Schur<T>> {
    check_input(a)?;
    let n = a.nrows();
    let mut h = a.clone();
    let mut z = CMatrix::identity(n);
    hessenberg(&mut h, Some(&mut z));
    hqr(&mut h, Some(&mut z), true)?;
    // clean the strictly lower part left by deflation
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = C::zero();
        }
    }
    Ok(Schur { t: h, z })
}

/// Eigenvalues and unit-norm right eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<C<T>>,
    pub vectors: CMatrix<T>,
}

pub fn eig<T: Real>(a: &CMatrix<T>) -> Result<Eigen<T>> {
    let Schur { t, z } = schur(a)?;
    let n = t.nrows();
    let values: Vec<C<T>> = (0..n).map(|i| t[(i, i)]).collect();
    let x = triangular_vectors(&t);
    let mut v = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let zij = z[(i, j)];
            if zij.is_zero() {
                continue;
            }
            let xrow = &x.row(j)[j..];
            let vrow = &mut v.row_mut(i)[j..];
            for (d, s) in vrow.iter_mut().zip(xrow) {
                *d = *d + zij * s;
            }
        }
    }
    for k in 0..n {
        let col = v.column(k);
        let nrm = crate::scalar::norm2(&col);
        if nrm > T::zero() {
            for i in 0..n {
                v[(i, k)] = v[(i, k)] / nrm;
            }
        }
    }
    Ok(Eigen { values, vectors: v })
}

/// Right and left eigenvectors from one Schur form, so both sides share the
/// same eigenvalue list and need no matching.
pub struct EigenPair<T> {
    pub values: Vec<C<T>>,
    pub right: CMatrix<T>,
    pub left: CMatrix<T>,
}

pub fn eig_both<T: Real>(a: &CMatrix<T>) -> Result<EigenPair<T>> {
    let Schur { t, z } = schur(a)?;
    let n = t.nrows();
    let values: Vec<C<T>> = (0..n).map(|i| t[(i, i)]).collect();
    let right = back_transform(&z, &triangular_vectors(&t));
    let left = back_transform(&z, &triangular_left_vectors(&t));
    Ok(EigenPair { values, right, left })
}

/// Z·X with unit-norm columns.
fn back_transform<T: Real>(z: &CMatrix<T>, x: &CMatrix<T>) -> CMatrix<T> {
    let n = z.nrows();
    let mut v = z.matmul(x);
    for k in 0..n {
        let nrm = crate::scalar::norm2(&v.column(k));
        if nrm > T::zero() {
            for i in 0..n {
                v[(i, k)] = v[(i, k)] / nrm;
            }
        }
    }
    v
}

/// Columns y_k with T† y_k = conj(t_kk) y_k, y_k[k] = 1, zero above k.
fn triangular_left_vectors<T: Real>(t: &CMatrix<T>) -> CMatrix<T> {
    let n = t.nrows();
    let tnorm = t.max_abs().max(T::min_positive_value());
    let smin = (T::epsilon() * tnorm).max(T::min_positive_value() / T::epsilon());
    let big = T::max_value().sqrt() / T::from_usize_lossy(n.max(1));
    let mut y = CMatrix::zeros(n, n);
    let mut x = vec![C::<T>::zero(); n];
    for k in 0..n {
        let lam = t[(k, k)].conj();
        x[k] = C::one();
        for i in k + 1..n {
            let s = (k..i).fold(C::<T>::zero(), |acc, j| acc + t[(j, i)].conj() * x[j]);
            let mut d = t[(i, i)].conj() - lam;
            if d.norm() < smin {
                d = C::new(smin, T::zero());
            }
            let xi = -s / d;
            x[i] = xi;
            let m = xi.norm();
            if m > big {
                let f = T::one() / m;
                for xj in x[k..=i].iter_mut() {
                    *xj = *xj * f;
                }
            }
        }
        for i in k..n {
            y[(i, k)] = x[i];
            x[i] = C::zero();
        }
    }
    y
}

/// Columns x_k with T x_k = t_kk x_k, x_k[k] = 1, zero below k.
fn triangular_vectors<T: Real>(t: &CMatrix<T>) -> CMatrix<T> {
    let n = t.nrows();
    let tnorm = t.max_abs().max(T::min_positive_value());
    let smin = (T::epsilon() * tnorm).max(T::min_positive_value() / T::epsilon());
    let big = T::max_value().sqrt() / T::from_usize_lossy(n.max(1));
    // stored transposed: row k of `xt` is eigenvector k
    let mut xt = CMatrix::zeros(n, n);
    let mut x = vec![C::<T>::zero(); n];
    for k in 0..n {
        let lam = t[(k, k)];
        for xi in x[..=k].iter_mut() {
            *xi = C::zero();
        }
        x[k] = C::one();
        for i in (0..k).rev() {
            let row = t.row(i);
            let s = (i + 1..=k).fold(C::<T>::zero(), |acc, j| acc + row[j] * x[j]);
            let mut d = t[(i, i)] - lam;
            if d.norm() < smin {
                d = C::new(smin, T::zero());
            }
            let xi = -s / d;
            x[i] = xi;
            let m = xi.norm();
            if m > big {
                let f = T::one() / m;
                for xj in x[i..=k].iter_mut() {
                    *xj = *xj * f;
                }
            }
        }
        let dst = xt.row_mut(k);
        dst[..=k].copy_from_slice(&x[..=k]);
    }
    xt.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn residual(a: &CMatrix<f64>, e: &Eigen<f64>) -> f64 {
        let n = a.nrows();
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let v = e.vectors.column(k);
            let av = a.matvec(&v);
            let r: Vec<_> = av.iter().zip(&v).map(|(x, y)| x - e.values[k] * y).collect();
            worst = worst.max(crate::scalar::norm2(&r));
        }
        worst / a.norm_fro()
    }

    #[test]
    fn hessenberg_preserves_similarity() {
        let a = random_matrix(7, 1);
        let mut h = a.clone();
        let mut q = CMatrix::identity(7);
        hessenberg(&mut h, Some(&mut q));
        for i in 0..7 {
            for j in 0..(i as usize).saturating_sub(1) {
                assert_eq!(h[(i, j)], c(0.0, 0.0));
            }
        }
        let back = q.matmul(&h).matmul(&q.adjoint());
        for i in 0..7 {
            for j in 0..7 {
                assert!((back[(i, j)] - a[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn left_vectors_share_the_schur_values() {
        let a = random_matrix(15, 5);
        let e = eig_both(&a).unwrap();
        let ah = a.adjoint();
        for k in 0..15 {
            let l = e.left.column(k);
            let r: Vec<_> = ah.matvec(&l).iter().zip(&l).map(|(x, y)| x - e.values[k].conj() * y).collect();
            assert!(crate::scalar::norm2(&r) < 1e-12 * a.norm_fro());
        }
    }

    #[test]
    fn schur_reconstructs() {
        let a = random_matrix(12, 2);
        let s = schur(&a).unwrap();
        let back = s.z.matmul(&s.t).matmul(&s.z.adjoint());
        for i in 0..12 {
            for j in 0..12 {
                assert!((back[(i, j)] - a[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn random_eigenpairs() {
        for (n, seed) in [(1, 3), (2, 4), (5, 5), (40, 6), (120, 7)] {
            let a = random_matrix(n, seed);
            let e = eig(&a).unwrap();
            assert!(residual(&a, &e) < 1e-12, "n = {n}");
            let mut tr = C::<f64>::zero();
            for i in 0..n {
                tr += a[(i, i)];
            }
            let s: C<f64> = e.values.iter().sum();
            assert!((s - tr).norm() < 1e-10 * n as f64);
        }
    }

    #[test]
    fn known_spectrum() {
        // [[0, 2.5], [−0.5, 0]] has ±i√1.25
        let a = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(2.5, 0.0)], vec![c(-0.5, 0.0), c(0.0, 0.0)]]);
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((ev[0] - c(0.0, -1.25f64.sqrt())).norm() < 1e-14);
        assert!((ev[1] - c(0.0, 1.25f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn defective_and_degenerate_inputs_terminate() {
        // Jordan block and the zero matrix
        let j = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        let ev = eigenvalues(&j).unwrap();
        assert!(ev.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-12));
        let z = CMatrix::<f64>::zeros(4, 4);
        assert!(eig(&z).unwrap().values.iter().all(|v| v.norm() == 0.0));
        // cyclic permutation: roots of unity, a classic stall case
        let p = CMatrix::from_fn(6, 6, |i, j| if j == (i + 1) % 6 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let ev = eigenvalues(&p).unwrap();
        assert!(ev.iter().all(|z: &C<f64>| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn single_precision_eigs() {
        let a = random_matrix(10, 9);
        let a32 = CMatrix::from_fn(10, 10, |i, j| {
            let z = a[(i, j)];
            C::new(z.re as f32, z.im as f32)
        });
        let e = eig(&a32).unwrap();
        for k in 0..10 {
            let v = e.vectors.column(k);
            let av = a32.matvec(&v);
            let r: Vec<_> = av.iter().zip(&v).map(|(x, y)| x - e.values[k] * y).collect();
            assert!(crate::scalar::norm2(&r) < 1e-4);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut a = random_matrix(3, 10);
        a[(1, 1)] = c(f64::NAN, 0.0);
        assert!(eig(&a).is_err());
        assert!(eig(&CMatrix::<f64>::zeros(2, 3)).is_err());
    }
}
