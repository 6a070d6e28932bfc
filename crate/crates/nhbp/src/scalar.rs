//! Scalar abstraction. Everything numeric is generic over [`Real`]; the
//! crate root fixes `f64` aliases for the common case.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("index representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn i_unit<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// e^{iθ}
#[inline]
pub fn cis<T: Real>(theta: T) -> C<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn to_c64<T: Real>(z: C<T>) -> (f64, f64) {
    (z.re.as_f64(), z.im.as_f64())
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut x = a % two_pi;
    if x > T::PI() {
        x = x - two_pi;
    } else if x <= -T::PI() {
        x = x + two_pi;
    }
    x
}

/// (cos x, sin x) with exact 0/±1 at multiples of π/2, so high-symmetry
/// momenta do not leak ~1e-16 terms into d.
pub fn sin_cos<T: Real>(x: T) -> (T, T) {
    let q = (x / T::FRAC_PI_2()).round();
    if (x - q * T::FRAC_PI_2()).abs() <= T::lit(4.0) * T::epsilon() * x.abs().max(T::one()) {
        let m = q.to_i64().unwrap_or(0).rem_euclid(4);
        let (o, z) = (T::one(), T::zero());
        return [(o, z), (z, o), (-o, z), (z, -o)][m as usize];
    }
    (x.cos(), x.sin())
}

/// Complex (cos k, sin k) built on [`sin_cos`] of the real part.
pub fn csin_cos<T: Real>(k: C<T>) -> (C<T>, C<T>) {
    let (ca, sa) = sin_cos(k.re);
    let (ch, sh) = (k.im.cosh(), k.im.sinh());
    (c(ca * ch, -(sa * sh)), c(sa * ch, ca * sh))
}

pub fn norm2<T: Real>(v: &[C<T>]) -> T {
    // scaled to survive the huge dynamic range of skin-effect vectors
    let scale = v.iter().fold(T::zero(), |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s = v
        .iter()
        .fold(T::zero(), |acc, z| acc + (*z / scale).norm_sqr());
    scale * s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_exact_at_quarter_turns() {
        use std::f64::consts::PI;
        assert_eq!(sin_cos(PI), (-1.0, 0.0));
        assert_eq!(sin_cos(-PI / 2.0), (0.0, -1.0));
        assert_eq!(sin_cos(4.0 * PI), (1.0, 0.0));
        let (cz, sz) = csin_cos(c(0.3, -0.7));
        let k = c(0.3f64, -0.7);
        assert!((cz - k.cos()).norm() < 1e-15 && (sz - k.sin()).norm() < 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let a = 0.37 * k as f64;
            let w = wrap_angle(a);
            assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            let turns = (a - w) / (2.0 * std::f64::consts::PI);
            assert!((turns - turns.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn norm2_handles_extreme_ranges() {
        let v = [c(1e200, 0.0), c(0.0, 1e200)];
        let n = norm2(&v);
        assert!((n / 1e200 - 2f64.sqrt()).abs() < 1e-14);
        let w = [c(3.0f32, 0.0), c(0.0, 4.0)];
        assert!((norm2(&w) - 5.0).abs() < 1e-6);
    }
}
