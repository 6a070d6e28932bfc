//! Generalized Brillouin zone by the φ-sweep: for each phase φ the roots of
//! β²[E²(β) − E²(βe^{iφ})] are candidate GBZ points; a candidate β is kept
//! when, at its own energy E²(β), the characteristic polynomial
//! β^p[E²(β) − E²] has its p-th and (p+1)-th smallest roots on a common
//! circle through β.

use crate::error::{Error, Result};
use crate::linalg::{eigen, CMatrix};
use crate::model::{d_vector, laurent, Laurent, ModelSpec};
use crate::scalar::{cis, i_unit, Real, C};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Polynomial in β, ascending powers. `pole_order` is the number of
/// negative powers of the Laurent form it came from, after trimming.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPoly<T> {
    pub coefficients: Vec<C<T>>,
    pub pole_order: usize,
}

impl<T: Real> CharPoly<T> {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn eval(&self, beta: C<T>) -> C<T> {
        self.coefficients
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc * beta + c)
    }

    fn eval_with_derivative(&self, beta: C<T>) -> (C<T>, C<T>) {
        let mut p = C::zero();
        let mut dp = C::zero();
        for c in self.coefficients.iter().rev() {
            dp = dp * beta + p;
            p = p * beta + c;
        }
        (p, dp)
    }

    pub fn max_coeff(&self) -> T {
        self.coefficients.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Drops coefficients below `rel`·max at both ends. Low-end drops
    /// factor out β and lower the pole order.
    pub fn trimmed(mut self, rel: T) -> Self {
        let cut = rel * self.max_coeff();
        while self.coefficients.len() > 1 && self.coefficients.last().unwrap().norm() <= cut {
            self.coefficients.pop();
        }
        let lead = self
            .coefficients
            .iter()
            .position(|c| c.norm() > cut)
            .unwrap_or(0);
        self.coefficients.drain(..lead);
        self.pole_order = self.pole_order.saturating_sub(lead);
        self
    }
}

const TRIM: f64 = 1e-14;

fn scaled_trim<T: Real>(mut p: CharPoly<T>, scale: T) -> Result<CharPoly<T>> {
    let cut = T::lit(TRIM) * scale;
    if p.max_coeff() <= cut {
        return Err(Error::DegenerateModel);
    }
    while p.coefficients.last().unwrap().norm() <= cut {
        p.coefficients.pop();
    }
    let lead = p.coefficients.iter().position(|c| c.norm() > cut).unwrap();
    p.coefficients.drain(..lead);
    p.pole_order = p.pole_order.saturating_sub(lead);
    Ok(p)
}

fn coeff_scale<T: Real>(l: &Laurent<T>) -> T {
    let m = l.max_abs();
    (m * m).max(T::min_positive_value())
}

/// β²[E²(β) − E²(βe^{iφ})] divided by the scalar (1 − e^{iφ}); the
/// coefficient of β^{m+2} becomes c_m (1 − e^{imφ})/(1 − e^{iφ}).
pub fn phi_polynomial<T: Real>(
    spec: &ModelSpec<T>,
    transverse_k: Option<T>,
    phi: T,
) -> Result<CharPoly<T>> {
    let two_pi = T::PI() + T::PI();
    if !(phi > T::zero() && phi < two_pi) {
        return Err(Error::InvalidParameter(format!("phi = {phi} outside (0, 2π)")));
    }
    let l = laurent(spec, transverse_k)?;
    Ok(phi_polynomial_from(&l, phi)?)
}

fn phi_polynomial_from<T: Real>(l: &Laurent<T>, phi: T) -> Result<CharPoly<T>> {
    let cm = l.energy_sq_coeffs();
    let e = cis(phi);
    let em = e.conj();
    let one = C::<T>::one();
    // (1 − e^{imφ})/(1 − e^{iφ}) for m = −2..2
    let ratio = [-em * (one + em), -em, C::zero(), one, one + e];
    let coefficients = (0..5).map(|i| cm[i] * ratio[i]).collect();
    scaled_trim(
        CharPoly {
            coefficients,
            pole_order: 2,
        },
        coeff_scale(l),
    )
}

/// β²[E²(β) − e2], trimmed.
pub fn char_poly<T: Real>(spec: &ModelSpec<T>, transverse_k: Option<T>, e2: C<T>) -> Result<CharPoly<T>> {
    let l = laurent(spec, transverse_k)?;
    char_poly_from(&l, e2)
}

fn char_poly_from<T: Real>(l: &Laurent<T>, e2: C<T>) -> Result<CharPoly<T>> {
    let mut coefficients = l.energy_sq_coeffs().to_vec();
    coefficients[2] = coefficients[2] - e2;
    scaled_trim(
        CharPoly {
            coefficients,
            pole_order: 2,
        },
        coeff_scale(l),
    )
}

/// All roots via companion-matrix eigenvalues, each polished by one Newton
/// step that is kept only if it lowers |p|.
pub fn poly_roots<T: Real>(p: &CharPoly<T>) -> Vec<C<T>> {
    let n = p.degree();
    if n == 0 {
        return Vec::new();
    }
    let lead = p.coefficients[n];
    if n == 1 {
        return vec![-p.coefficients[0] / lead];
    }
    let comp = CMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -p.coefficients[n - 1 - j] / lead
        } else if j + 1 == i {
            C::one()
        } else {
            C::zero()
        }
    });
    let roots = match eigen::eigenvalues(&comp) {
        Ok(r) => r,
        Err(_) => return Vec::new(),
    };
    roots
        .into_iter()
        .map(|r| {
            let (f, df) = p.eval_with_derivative(r);
            if df.norm() == T::zero() {
                return r;
            }
            let cand = r - f / df;
            if cand.re.is_finite() && cand.im.is_finite() && p.eval(cand).norm() < f.norm() {
                cand
            } else {
                r
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbzPoint<T> {
    pub phi: T,
    pub beta: C<T>,
    /// βe^{iφ}: the other member of the equal-modulus pair.
    pub partner: C<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GbzContour<T> {
    /// Sorted by arg β.
    pub points: Vec<GbzPoint<T>>,
    pub closure_gap: T,
    /// Largest distance between consecutive points (cyclic).
    pub max_step: T,
}

impl<T: Real> GbzContour<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn radii(&self) -> Vec<T> {
        self.points.iter().map(|p| p.beta.norm()).collect()
    }

    pub fn mean_radius(&self) -> T {
        let r = self.radii();
        r.iter().fold(T::zero(), |a, b| a + *b) / T::from_usize_lossy(r.len())
    }

    pub fn geometric_mean_radius(&self) -> T {
        let r = self.radii();
        (r.iter().fold(T::zero(), |a, b| a + b.ln()) / T::from_usize_lossy(r.len())).exp()
    }

    pub fn radius_std(&self) -> T {
        let r = self.radii();
        let m = self.mean_radius();
        let v = r.iter().fold(T::zero(), |a, b| a + (*b - m) * (*b - m)) / T::from_usize_lossy(r.len());
        v.sqrt()
    }

    /// max ||β| − r| over the contour.
    pub fn max_deviation_from(&self, r: T) -> T {
        self.points
            .iter()
            .fold(T::zero(), |m, p| m.max((p.beta.norm() - r).abs()))
    }
}

pub const ADMISSIBILITY_TOL: f64 = 1e-6;

/// Outcome of the admissibility test for one candidate root.
struct Verdict<T> {
    admitted: bool,
    gap: T,
}

fn admissible<T: Real>(l: &Laurent<T>, beta: C<T>) -> Verdict<T> {
    let rejected = Verdict {
        admitted: false,
        gap: T::infinity(),
    };
    let e2 = l.energy_sq(beta);
    let Ok(cp) = char_poly_from(l, e2) else {
        return rejected;
    };
    let p = cp.pole_order;
    if p == 0 || p >= cp.degree() {
        return rejected;
    }
    let mut mags: Vec<T> = poly_roots(&cp).iter().map(|z| z.norm()).collect();
    if mags.len() != cp.degree() {
        return rejected;
    }
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (mags[p - 1], mags[p]);
    if !(lo > T::zero()) {
        return rejected;
    }
    let tol = T::lit(ADMISSIBILITY_TOL);
    let gap = (hi - lo) / lo;
    let on_circle = (beta.norm() - hi).abs() / hi < tol || (beta.norm() - lo).abs() / lo < tol;
    Verdict {
        admitted: gap < tol && on_circle,
        gap: if on_circle { gap } else { T::infinity() },
    }
}

pub fn gbz_contour<T: Real>(
    spec: &ModelSpec<T>,
    transverse_k: Option<T>,
    n_phi: usize,
) -> Result<GbzContour<T>> {
    if n_phi < 64 {
        return Err(Error::InvalidParameter(format!("n_phi = {n_phi} < 64")));
    }
    let l = laurent(spec, transverse_k)?;
    let two_pi = T::PI() + T::PI();
    let mut points = Vec::new();
    let mut min_gap = T::infinity();
    let mut any_poly = false;
    for i in 1..n_phi {
        let phi = two_pi * T::from_usize_lossy(i) / T::from_usize_lossy(n_phi);
        let poly = match phi_polynomial_from(&l, phi) {
            Ok(p) => p,
            Err(Error::DegenerateModel) => continue,
            Err(e) => return Err(e),
        };
        any_poly = true;
        let e = cis(phi);
        for beta in poly_roots(&poly) {
            if !(beta.norm() > T::zero()) || !beta.norm().is_finite() {
                continue;
            }
            let v = admissible(&l, beta);
            min_gap = min_gap.min(v.gap);
            if v.admitted {
                points.push(GbzPoint {
                    phi,
                    beta,
                    partner: beta * e,
                });
            }
        }
    }
    if !any_poly {
        return Err(Error::DegenerateModel);
    }
    if points.is_empty() {
        return Err(Error::EmptyContour {
            min_gap: min_gap.as_f64(),
        });
    }
    points.sort_by(|a, b| {
        let (x, y) = (a.beta.arg(), b.beta.arg());
        x.partial_cmp(&y).unwrap().then(a.phi.partial_cmp(&b.phi).unwrap())
    });
    let n = points.len();
    let closure_gap = (points[n - 1].beta - points[0].beta).norm();
    let max_step = (0..n).fold(T::zero(), |m, j| {
        m.max((points[(j + 1) % n].beta - points[j].beta).norm())
    });
    Ok(GbzContour {
        points,
        closure_gap,
        max_step,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GbzBand<T> {
    pub beta: C<T>,
    pub e_plus: C<T>,
    pub e_minus: C<T>,
}

/// Non-Bloch energies ±E(β) on the contour, via the model at k = −i ln β.
pub fn obc_bands_from_gbz<T: Real>(
    spec: &ModelSpec<T>,
    contour: &GbzContour<T>,
    transverse_k: Option<T>,
) -> Result<Vec<GbzBand<T>>> {
    if contour.is_empty() {
        return Err(Error::EmptyContour { min_gap: f64::NAN });
    }
    contour
        .points
        .iter()
        .map(|p| {
            let k = -i_unit::<T>() * p.beta.ln();
            let e = crate::model::pbc_energy(&d_vector(spec, k, transverse_k)?);
            Ok(GbzBand {
                beta: p.beta,
                e_plus: e,
                e_minus: -e,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindingGauge {
    /// ⟨u_L(β_j)|u_R(β_{j+1})⟩ with ⟨u_L|u_R⟩ = 1.
    Biorthogonal,
    /// ⟨u_R(β_j)|u_R(β_{j+1})⟩ with unit right vectors.
    RightOnly,
}

impl WindingGauge {
    pub fn name(self) -> &'static str {
        match self {
            WindingGauge::Biorthogonal => "biorthogonal",
            WindingGauge::RightOnly => "right_only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "biorthogonal" => Some(WindingGauge::Biorthogonal),
            "right_only" => Some(WindingGauge::RightOnly),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonBlochWinding<T> {
    pub nu_total: T,
    pub per_band: [T; 2],
    /// Σ_j ln⟨…⟩ per band: Im gives 2πν, Re the discarded imaginary Zak part.
    pub branch_data: [C<T>; 2],
    /// |Σ Re ln| / 2π over both bands.
    pub imaginary_part: T,
    /// The ± labels trade places once around the loop.
    pub bands_swap: bool,
    pub gauge: WindingGauge,
}

pub fn non_bloch_winding<T: Real>(
    spec: &ModelSpec<T>,
    contour: &GbzContour<T>,
    transverse_k: Option<T>,
) -> Result<NonBlochWinding<T>> {
    non_bloch_winding_with(spec, contour, transverse_k, WindingGauge::Biorthogonal)
}

pub const MIN_WINDING_POINTS: usize = 128;

pub fn non_bloch_winding_with<T: Real>(
    spec: &ModelSpec<T>,
    contour: &GbzContour<T>,
    transverse_k: Option<T>,
    gauge: WindingGauge,
) -> Result<NonBlochWinding<T>> {
    let n = contour.len();
    if n < MIN_WINDING_POINTS {
        return Err(Error::InvalidParameter(format!(
            "winding needs at least {MIN_WINDING_POINTS} contour points, got {n}"
        )));
    }
    let l = laurent(spec, transverse_k)?;
    let ds: Vec<_> = contour.points.iter().map(|p| l.eval(p.beta)).collect();
    // continue E along the loop
    let mut es: Vec<C<T>> = Vec::with_capacity(n);
    let mut min_e = T::infinity();
    for d in &ds {
        let mut e = d.square().sqrt();
        if let Some(&prev) = es.last() {
            if (e + prev).norm() < (e - prev).norm() {
                e = -e;
            }
        }
        min_e = min_e.min(e.norm());
        es.push(e);
    }
    if min_e < T::lit(1e-10) {
        return Err(Error::GapClosed {
            min_abs_energy: min_e.as_f64(),
        });
    }
    let swap = (es[n - 1] - es[0]).norm() > (es[n - 1] + es[0]).norm();

    let scale = ds.iter().fold(T::zero(), |m, d| m.max(d.max_abs())).max(T::min_positive_value());
    let vectors = |j: usize, sign: T| -> ([C<T>; 2], [C<T>; 2]) {
        let d = &ds[j];
        let e = es[j] * sign;
        let iy = i_unit::<T>() * d.dy;
        let r = [d.dz + e, d.dx + iy];
        if (r[0].norm_sqr() + r[1].norm_sqr()).sqrt() > T::lit(1e-12) * scale {
            (r, [d.dz + e, d.dx - iy])
        } else {
            ([d.dx - iy, e - d.dz], [d.dx + iy, e - d.dz])
        }
    };
    let bil = |a: &[C<T>; 2], b: &[C<T>; 2]| a[0] * b[0] + a[1] * b[1];
    let herm = |a: &[C<T>; 2], b: &[C<T>; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];

    let mut sums = [C::<T>::zero(); 2];
    for (band, sign0) in [T::one(), -T::one()].into_iter().enumerate() {
        let mut acc = C::zero();
        for j in 0..n {
            let (next, sign_next) = if j + 1 < n {
                (j + 1, sign0)
            } else if swap {
                (0, -sign0)
            } else {
                (0, sign0)
            };
            let (rj, lj) = vectors(j, sign0);
            let (rn, ln) = vectors(next, sign_next);
            let ov = match gauge {
                WindingGauge::Biorthogonal => bil(&lj, &rn) / bil(&ln, &rn),
                WindingGauge::RightOnly => {
                    let nj = (rj[0].norm_sqr() + rj[1].norm_sqr()).sqrt();
                    let nn = (rn[0].norm_sqr() + rn[1].norm_sqr()).sqrt();
                    herm(&rj, &rn) / (nj * nn)
                }
            };
            acc = acc + ov.ln();
        }
        sums[band] = acc;
    }
    let two_pi = T::PI() + T::PI();
    let per_band = [sums[0].im / two_pi, sums[1].im / two_pi];
    Ok(NonBlochWinding {
        nu_total: per_band[0] + per_band[1],
        per_band,
        branch_data: sums,
        imaginary_part: (sums[0].re + sums[1].re).abs() / two_pi,
        bands_swap: swap,
        gauge,
    })
}

/// ν_tot straight from the model: builds the contour, then winds.
pub fn winding_for<T: Real>(
    spec: &ModelSpec<T>,
    transverse_k: Option<T>,
    n_phi: usize,
    gauge: WindingGauge,
) -> Result<NonBlochWinding<T>> {
    let g = gbz_contour(spec, transverse_k, n_phi)?;
    non_bloch_winding_with(spec, &g, transverse_k, gauge)
}

/// Relative mismatch |E²(β) − E²(βe^{iφ})| / max(1, |E²(β)|) of a point.
pub fn pair_mismatch<T: Real>(l: &Laurent<T>, p: &GbzPoint<T>) -> T {
    let a = l.energy_sq(p.beta);
    let b = l.energy_sq(p.partner);
    (a - b).norm() / a.norm().max(T::one())
}

/// Energies helper used by plots: |E| of both bands on the contour.
pub fn abs_energies<T: Real>(bands: &[GbzBand<T>]) -> Vec<T> {
    bands
        .iter()
        .flat_map(|b| [b.e_plus.norm(), b.e_minus.norm()])
        .collect()
}
