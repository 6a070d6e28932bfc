//! Closed forms of the t3 = 0 chains (GBZ radius, edge ratios, gap
//! closings, OBC bands, bulk ansatz, analytic BP) and the EP / vorticity
//! tools.
//!
//! The x-open Chern slice at fixed ky is an SSH chain with intracell hopping
//! t₊ = t1 + δ cos ky, intercell t₋ = t1 − δ cos ky and onsite dz = −Δ sin ky;
//! `Ssh1d` is the same chain with (t₊, t₋, dz) = (t1, t2, −Δ), so every
//! closed form here accepts both variants.

use crate::error::{Error, Result};
use crate::model::{d_chern_x, laurent, pbc_energy, pbc_eigenvectors, ModelSpec, Variant};
use crate::scalar::{c, cis, re, sin_cos, wrap_angle, Real, C};

fn chain_params<T: Real>(spec: &ModelSpec<T>, ky: T) -> Result<(T, T, T)> {
    match spec.variant {
        Variant::Ssh1d | Variant::ChernXObc => {}
        v => {
            return Err(Error::VariantMismatch {
                expected: "ssh1d or chern_x_obc",
                found: v.name(),
            })
        }
    }
    if spec.t3 != T::zero() {
        return Err(Error::AnalyticRegime(spec.t3.as_f64()));
    }
    let (tp, tm) = spec.effective_hoppings(ky);
    let dz = match spec.variant {
        Variant::Ssh1d => -spec.delta_onsite,
        _ => -spec.delta_onsite * sin_cos(ky).1,
    };
    Ok((tp, tm, dz))
}

/// Γ = √(|2t₊ − γ| / |2t₊ + γ|); `ky` is ignored for `Ssh1d`.
pub fn gbz_radius<T: Real>(spec: &ModelSpec<T>, ky: T) -> Result<T> {
    let (tp, _, _) = chain_params(spec, ky)?;
    let two = T::lit(2.0);
    let den = (two * tp + spec.gamma).abs();
    if den < T::lit(1e-12) {
        return Err(Error::SingularRadius);
    }
    Ok(((two * tp - spec.gamma).abs() / den).sqrt())
}

pub fn gbz_radius_ssh<T: Real>(spec: &ModelSpec<T>) -> Result<T> {
    if spec.variant != Variant::Ssh1d {
        return Err(Error::VariantMismatch {
            expected: "ssh1d",
            found: spec.variant.name(),
        });
    }
    gbz_radius(spec, T::zero())
}

pub fn gbz_radius_chern<T: Real>(spec: &ModelSpec<T>, ky: T) -> Result<T> {
    if spec.variant != Variant::ChernXObc {
        return Err(Error::VariantMismatch {
            expected: "chern_x_obc",
            found: spec.variant.name(),
        });
    }
    gbz_radius(spec, ky)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Localization {
    /// |r_L* r_R| < 1: pinned to cell 1.
    Left,
    /// |r_L* r_R| > 1: pinned to cell N.
    Right,
    Delocalized,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeRatios<T> {
    pub r_r: T,
    pub r_l: T,
    pub product_abs: T,
}

impl<T: Real> EdgeRatios<T> {
    /// r_L*·r_R, real for real couplings (may be negative).
    pub fn product(&self) -> T {
        self.r_l * self.r_r
    }

    pub fn localization(&self) -> Localization {
        if self.product_abs < T::one() {
            Localization::Left
        } else if self.product_abs > T::one() {
            Localization::Right
        } else {
            Localization::Delocalized
        }
    }
}

/// Amplitude ratios of the A-sublattice mode at E = dz of the broken-cell
/// chain: r_R = −(t₊ − γ/2)/t₋, r_L = −(t₊ + γ/2)/t₋.
pub fn edge_ratios<T: Real>(spec: &ModelSpec<T>, ky: T) -> Result<EdgeRatios<T>> {
    let (tp, tm, _) = chain_params(spec, ky)?;
    if tm.abs() < T::lit(1e-12) {
        return Err(Error::RatioSingularity);
    }
    let half = spec.gamma * T::lit(0.5);
    let r_r = -(tp - half) / tm;
    let r_l = -(tp + half) / tm;
    Ok(EdgeRatios {
        r_r,
        r_l,
        product_abs: (r_r * r_l).abs(),
    })
}

/// Real ky in [0, 2π) with |r_L* r_R| = 1, from
/// cos ky = γ²/(16δt1) and cos ky = ±√(γ²/8 − t1²)/δ.
pub fn obc_gap_closings<T: Real>(spec: &ModelSpec<T>) -> Result<Vec<T>> {
    if spec.variant != Variant::ChernXObc {
        return Err(Error::VariantMismatch {
            expected: "chern_x_obc",
            found: spec.variant.name(),
        });
    }
    if spec.t3 != T::zero() {
        return Err(Error::AnalyticRegime(spec.t3.as_f64()));
    }
    let (t1, d, g) = (spec.t1, spec.delta_stagger, spec.gamma);
    if d == T::zero() || t1 == T::zero() {
        return Err(Error::InvalidParameter("gap closings need t1 ≠ 0 and δ ≠ 0".into()));
    }
    let mut cosines = vec![g * g / (T::lit(16.0) * d * t1)];
    let rad = g * g / T::lit(8.0) - t1 * t1;
    if rad >= T::zero() {
        let s = rad.sqrt() / d;
        cosines.push(s);
        cosines.push(-s);
    }
    let two_pi = T::PI() + T::PI();
    let mut out: Vec<T> = Vec::new();
    for cs in cosines {
        if cs.abs() > T::one() {
            continue;
        }
        let a = cs.acos();
        for ky in [a, two_pi - a] {
            let ky = if ky >= two_pi { ky - two_pi } else { ky };
            if !out.iter().any(|k| (*k - ky).abs() < T::lit(1e-12)) {
                out.push(ky);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Closed-form count used as the arbiter: sign changes of
/// |r_L* r_R|(ky) − 1 on a uniform ky grid. Poles of the ratio (t₋ = 0)
/// do not change sign and are skipped.
pub fn gap_closing_scan<T: Real>(spec: &ModelSpec<T>, n_grid: usize) -> Result<usize> {
    let two_pi = T::PI() + T::PI();
    let mut prev: Option<T> = None;
    let mut first: Option<T> = None;
    let mut count = 0;
    for i in 0..n_grid {
        let ky = two_pi * (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(n_grid);
        let f = match edge_ratios(spec, ky) {
            Ok(r) => r.product_abs - T::one(),
            Err(Error::RatioSingularity) => continue,
            Err(e) => return Err(e),
        };
        if let Some(p) = prev {
            if (p < T::zero()) != (f < T::zero()) {
                count += 1;
            }
        }
        first.get_or_insert(f);
        prev = Some(f);
    }
    if let (Some(p), Some(f)) = (prev, first) {
        if (p < T::zero()) != (f < T::zero()) {
            count += 1;
        }
    }
    Ok(count)
}

/// E_OBC(θ) on the circle β = Γe^{iθ}: principal root of
/// t₊² + t₋² − γ²/4 + dz² + t₋[Γe^{iθ}(t₊ + γ/2) + e^{−iθ}(t₊ − γ/2)/Γ].
pub fn analytic_obc_energy<T: Real>(spec: &ModelSpec<T>, ky: T, theta: T) -> Result<C<T>> {
    let (tp, tm, dz) = chain_params(spec, ky)?;
    let gm = gbz_radius(spec, ky)?;
    if gm == T::zero() {
        return Err(Error::SingularRadius);
    }
    let half = spec.gamma * T::lit(0.5);
    let base = tp * tp + tm * tm - half * half + dz * dz;
    let e = cis(theta);
    let rad = re(base) + (e * (gm * (tp + half)) + e.conj() * ((tp - half) / gm)) * tm;
    Ok(rad.sqrt())
}

/// Generalized Bloch data (θ, E_OBC, η, Γ) with H_OBC = t₋[H₀(θ) + η·σ].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticObcBand<T> {
    pub theta: T,
    pub energy: C<T>,
    pub eta: [C<T>; 3],
    pub gamma_radius: T,
}

pub fn analytic_obc_band<T: Real>(spec: &ModelSpec<T>, ky: T, theta: T) -> Result<AnalyticObcBand<T>> {
    let (tp, tm, dz) = chain_params(spec, ky)?;
    if tm == T::zero() {
        return Err(Error::RatioSingularity);
    }
    let energy = analytic_obc_energy(spec, ky, theta)?;
    Ok(AnalyticObcBand {
        theta,
        energy,
        eta: [re(tp / tm), c(T::zero(), spec.gamma * T::lit(0.5) / tm), re(dz / tm)],
        gamma_radius: gbz_radius(spec, ky)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BulkState<T> {
    pub energy: C<T>,
    /// A1, B1, …, B_{N−1}, A_N (broken-cell geometry).
    pub vector: Vec<C<T>>,
}

/// Standing-wave bulk eigenstates ±E of the broken-cell chain at θ = πj/N.
/// The two plane waves β = √ρ e^{iθ} and β' = ρ/β, ρ = (t₊ − γ/2)/(t₊ + γ/2),
/// share E²; the vanishing B amplitude in cells 0 and N fixes
/// C₂/C₁ = −ψ̃_B(β)/ψ̃_B(β') and quantizes θ.
pub fn bulk_state_ansatz<T: Real>(
    spec: &ModelSpec<T>,
    ky: T,
    theta: T,
    n_cells: usize,
) -> Result<[BulkState<T>; 2]> {
    let (tp, tm, dz) = chain_params(spec, ky)?;
    if n_cells < 2 {
        return Err(Error::TooFewCells(n_cells));
    }
    let nf = T::from_usize_lossy(n_cells);
    let j = (theta * nf / T::PI()).round();
    let on_grid = (theta - j * T::PI() / nf).abs() < T::lit(1e-9);
    if !on_grid || j < T::one() || j > nf - T::one() {
        return Err(Error::QuantizationGrid {
            theta: theta.as_f64(),
            n_cells,
        });
    }
    let half = spec.gamma * T::lit(0.5);
    if (tp + half).abs() < T::lit(1e-12) {
        return Err(Error::SingularRadius);
    }
    let rho = re((tp - half) / (tp + half));
    let beta = rho.sqrt() * cis(theta);
    if beta.norm() == T::zero() {
        return Err(Error::SingularRadius);
    }
    let beta2 = rho / beta;
    let l = laurent(spec, spec.variant.is_2d().then_some(ky))?;
    let e = l.energy_sq(beta).sqrt();
    let out = [e, -e].map(|en| {
        let psi = |b: C<T>| [re(dz) + en, re(tp - half) + b * tm];
        let (p1, p2) = (psi(beta), psi(beta2));
        let c2 = -p1[1] / p2[1];
        let mut v = Vec::with_capacity(2 * n_cells - 1);
        for n in 1..=n_cells {
            let (b1, b2) = (beta.powi(n as i32), beta2.powi(n as i32));
            v.push(b1 * p1[0] + c2 * b2 * p2[0]);
            if n < n_cells {
                v.push(b1 * p1[1] + c2 * b2 * p2[1]);
            }
        }
        BulkState { energy: en, vector: v }
    });
    if out.iter().any(|s| s.vector.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(Error::InvalidParameter("bulk ansatz degenerate at this θ".into()));
    }
    Ok(out)
}

/// P = 1 − (1/N) Σ n xⁿ / Σ xⁿ over n = 1..N with x = r_L* r_R, by closed
/// forms (mirrored for |x| > 1) and direct summation close to |x| = 1.
pub fn analytic_bp<T: Real>(spec: &ModelSpec<T>, ky: T, n_cells: usize) -> Result<T> {
    if n_cells < 1 {
        return Err(Error::TooFewCells(n_cells));
    }
    let r = edge_ratios(spec, ky)?;
    Ok(bp_from_product(r.product(), n_cells))
}

/// The series part of [`analytic_bp`] for a given product x.
pub fn bp_from_product<T: Real>(x: T, n_cells: usize) -> T {
    let nf = T::from_usize_lossy(n_cells);
    let mean = mean_cell(x, n_cells);
    T::one() - mean / nf
}

/// Σ n xⁿ / Σ xⁿ.
fn mean_cell<T: Real>(x: T, n: usize) -> T {
    let nf = T::from_usize_lossy(n);
    let one = T::one();
    if x.abs() == one && x > T::zero() {
        return (nf + one) * T::lit(0.5);
    }
    if (x.abs() - one).abs() < T::lit(1e-3) || x == T::zero() {
        if x == T::zero() {
            return one;
        }
        // direct, normalized by the largest term to avoid overflow
        let big = if x.abs() > one { x.abs().powi(n as i32) } else { one };
        let (mut s0, mut s1) = (T::zero(), T::zero());
        let mut p = T::one();
        for k in 1..=n {
            p = p * x;
            let t = p / big;
            s0 = s0 + t;
            s1 = s1 + t * T::from_usize_lossy(k);
        }
        return s1 / s0;
    }
    if x.abs() < one {
        let xn = x.powi(n as i32);
        // (1 − (N+1)xᴺ + N xᴺ⁺¹) / ((1 − x)(1 − xᴺ))
        (one - (nf + one) * xn + nf * xn * x) / ((one - x) * (one - xn))
    } else {
        nf + one - mean_cell(one / x, n)
    }
}

pub const EP_ENERGY_TOL: f64 = 1e-8;

/// Points (kx, ky) with E_PBC = 0 on the kx = 0 and kx = π branches.
pub fn pbc_ep_locations<T: Real>(spec: &ModelSpec<T>) -> Result<Vec<(T, T)>> {
    if spec.variant != Variant::ChernXObc {
        return Err(Error::VariantMismatch {
            expected: "chern_x_obc",
            found: spec.variant.name(),
        });
    }
    if spec.t3 != T::zero() {
        return Err(Error::AnalyticRegime(spec.t3.as_f64()));
    }
    let (t1, d, dd, g) = (spec.t1, spec.delta_stagger, spec.delta_onsite, spec.gamma);
    let four = T::lit(4.0);
    let q = g * g / four;
    if dd == T::zero() {
        return Err(Error::SingularCondition("Δ = 0 on the kx = 0 branch"));
    }
    let den2 = dd * dd - four * d * d;
    if den2 == T::zero() {
        return Err(Error::SingularCondition("Δ² = 4δ² on the kx = π branch"));
    }
    let branches = [
        (T::zero(), (q - four * t1 * t1) / (dd * dd)),
        (T::PI(), (q - four * d * d) / den2),
    ];
    let two_pi = T::PI() + T::PI();
    let mut out = Vec::new();
    for (kx, rad) in branches {
        if !(rad >= T::zero() && rad <= T::one()) {
            continue;
        }
        let a = rad.sqrt().asin();
        let mut kys: Vec<T> = Vec::new();
        for ky in [a, T::PI() - a, T::PI() + a, two_pi - a] {
            let ky = if ky >= two_pi { ky - two_pi } else { ky };
            if !kys.iter().any(|k| (*k - ky).abs() < T::lit(1e-12)) {
                kys.push(ky);
            }
        }
        for ky in kys {
            let ky = polish_root(ky, |k| Ok(pbc_energy(&d_chern_x(spec, re(kx), k)?).norm()))?;
            let d = d_chern_x(spec, re(kx), ky)?;
            // E² is only resolved to ~eps·scale, so |E| cannot go below
            // √(eps·scale) even at the best representable ky
            let scale = d.dx.norm_sqr() + d.dy.norm_sqr() + d.dz.norm_sqr();
            let tol = T::lit(EP_ENERGY_TOL).max(T::lit(4.0) * (T::epsilon() * scale).sqrt());
            if pbc_energy(&d).norm() < tol {
                out.push((kx, ky));
            }
        }
    }
    Ok(out)
}

/// |E| ∝ √(ky − ky_EP), so half an ulp of ky already costs ~1e-8 in |E|.
/// Pick the representable ky near the analytic root with the smallest |E|.
fn polish_root<T: Real>(ky: T, f: impl Fn(T) -> Result<T>) -> Result<T> {
    let mut best = (f(ky)?, ky);
    let mut lo = ky;
    let mut hi = ky;
    let step = T::epsilon() * ky.abs().max(T::one());
    for _ in 0..512 {
        lo = lo - step;
        hi = hi + step;
        for k in [lo, hi] {
            let v = f(k)?;
            if v < best.0 {
                best = (v, k);
            }
        }
    }
    Ok(best.1)
}

/// ‖ψ₊ − ψ₋‖ / ‖ψ₊‖ for the raw two-band eigenvectors at (kx, ky).
pub fn coalescence<T: Real>(spec: &ModelSpec<T>, kx: T, ky: T) -> Result<T> {
    let (p, m) = pbc_eigenvectors(&d_chern_x(spec, re(kx), ky)?);
    let dn = ((p[0] - m[0]).norm_sqr() + (p[1] - m[1]).norm_sqr()).sqrt();
    let pn = (p[0].norm_sqr() + p[1].norm_sqr()).sqrt();
    Ok(dn / pn)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VorticityResult<T> {
    pub nu_12: T,
    /// Arg(E₁ − E₂) unwrapped along the loop, closing step included.
    pub unwrapped_phase: Vec<T>,
}

pub const MIN_LOOP_SAMPLES: usize = 64;

const FIXED_SCALE: f64 = (1u64 << 60) as f64;

/// Winding of Arg(E₁ − E₂)/2π over the closed loop sampled by both lists.
/// If E₁ − E₂ returns as −(E₁ − E₂) (the bands trade places, as around a
/// single EP) the closing step goes to the negated first sample.
/// Increments are summed in 2⁻⁶⁰ fixed point, so reversing the loop
/// negates the result exactly.
pub fn vorticity<T: Real>(energies_1: &[C<T>], energies_2: &[C<T>]) -> Result<VorticityResult<T>> {
    let n = energies_1.len();
    if energies_2.len() != n {
        return Err(Error::InvalidParameter("energy lists differ in length".into()));
    }
    if n < MIN_LOOP_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_LOOP_SAMPLES,
            got: n,
        });
    }
    let diffs: Vec<C<T>> = energies_1.iter().zip(energies_2).map(|(a, b)| a - b).collect();
    if let Some(index) = diffs.iter().position(|z| !(z.norm() >= T::lit(1e-12))) {
        return Err(Error::EpOnLoop { index });
    }
    let args: Vec<T> = diffs.iter().map(|z| z.arg()).collect();
    let cap = T::FRAC_PI_2();
    let mut acc: i128 = 0;
    let mut phase = Vec::with_capacity(n + 1);
    phase.push(args[0]);
    let mut running = args[0];
    for j in 0..n {
        let inc = if j + 1 < n {
            wrap_angle(args[j + 1] - args[j])
        } else {
            let closing = wrap_angle(args[0] - args[n - 1]);
            let swapped = (diffs[0] + diffs[n - 1]).norm() < (diffs[0] - diffs[n - 1]).norm();
            if swapped {
                if closing > T::zero() {
                    closing - T::PI()
                } else {
                    closing + T::PI()
                }
            } else {
                closing
            }
        };
        if inc.abs() > cap {
            return Err(Error::Undersampled { index: j });
        }
        acc += (inc.as_f64() * FIXED_SCALE).round() as i128;
        running = running + inc;
        phase.push(running);
    }
    let turns = acc as f64 / FIXED_SCALE / (2.0 * std::f64::consts::PI);
    Ok(VorticityResult {
        nu_12: T::lit(turns),
        unwrapped_phase: phase,
    })
}

/// Vorticity of a two-band d·σ model along a parametrized loop t ∈ [0, 2π),
/// given E²(t). E is continued by nearest sign, E₁ − E₂ = 2E, and the
/// sampling is doubled from `n_start` up to 2¹⁶ until no step exceeds π/2.
pub fn vorticity_two_band<T: Real>(
    energy_sq: impl Fn(T) -> C<T>,
    n_start: usize,
) -> Result<VorticityResult<T>> {
    let mut n = n_start.max(MIN_LOOP_SAMPLES);
    let two_pi = T::PI() + T::PI();
    loop {
        let mut es: Vec<C<T>> = Vec::with_capacity(n);
        for i in 0..n {
            let t = two_pi * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            let mut e = energy_sq(t).sqrt();
            if let Some(&p) = es.last() {
                if (e + p).norm() < (e - p).norm() {
                    e = -e;
                }
            }
            es.push(e);
        }
        let neg: Vec<C<T>> = es.iter().map(|e| -*e).collect();
        match vorticity(&es, &neg) {
            Err(Error::Undersampled { .. }) if n < (1 << 16) => n *= 2,
            r => return r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realspace::{build_obc, Termination};
    use std::f64::consts::PI;

    fn fig3a() -> ModelSpec<f64> {
        ModelSpec::chern(Variant::ChernXObc, 1.0, 0.0, 3.0, 1.0, 1.0)
    }

    #[test]
    fn radius_oracles() {
        let s = ModelSpec::ssh(1.0, 1.0, 0.0, 3.0, 0.0);
        assert!((gbz_radius_ssh(&s).unwrap() - 0.2f64.sqrt()).abs() < 1e-15);
        let h = ModelSpec::ssh(1.0, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(gbz_radius_ssh(&h).unwrap(), 1.0);
        assert!((gbz_radius_chern(&fig3a(), PI).unwrap() - 1.0).abs() < 1e-12);
        let t3 = ModelSpec::ssh(1.0, 1.0, 0.2, 3.0, 0.0);
        assert!(matches!(gbz_radius_ssh(&t3), Err(Error::AnalyticRegime(_))));
        let sing = ModelSpec::ssh(-1.5, 1.0, 0.0, 3.0, 0.0);
        assert!(matches!(gbz_radius_ssh(&sing), Err(Error::SingularRadius)));
    }

    #[test]
    fn edge_ratio_oracles() {
        let r = edge_ratios(&fig3a(), PI / 2.0).unwrap();
        assert!((r.r_r - 0.5).abs() < 1e-15 && (r.r_l + 2.5).abs() < 1e-15);
        assert!((r.product_abs - 1.25).abs() < 1e-15);
        assert_eq!(r.localization(), Localization::Right);
        let h = ModelSpec { gamma: 0.0, ..fig3a() };
        let r = edge_ratios(&h, 0.4).unwrap();
        assert_eq!(r.r_r, r.r_l);
        let ky = (9.0f64 / 16.0).acos();
        assert!((edge_ratios(&fig3a(), ky).unwrap().product_abs - 1.0).abs() < 1e-12);
        assert!(matches!(edge_ratios(&fig3a(), 0.0), Err(Error::RatioSingularity)));
    }

    #[test]
    fn fig3a_gap_closings() {
        let g = obc_gap_closings(&fig3a()).unwrap();
        assert_eq!(g.len(), 6);
        let c = (1.0f64 / 8.0).sqrt();
        for cs in [9.0 / 16.0, c, -c] {
            assert_eq!(g.iter().filter(|k| (k.cos() - cs).abs() < 1e-12).count(), 2);
        }
        assert_eq!(gap_closing_scan(&fig3a(), 10_000).unwrap(), 6);
    }

    #[test]
    fn gap_closings_hermitian_and_empty() {
        let h = ModelSpec { gamma: 0.0, ..fig3a() };
        let g = obc_gap_closings(&h).unwrap();
        assert_eq!(g.len(), gap_closing_scan(&h, 10_000).unwrap());
        let big = ModelSpec { gamma: 20.0, ..fig3a() };
        assert!(obc_gap_closings(&big).unwrap().is_empty());
        assert_eq!(gap_closing_scan(&big, 10_000).unwrap(), 0);
    }

    #[test]
    fn obc_energy_matches_complex_momentum() {
        let s = fig3a();
        for (ky, th) in [(0.4, 0.3), (1.1, 2.0), (2.5, 4.0), (4.0, 5.5)] {
            let gm = gbz_radius(&s, ky).unwrap();
            let k = c(th, -gm.ln());
            let e = pbc_energy(&d_chern_x(&s, k, ky).unwrap());
            let a = analytic_obc_energy(&s, ky, th).unwrap();
            assert!((a * a - e * e).norm() < 1e-10, "{a} vs {e}");
        }
    }

    #[test]
    fn bulk_band_touches_edge_energy_at_closings() {
        // the closing is E_OBC reaching the edge energy dz at θ ∈ {0, π}
        let s = fig3a();
        for ky in obc_gap_closings(&s).unwrap() {
            let dz = -ky.sin();
            let m = [0.0, PI]
                .iter()
                .map(|th| (analytic_obc_energy(&s, ky, *th).unwrap().powi(2) - dz * dz).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(m < 1e-6, "ky={ky}: {m}");
        }
        let h = ModelSpec { delta_onsite: 0.0, ..s };
        for ky in obc_gap_closings(&h).unwrap() {
            let m = [0.0, PI]
                .iter()
                .map(|th| analytic_obc_energy(&h, ky, *th).unwrap().norm())
                .fold(f64::INFINITY, f64::min);
            assert!(m < 1e-6, "Δ=0, ky={ky}: {m}");
        }
    }

    #[test]
    fn hermitian_obc_energy_real() {
        let h = ModelSpec { gamma: 0.0, ..fig3a() };
        for i in 0..50 {
            let e = analytic_obc_energy(&h, 0.7, 0.13 * i as f64).unwrap();
            assert!(e.im.abs() < 1e-12);
        }
    }

    #[test]
    fn bulk_ansatz_is_an_eigenvector() {
        let s = fig3a();
        let n = 40;
        let ky = 0.7;
        let h = build_obc(&s, n, Some(ky), Termination::BrokenCellAatBothEnds).unwrap();
        let theta = PI * 7.0 / n as f64;
        for st in bulk_state_ansatz(&s, ky, theta, n).unwrap() {
            let hv = h.matrix.matvec(&st.vector);
            let r: Vec<_> = hv.iter().zip(&st.vector).map(|(a, b)| a - st.energy * b).collect();
            let rel = crate::scalar::norm2(&r) / (h.matrix.norm_fro() * crate::scalar::norm2(&st.vector));
            assert!(rel < 1e-8, "{rel}");
        }
        assert!(matches!(
            bulk_state_ansatz(&s, ky, 0.1, n),
            Err(Error::QuantizationGrid { .. })
        ));
    }

    #[test]
    fn bulk_ansatz_hermitian_standing_wave() {
        let h = ModelSpec { gamma: 0.0, delta_onsite: 0.0, ..fig3a() };
        let n = 20;
        // t₊ = t₋ at ky = π/2, where the chain is mirror symmetric
        let st = &bulk_state_ansatz(&h, PI / 2.0, PI * 3.0 / n as f64, n).unwrap()[0];
        let a: Vec<f64> = st.vector.iter().step_by(2).map(|z| z.norm()).collect();
        for k in 0..n {
            assert!((a[k] - a[n - 1 - k]).abs() < 1e-10 * a.iter().cloned().fold(0.0, f64::max));
        }
    }

    #[test]
    fn analytic_bp_limits() {
        let n = 3000;
        let p = bp_from_product(0.25f64, n);
        assert!((p - (1.0 - 4.0 / 3.0 / n as f64)).abs() < 1e-12);
        assert!((p - p.round()).abs() < 1e-3 && p.round() == 1.0);
        let p = bp_from_product(4.0f64, n);
        assert!(p.abs() < 1e-3);
        let mid = bp_from_product(0.999, n);
        assert!(mid > 0.05 && mid < 0.95);
        let flat = bp_from_product(1.0, n);
        assert!((flat - (1.0 - (n as f64 + 1.0) / (2.0 * n as f64))).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_direct_sum() {
        for x in [0.3, -0.6, 0.9985, 1.0007, -1.2, 2.5, 0.0] {
            let n = 57;
            let (mut s0, mut s1) = (0.0, 0.0);
            for k in 1..=n {
                let t = f64::powi(x, k as i32);
                s0 += t;
                s1 += k as f64 * t;
            }
            let direct = if x == 0.0 { 1.0 - 1.0 / n as f64 } else { 1.0 - s1 / s0 / n as f64 };
            assert!((bp_from_product(x, n) - direct).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn fig3a_eps() {
        let pts = pbc_ep_locations(&fig3a()).unwrap();
        assert_eq!(pts.len(), 4);
        for (kx, ky) in pts {
            assert_eq!(kx, PI);
            assert!((ky.sin().powi(2) - 7.0 / 12.0).abs() < 1e-12);
            assert!(coalescence(&fig3a(), kx, ky).unwrap() < 1e-6);
        }
        let h = ModelSpec { gamma: 0.0, ..fig3a() };
        assert!(pbc_ep_locations(&h).unwrap().is_empty());
        let bad = ModelSpec { delta_onsite: 0.0, ..fig3a() };
        assert!(matches!(pbc_ep_locations(&bad), Err(Error::SingularCondition(_))));
    }

    #[test]
    fn ep_points_meet_absolute_energy_tolerance() {
        for (kx, ky) in pbc_ep_locations(&fig3a()).unwrap() {
            let e = pbc_energy(&d_chern_x(&fig3a(), re(kx), ky).unwrap()).norm();
            assert!(e < EP_ENERGY_TOL, "|E| = {e:e} at ky = {ky}");
        }
    }

    #[test]
    fn ep_points_within_resolution_floor() {
        for (kx, ky) in pbc_ep_locations(&fig3a()).unwrap() {
            let e = pbc_energy(&d_chern_x(&fig3a(), re(kx), ky).unwrap()).norm();
            assert!(e < 4.0 * (f64::EPSILON * 5.0).sqrt(), "|E| = {e:e}");
        }
    }

    #[test]
    fn vorticity_oracles() {
        let n = 256;
        let ks: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let e1: Vec<C<f64>> = ks.iter().map(|k| re(2.0 + k.cos())).collect();
        let e2: Vec<C<f64>> = ks.iter().map(|k| re(-1.0 + 0.5 * k.sin())).collect();
        assert_eq!(vorticity(&e1, &e2).unwrap().nu_12, 0.0);
        // E1 − E2 = 2√(z − z0) on a circle around z0, continued along the loop
        let sq: Vec<C<f64>> = ks.iter().map(|k| (cis(*k) * 0.5).sqrt() * cis(*k / 2.0) / cis(*k).sqrt()).collect();
        let half: Vec<C<f64>> = ks.iter().map(|k| cis(*k / 2.0) * 0.5f64.sqrt()).collect();
        let _ = sq;
        let neg: Vec<C<f64>> = half.iter().map(|z| -z).collect();
        let v = vorticity(&half, &neg).unwrap();
        assert!((v.nu_12.abs() - 0.5).abs() < 1e-3);
        let rev_a: Vec<_> = half.iter().rev().cloned().collect();
        let rev_b: Vec<_> = neg.iter().rev().cloned().collect();
        assert_eq!(vorticity(&rev_a, &rev_b).unwrap().nu_12, -v.nu_12);
    }

    #[test]
    fn vorticity_errors() {
        let z = vec![re(1.0); 64];
        assert!(matches!(vorticity(&z, &z), Err(Error::EpOnLoop { index: 0 })));
        let short = vec![re(1.0); 10];
        assert!(matches!(
            vorticity(&short, &vec![re(0.0); 10]),
            Err(Error::TooFewSamples { .. })
        ));
        let jumpy: Vec<C<f64>> = (0..64).map(|i| cis(3.0 * i as f64)).collect();
        assert!(matches!(
            vorticity(&jumpy, &vec![re(0.0); 64]),
            Err(Error::Undersampled { .. })
        ));
    }

    #[test]
    fn two_band_loops() {
        // E² = z − z0 around one EP, then around two EPs
        let one = |t: f64| cis(t) * 0.3;
        let v = vorticity_two_band(one, 64).unwrap();
        assert!((v.nu_12.abs() - 0.5).abs() < 1e-3);
        let two = |t: f64| {
            let z = cis(t) * 1.0;
            (z - 0.4) * (z + 0.4)
        };
        let v = vorticity_two_band(two, 64).unwrap();
        assert!(v.nu_12.abs() < 1e-3 || (v.nu_12.abs() - 1.0).abs() < 1e-3);
    }
}
