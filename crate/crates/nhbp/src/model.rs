//! d-vector fields of the four model variants, their Bloch matrices and the
//! Laurent form in β = e^{ik} along the open direction.

use crate::error::{Error, Result};
use crate::scalar::{c, csin_cos, i_unit, re, sin_cos, Real, C};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Non-Hermitian SSH / Rice-Mele chain.
    Ssh1d,
    /// Stacked Rice-Mele model, open along x, ky is a parameter.
    ChernXObc,
    /// Same model regrouped, open along y, kx is a parameter.
    ChernYObcA,
    /// Modified model with dy = iγ/2 − δ cos ky, open along y.
    ChernYObcB,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Ssh1d,
        Variant::ChernXObc,
        Variant::ChernYObcA,
        Variant::ChernYObcB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ssh1d => "ssh1d",
            Variant::ChernXObc => "chern_x_obc",
            Variant::ChernYObcA => "chern_y_obc_a",
            Variant::ChernYObcB => "chern_y_obc_b",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name() == s)
    }

    pub fn is_2d(self) -> bool {
        !matches!(self, Variant::Ssh1d)
    }

    /// Name of the transverse momentum that parametrizes the 1d slice.
    pub fn transverse_name(self) -> Option<&'static str> {
        match self {
            Variant::Ssh1d => None,
            Variant::ChernXObc => Some("ky"),
            Variant::ChernYObcA | Variant::ChernYObcB => Some("kx"),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Model variant plus couplings. `t2` is only read by `Ssh1d`,
/// `delta_stagger` only by the 2d variants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec<T> {
    pub variant: Variant,
    #[serde(default)]
    pub t1: T,
    #[serde(default)]
    pub t2: T,
    #[serde(default)]
    pub t3: T,
    #[serde(default)]
    pub gamma: T,
    #[serde(default)]
    pub delta_onsite: T,
    #[serde(default)]
    pub delta_stagger: T,
}

impl<T: Real> ModelSpec<T> {
    pub fn ssh(t1: T, t2: T, t3: T, gamma: T, delta_onsite: T) -> Self {
        ModelSpec {
            variant: Variant::Ssh1d,
            t1,
            t2,
            t3,
            gamma,
            delta_onsite,
            delta_stagger: T::zero(),
        }
    }

    pub fn chern(variant: Variant, t1: T, t3: T, gamma: T, delta_onsite: T, delta_stagger: T) -> Self {
        ModelSpec {
            variant,
            t1,
            t2: T::zero(),
            t3,
            gamma,
            delta_onsite,
            delta_stagger,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("t1", self.t1),
            ("t2", self.t2),
            ("t3", self.t3),
            ("gamma", self.gamma),
            ("delta_onsite", self.delta_onsite),
            ("delta_stagger", self.delta_stagger),
        ];
        let bad: Vec<&str> = fields
            .iter()
            .filter(|(_, v)| !v.is_finite())
            .map(|(n, _)| *n)
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("non-finite {}", bad.join(", "))))
        }
    }

    /// Checks that a transverse momentum is supplied exactly when needed.
    pub fn check_transverse(&self, transverse_k: Option<T>) -> Result<T> {
        match (self.variant.is_2d(), transverse_k) {
            (true, Some(k)) if k.is_finite() => Ok(k),
            (true, Some(_)) => Err(Error::InvalidParameter("non-finite transverse momentum".into())),
            (true, None) => Err(Error::MissingTransverseMomentum(self.variant.name())),
            (false, None) => Ok(T::zero()),
            (false, Some(_)) => Err(Error::UnexpectedTransverseMomentum(self.variant.name())),
        }
    }

    pub fn cast<U: Real>(&self) -> ModelSpec<U> {
        let f = |x: T| U::lit(x.as_f64());
        ModelSpec {
            variant: self.variant,
            t1: f(self.t1),
            t2: f(self.t2),
            t3: f(self.t3),
            gamma: f(self.gamma),
            delta_onsite: f(self.delta_onsite),
            delta_stagger: f(self.delta_stagger),
        }
    }

    /// Effective (intracell, intercell) hoppings t₊, t₋ of the x-open chain.
    /// For `Ssh1d` these are simply (t1, t2).
    pub fn effective_hoppings(&self, ky: T) -> (T, T) {
        match self.variant {
            Variant::Ssh1d => (self.t1, self.t2),
            _ => {
                let dc = self.delta_stagger * sin_cos(ky).0;
                (self.t1 + dc, self.t1 - dc)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DVector<T> {
    pub dx: C<T>,
    pub dy: C<T>,
    pub dz: C<T>,
}

impl<T: Real> DVector<T> {
    pub fn new(dx: C<T>, dy: C<T>, dz: C<T>) -> Self {
        DVector { dx, dy, dz }
    }

    pub fn zero() -> Self {
        DVector::new(C::zero(), C::zero(), C::zero())
    }

    /// Bilinear (not Hermitian) square d·d = dx² + dy² + dz².
    pub fn square(&self) -> C<T> {
        self.dx * self.dx + self.dy * self.dy + self.dz * self.dz
    }

    pub fn dot(&self, o: &Self) -> C<T> {
        self.dx * o.dx + self.dy * o.dy + self.dz * o.dz
    }

    pub fn scale(&self, s: C<T>) -> Self {
        DVector::new(self.dx * s, self.dy * s, self.dz * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        DVector::new(self.dx + o.dx, self.dy + o.dy, self.dz + o.dz)
    }

    pub fn max_abs(&self) -> T {
        self.dx.norm().max(self.dy.norm()).max(self.dz.norm())
    }
}

/// Row-major 2×2 matrix d·σ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochMatrix<T>(pub [[C<T>; 2]; 2]);

impl<T: Real> BlochMatrix<T> {
    pub fn trace(&self) -> C<T> {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, v: [C<T>; 2]) -> [C<T>; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        BlochMatrix([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }
}

fn expect_variant<T>(spec: &ModelSpec<T>, ok: &[Variant], expected: &'static str) -> Result<()> {
    if ok.contains(&spec.variant) {
        Ok(())
    } else {
        Err(Error::VariantMismatch {
            expected,
            found: spec.variant.name(),
        })
    }
}

pub fn d_ssh<T: Real>(spec: &ModelSpec<T>, k: C<T>) -> Result<DVector<T>> {
    expect_variant(spec, &[Variant::Ssh1d], "ssh1d")?;
    Ok(rice_mele_chain(
        spec.t1,
        spec.t2,
        spec.t3,
        spec.gamma,
        re(-spec.delta_onsite),
        k,
    ))
}

pub fn d_chern_x<T: Real>(spec: &ModelSpec<T>, kx: C<T>, ky: T) -> Result<DVector<T>> {
    expect_variant(spec, &[Variant::ChernXObc], "chern_x_obc")?;
    let (tp, tm) = spec.effective_hoppings(ky);
    Ok(rice_mele_chain(
        tp,
        tm,
        spec.t3,
        spec.gamma,
        re(-spec.delta_onsite * sin_cos(ky).1),
        kx,
    ))
}

pub fn d_chern_y<T: Real>(spec: &ModelSpec<T>, kx: T, ky: C<T>) -> Result<DVector<T>> {
    expect_variant(
        spec,
        &[Variant::ChernYObcA, Variant::ChernYObcB],
        "chern_y_obc_a or chern_y_obc_b",
    )?;
    let (t1, d, g) = (spec.t1, spec.delta_stagger, spec.gamma);
    let (ckx, skx) = sin_cos(kx);
    let half = T::lit(0.5);
    let (cky, sky) = csin_cos(ky);
    let dx = re(t1 * (T::one() + ckx)) + cky * (d * (T::one() - ckx));
    let dy = match spec.variant {
        Variant::ChernYObcA => c(t1 * skx, g * half) - cky * (d * skx),
        _ => c(T::zero(), g * half) - cky * d,
    };
    let dz = -(sky * spec.delta_onsite);
    Ok(DVector::new(dx, dy, dz))
}

/// dx = a + (b+t3)cos k, dy = (b−t3) sin k + iγ/2, dz given.
fn rice_mele_chain<T: Real>(a: T, b: T, t3: T, gamma: T, dz: C<T>, k: C<T>) -> DVector<T> {
    let (ck, sk) = csin_cos(k);
    let dx = re(a) + ck * (b + t3);
    let dy = sk * (b - t3) + c(T::zero(), gamma * T::lit(0.5));
    DVector::new(dx, dy, dz)
}

/// d along the open direction at complex momentum k; the transverse
/// momentum is required for the 2d variants.
pub fn d_vector<T: Real>(spec: &ModelSpec<T>, k: C<T>, transverse_k: Option<T>) -> Result<DVector<T>> {
    let kp = spec.check_transverse(transverse_k)?;
    match spec.variant {
        Variant::Ssh1d => d_ssh(spec, k),
        Variant::ChernXObc => d_chern_x(spec, k, kp),
        Variant::ChernYObcA | Variant::ChernYObcB => d_chern_y(spec, kp, k),
    }
}

pub fn bloch_matrix<T: Real>(d: &DVector<T>) -> BlochMatrix<T> {
    let idy = i_unit::<T>() * d.dy;
    BlochMatrix([[d.dz, d.dx - idy], [d.dx + idy, -d.dz]])
}

pub fn pbc_energy<T: Real>(d: &DVector<T>) -> C<T> {
    d.square().sqrt()
}

/// Unnormalized right eigenvectors (dz ± E, dx + i dy) for the +E and −E
/// branches, exactly as written; they vanish in degenerate configurations.
pub fn pbc_eigenvectors<T: Real>(d: &DVector<T>) -> ([C<T>; 2], [C<T>; 2]) {
    let e = pbc_energy(d);
    let low = d.dx + i_unit::<T>() * d.dy;
    ([d.dz + e, low], [d.dz - e, low])
}

/// Like [`pbc_eigenvectors`], but a branch whose generic form vanishes is
/// replaced by the complementary form (dx − i dy, ±E − dz), which reduces
/// to the basis vectors for d ∥ z.
pub fn pbc_eigenvectors_regularized<T: Real>(d: &DVector<T>) -> ([C<T>; 2], [C<T>; 2]) {
    let e = pbc_energy(d);
    let (mut p, mut m) = pbc_eigenvectors(d);
    let tiny = T::lit(1e-12);
    let up = d.dx - i_unit::<T>() * d.dy;
    if e.norm() > T::lit(1e-8) {
        if vec2_norm(&p) < tiny {
            p = normalize_basis([up, e - d.dz]);
        }
        if vec2_norm(&m) < tiny {
            m = normalize_basis([up, -e - d.dz]);
        }
    }
    (p, m)
}

// (dx − i dy, ±E − dz) for d = (0,0,dz) is (0, ±|dz| − dz): rescale to the
// unit basis vector so the σz limit is clean.
fn normalize_basis<T: Real>(v: [C<T>; 2]) -> [C<T>; 2] {
    if v[0].norm() == T::zero() && v[1].norm() > T::zero() {
        [v[0], C::new(T::one(), T::zero())]
    } else if v[1].norm() == T::zero() && v[0].norm() > T::zero() {
        [C::new(T::one(), T::zero()), v[1]]
    } else {
        v
    }
}

pub fn vec2_norm<T: Real>(v: &[C<T>; 2]) -> T {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// d(β) = lower/β + constant + upper·β along the open direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Laurent<T> {
    pub lower: DVector<T>,
    pub constant: DVector<T>,
    pub upper: DVector<T>,
}

impl<T: Real> Laurent<T> {
    pub fn eval(&self, beta: C<T>) -> DVector<T> {
        self.constant
            .add(&self.upper.scale(beta))
            .add(&self.lower.scale(beta.inv()))
    }

    /// Coefficients c_m of E²(β) = Σ_{m=−2..2} c_m β^m, indexed m+2.
    pub fn energy_sq_coeffs(&self) -> [C<T>; 5] {
        let d = [&self.lower, &self.constant, &self.upper];
        let mut out = [C::zero(); 5];
        for (a, da) in d.iter().enumerate() {
            for (b, db) in d.iter().enumerate() {
                out[a + b] = out[a + b] + da.dot(db);
            }
        }
        out
    }

    pub fn energy_sq(&self, beta: C<T>) -> C<T> {
        self.eval(beta).square()
    }

    pub fn max_abs(&self) -> T {
        self.lower
            .max_abs()
            .max(self.constant.max_abs())
            .max(self.upper.max_abs())
    }
}

pub fn laurent<T: Real>(spec: &ModelSpec<T>, transverse_k: Option<T>) -> Result<Laurent<T>> {
    spec.validate()?;
    let kp = spec.check_transverse(transverse_k)?;
    let half = T::lit(0.5);
    let z = C::zero();
    let rm = |a: T, b: T, dz: T| {
        // cos k → (β + 1/β)/2, sin k → (β − 1/β)/(2i)
        let s = c(T::zero(), -(b - spec.t3) * half);
        Laurent {
            lower: DVector::new(re((b + spec.t3) * half), -s, z),
            constant: DVector::new(re(a), c(T::zero(), spec.gamma * half), re(dz)),
            upper: DVector::new(re((b + spec.t3) * half), s, z),
        }
    };
    Ok(match spec.variant {
        Variant::Ssh1d => rm(spec.t1, spec.t2, -spec.delta_onsite),
        Variant::ChernXObc => {
            let (tp, tm) = spec.effective_hoppings(kp);
            rm(tp, tm, -spec.delta_onsite * kp.sin())
        }
        Variant::ChernYObcA | Variant::ChernYObcB => {
            let (ck, sk) = (kp.cos(), kp.sin());
            let (t1, d) = (spec.t1, spec.delta_stagger);
            let one = T::one();
            let (dy0, dy1) = if spec.variant == Variant::ChernYObcA {
                (c(t1 * sk, spec.gamma * half), re(-d * sk * half))
            } else {
                (c(T::zero(), spec.gamma * half), re(-d * half))
            };
            // −Δ sin ky → ±iΔ/2 on β^{±1}
            let dz1 = c(T::zero(), spec.delta_onsite * half);
            Laurent {
                lower: DVector::new(re(d * (one - ck) * half), dy1, -dz1),
                constant: DVector::new(re(t1 * (one + ck)), dy0, z),
                upper: DVector::new(re(d * (one - ck) * half), dy1, dz1),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: C<f64>, b: C<f64>, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn assert_d(d: DVector<f64>, e: [C<f64>; 3]) {
        for (x, y) in [d.dx, d.dy, d.dz].into_iter().zip(e) {
            assert!(close(x, y, 1e-12), "{x} vs {y}");
        }
    }

    #[test]
    fn ssh_oracles() {
        let s = ModelSpec::ssh(0.0, 1.0, 0.0, 0.0, 0.0);
        assert_d(d_ssh(&s, re(0.0)).unwrap(), [re(1.0), re(0.0), re(0.0)]);
        let s = ModelSpec::ssh(1.0, 1.0, 0.0, 3.0, 0.0);
        assert_d(d_ssh(&s, re(PI / 2.0)).unwrap(), [re(1.0), c(1.0, 1.5), re(0.0)]);
        let s = ModelSpec::ssh(2.0, 1.0, 0.2, 4.0 / 3.0, 1.0);
        assert_d(d_ssh(&s, re(0.0)).unwrap(), [re(3.2), c(0.0, 2.0 / 3.0), re(-1.0)]);
    }

    #[test]
    fn chern_x_oracles() {
        let s = ModelSpec::chern(Variant::ChernXObc, 1.0, 0.0, 3.0, 1.0, 1.0);
        assert_d(d_chern_x(&s, re(0.0), 0.0).unwrap(), [re(2.0), c(0.0, 1.5), re(0.0)]);
        // t₊ = t₋ = 2 at ky = π/2, so dx = 2 − (2 + 1/2)
        let s = ModelSpec::chern(Variant::ChernXObc, 2.0, 0.5, 0.8, 0.25, 2.0);
        assert_d(
            d_chern_x(&s, re(PI), PI / 2.0).unwrap(),
            [re(-0.5), c(0.0, 0.4), re(-0.25)],
        );
    }

    #[test]
    fn chern_y_oracles() {
        let s = ModelSpec::chern(Variant::ChernYObcB, 1.0, 0.0, 0.4, 0.1, 1.75);
        assert_d(d_chern_y(&s, 0.0, re(0.0)).unwrap(), [re(2.0), c(-1.75, 0.2), re(0.0)]);
        // kx = π: dx = δ·2·cos ky, dy = iγ/2, dz = −Δ sin ky
        let a = ModelSpec { variant: Variant::ChernYObcA, ..s };
        assert_d(d_chern_y(&a, PI, re(PI)).unwrap(), [re(-3.5), c(0.0, 0.2), re(0.0)]);
    }

    #[test]
    fn wrong_variant_is_rejected() {
        let s = ModelSpec::ssh(1.0, 1.0, 0.0, 0.0, 0.0);
        assert!(matches!(d_chern_x(&s, re(0.0), 0.0), Err(Error::VariantMismatch { .. })));
        assert!(d_chern_y(&s, 0.0, re(0.0)).is_err());
        let x = ModelSpec { variant: Variant::ChernXObc, ..s };
        assert!(d_ssh(&x, re(0.0)).is_err());
    }

    #[test]
    fn bloch_matrix_oracles() {
        let z = bloch_matrix(&DVector::<f64>::zero());
        assert!(z.0.iter().flatten().all(|x| x.norm() == 0.0));
        let x = bloch_matrix(&DVector::new(re(1.0), re(0.0), re(0.0)));
        assert_eq!(x.0, [[re(0.0), re(1.0)], [re(1.0), re(0.0)]]);
        let y = bloch_matrix(&DVector::new(re(0.0), c(0.0, 0.5), re(0.0)));
        assert!(close(y.0[0][1], re(0.5), 1e-15) && close(y.0[1][0], re(-0.5), 1e-15));
    }

    #[test]
    fn energy_oracles() {
        assert!(close(pbc_energy(&DVector::new(re(3.0), re(4.0), re(0.0))), re(5.0), 1e-15));
        assert!(pbc_energy(&DVector::new(re(1.0), c(0.0, 1.0), re(0.0))).norm() < 1e-15);
    }

    #[test]
    fn eigenvector_oracles() {
        let (p, m) = pbc_eigenvectors(&DVector::new(re(1.0), re(0.0), re(0.0)));
        assert_eq!(p, [re(1.0), re(1.0)]);
        assert_eq!(m, [re(-1.0), re(1.0)]);
        let (p, m) = pbc_eigenvectors(&DVector::new(re(0.0), re(0.0), re(1.0)));
        assert_eq!(p, [re(2.0), re(0.0)]);
        assert_eq!(m, [re(0.0), re(0.0)]);
        let (p, m) = pbc_eigenvectors(&DVector::new(re(1.0), c(0.0, 1.0), re(0.0)));
        assert!(vec2_norm(&p) < 1e-15 && vec2_norm(&m) < 1e-15);
        let (p, m) = pbc_eigenvectors_regularized(&DVector::new(re(0.0), re(0.0), re(1.0)));
        assert_eq!(p, [re(2.0), re(0.0)]);
        assert_eq!(m, [re(0.0), re(1.0)]);
    }

    #[test]
    fn laurent_matches_direct_evaluation() {
        let specs = [
            ModelSpec::ssh(0.7, 1.0, 0.2, 1.3, 0.4),
            ModelSpec::chern(Variant::ChernXObc, 1.1, 0.3, 0.9, 0.6, 0.8),
            ModelSpec::chern(Variant::ChernYObcA, 1.0, 0.0, 0.4, 0.1, 1.75),
            ModelSpec::chern(Variant::ChernYObcB, 1.0, 0.0, 0.4, 0.1, 1.75),
        ];
        for s in specs {
            let kp = s.variant.is_2d().then_some(0.77);
            let l = laurent(&s, kp).unwrap();
            for k in [c(0.3, 0.0), c(1.9, -0.4), c(-2.5, 0.8)] {
                let beta = (i_unit::<f64>() * k).exp();
                let a = l.eval(beta);
                let b = d_vector(&s, k, kp).unwrap();
                for (x, y) in [(a.dx, b.dx), (a.dy, b.dy), (a.dz, b.dz)] {
                    assert!(close(x, y, 1e-12), "{:?}: {x} vs {y}", s.variant);
                }
                let e2: C<f64> = l
                    .energy_sq_coeffs()
                    .iter()
                    .enumerate()
                    .map(|(m, cm)| cm * beta.powi(m as i32 - 2))
                    .sum();
                assert!(close(e2, b.square(), 1e-10));
            }
        }
    }

    #[test]
    fn transverse_momentum_checked() {
        let s = ModelSpec::chern(Variant::ChernXObc, 1.0, 0.0, 3.0, 1.0, 1.0);
        assert!(matches!(laurent(&s, None), Err(Error::MissingTransverseMomentum(_))));
        let t = ModelSpec::ssh(1.0, 1.0, 0.0, 0.0, 0.0);
        assert!(laurent(&t, Some(0.1)).is_err());
        let bad = ModelSpec { t1: f64::NAN, ..t };
        assert!(matches!(bad.validate(), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn single_precision_works() {
        let s = ModelSpec::<f32>::ssh(1.0, 1.0, 0.0, 3.0, 0.0);
        let d = d_ssh(&s, re(std::f32::consts::FRAC_PI_2)).unwrap();
        assert!((d.dy - c(1.0f32, 1.5)).norm() < 1e-6);
    }
}
