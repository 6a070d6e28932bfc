use nhbp::gbz::gbz_contour;
use nhbp::invariants::{analytic_obc_energy, bp_from_product, edge_ratios, gbz_radius, vorticity};
use nhbp::linalg::band::BandLu;
use nhbp::linalg::{inner, CMatrix};
use nhbp::model::{bloch_matrix, d_vector, laurent, DVector, ModelSpec, Variant};
use nhbp::realspace::{biorthogonal_spectrum, build_obc, Termination};
use nhbp::scalar::{c, cis, norm2, re, C};
use proptest::prelude::*;
use std::f64::consts::PI;

type Z = C<f64>;

fn cplx() -> impl Strategy<Value = Z> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
}

fn variant() -> impl Strategy<Value = Variant> {
    prop::sample::select(Variant::ALL.to_vec())
}

fn t3_zero_spec() -> impl Strategy<Value = (ModelSpec<f64>, f64)> {
    (0.2..2.0f64, 0.5..1.5f64, 0.0..2.5f64, 0.0..1.0f64, 0.3..1.5f64, 0.0..(2.0 * PI), any::<bool>()).prop_filter_map(
        "Γ collapses",
        |(t1, t2, g, dd, delta, ky, one_d)| {
            let (s, k) = if one_d {
                (ModelSpec::ssh(t1, t2, 0.0, g, dd), 0.0)
            } else {
                (ModelSpec::chern(Variant::ChernXObc, t1, 0.0, g, dd, delta), ky)
            };
            let (tp, _) = s.effective_hoppings(k);
            ((2.0 * tp).abs() > g + 0.05 || (2.0 * tp).abs() < g - 0.05).then_some((s, k))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bloch_matrix_squares_to_energy_squared(dx in cplx(), dy in cplx(), dz in cplx()) {
        let d = DVector::new(dx, dy, dz);
        let m = bloch_matrix(&d).0;
        let e2 = d.square();
        let scale = 1.0 + e2.norm();
        for i in 0..2 {
            for j in 0..2 {
                let s = m[i][0] * m[0][j] + m[i][1] * m[1][j];
                let want = if i == j { e2 } else { Z::new(0.0, 0.0) };
                prop_assert!((s - want).norm() < 1e-12 * scale);
            }
        }
        prop_assert!((m[0][0] + m[1][1]).norm() < 1e-15);
    }

    #[test]
    fn hermitian_at_zero_gamma(v in variant(), t1 in -2.0..2.0f64, t3 in -1.0..1.0f64, dd in -1.0..1.0f64,
                               delta in -2.0..2.0f64, k in 0.0..(2.0 * PI), q in 0.0..(2.0 * PI)) {
        let s = if v == Variant::Ssh1d {
            ModelSpec::ssh(t1, delta, t3, 0.0, dd)
        } else {
            ModelSpec::chern(v, t1, t3, 0.0, dd, delta)
        };
        let d = d_vector(&s, re(k), v.is_2d().then_some(q)).unwrap();
        let m = bloch_matrix(&d).0;
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((m[i][j] - m[j][i].conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn gbz_is_the_closed_form_circle((s, k) in t3_zero_spec()) {
        let ky = s.variant.is_2d().then_some(k);
        let contour = gbz_contour(&s, ky, 128).unwrap();
        let g = gbz_radius(&s, k).unwrap();
        prop_assert!(contour.radius_std() / contour.mean_radius() < 1e-5);
        prop_assert!((contour.mean_radius() - g).abs() < 1e-8);
    }

    #[test]
    fn obc_energy_is_the_bloch_energy_on_the_circle((s, k) in t3_zero_spec(), theta in 0.0..(2.0 * PI)) {
        let g = gbz_radius(&s, k).unwrap();
        prop_assume!(g > 1e-6);
        let e = analytic_obc_energy(&s, k, theta).unwrap();
        let l = laurent(&s, s.variant.is_2d().then_some(k)).unwrap();
        let e2 = l.energy_sq(cis(theta) * g);
        prop_assert!((e * e - e2).norm() < 1e-10 * (1.0 + e2.norm()));
    }

    #[test]
    fn bp_closed_form_matches_direct_sum(x in prop_oneof![0.01..0.98f64, 1.02..3.0f64, -3.0..-0.01f64], n in 2usize..300) {
        // direct sum, normalized by the largest term
        let big = if x.abs() > 1.0 { x.abs().powi(n as i32) } else { 1.0 };
        let (mut s0, mut s1, mut p) = (0.0, 0.0, 1.0);
        for k in 1..=n {
            p *= x;
            s0 += p / big;
            s1 += k as f64 * p / big;
        }
        let direct = 1.0 - s1 / s0 / n as f64;
        prop_assert!((bp_from_product(x, n) - direct).abs() < 1e-9, "{} vs {}", bp_from_product(x, n), direct);
    }

    #[test]
    fn bp_stays_in_unit_interval_for_positive_products(x in 1e-6..1e6f64, n in 2usize..5000) {
        let p = bp_from_product(x, n);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
    }

    #[test]
    fn vorticity_flips_exactly_under_reversal(a in cplx(), b in cplx(), w in -2i32..=2, n in 64usize..400) {
        let ts: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let e1: Vec<Z> = ts.iter().map(|t| a * 0.1 + cis(w as f64 * t) * (1.0 + 0.3 * b.norm() * t.sin())).collect();
        let e2: Vec<Z> = e1.iter().map(|z| a * 0.1 * 2.0 - z).collect();
        let f = vorticity(&e1, &e2).unwrap().nu_12;
        let r1: Vec<Z> = e1.iter().rev().cloned().collect();
        let r2: Vec<Z> = e2.iter().rev().cloned().collect();
        let g = vorticity(&r1, &r2).unwrap().nu_12;
        prop_assert_eq!(f, -g);
        prop_assert!((f - w as f64).abs() < 1e-12);
    }

    #[test]
    fn band_lu_solves(n in 4usize..40, kl in 0usize..4, ku in 0usize..4, seed in any::<u64>()) {
        let mut st = seed | 1;
        let mut rnd = || {
            st ^= st << 13; st ^= st >> 7; st ^= st << 17;
            (st >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = CMatrix::from_fn(n, n, |i, j| {
            if j + kl >= i && i + ku >= j { c(rnd(), rnd()) + if i == j { re(3.0) } else { re(0.0) } } else { re(0.0) }
        });
        let b: Vec<Z> = (0..n).map(|_| c(rnd(), rnd())).collect();
        let lu = BandLu::new(&a, kl, ku, re(0.0), 1e-300);
        let x = lu.solve(&b);
        let r: Vec<Z> = a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        prop_assert!(norm2(&r) < 1e-10 * norm2(&b));
        let y = lu.solve_adjoint(&b);
        let r: Vec<Z> = a.adjoint().matvec(&y).iter().zip(&b).map(|(p, q)| p - q).collect();
        prop_assert!(norm2(&r) < 1e-10 * norm2(&b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn biorthogonal_pairs_are_dual(t1 in 0.2..2.0f64, t3 in 0.0..0.4f64, g in 0.0..1.5f64, dd in 0.0..1.0f64,
                                   n in 3usize..40, broken in any::<bool>()) {
        let s = ModelSpec::ssh(t1, 1.0, t3, g, dd);
        let term = if broken { Termination::BrokenCellAatBothEnds } else { Termination::FullCells };
        let h = build_obc(&s, n, None, term).unwrap();
        // near-EP parameter draws are allowed to refuse; everything else must pair
        let Ok(b) = biorthogonal_spectrum(&h) else { return Ok(()) };
        let (rr, lr) = b.residuals();
        prop_assert!(rr < 1e-8 && lr < 1e-8, "residuals {rr:e} {lr:e}");
        for i in 0..b.len().min(6) {
            let ov = inner(&b.scaled_left(i), &b.scaled_right(i));
            prop_assert!((ov - re(1.0)).norm() < 1e-8, "⟨L|R⟩ = {ov}");
        }
    }

    #[test]
    fn edge_ratio_product_matches_its_parts((s, k) in t3_zero_spec()) {
        match edge_ratios(&s, k) {
            Ok(r) => prop_assert!((r.product().abs() - r.product_abs).abs() < 1e-12 * (1.0 + r.product_abs)),
            Err(e) => prop_assert_eq!(e, nhbp::Error::RatioSingularity),
        }
    }
}
