use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sphere_su2::classify::classify;
use sphere_su2::evolution::{build_su3, check_integrable, Su3Input, Su3Mode};
use sphere_su2::families::{
    sasaki_einstein_family, type1_from_parameters, type1_nearly_hypo_tol, type2_double_hypo, verify_named_systems,
    Sign, TypeIIParams, LABEL_TYPE2_K_NONZERO,
};
use sphere_su2::frames::{d_invariant, expand_invariant};
use sphere_su2::sample::{random_structure, random_type1_point};
use sphere_su2::su2core::{check_su2, NaturalStructure};
use sphere_su2::{GeometryParams, Scalar};

fn sign(b: bool) -> Sign {
    if b {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn type1_surface_identities(seed in any::<u64>(), k in -4i64..=4) {
        let tp = random_type1_point(&mut ChaCha8Rng::seed_from_u64(seed), true);
        let geom = GeometryParams::from_s_squared(Scalar::int(k), Scalar::ratio(1, 2)).unwrap();
        let ns = type1_from_parameters(&tp, &geom).unwrap();
        let (b, c) = (&ns.b, &ns.c);
        prop_assert_eq!(&b[2] * &c[0] - &b[1] * &c[1], tp.a.clone());
        prop_assert_eq!(&b[0] * &c[2] - &b[1] * &c[1], -tp.a.clone());
        prop_assert!(check_su2(&ns).valid);
    }

    #[test]
    fn nearly_hypo_solutions_are_double_and_contact_hypo(
        s2 in 0.1f64..2.0,
        m_frac in 0.05f64..0.95,
        b2 in -1.0f64..1.0,
        root_sign in any::<bool>(),
        b1_sign in any::<bool>(),
    ) {
        // K chosen so that 36 s^4 - 4 s^2 K = m^2, then b0 from the curvature equation
        let m = m_frac * 6.0 * s2;
        let k = (36.0 * s2 * s2 - m * m) / (4.0 * s2);
        let b0 = -s2 * k * b2 + if root_sign { m } else { -m };
        let b1_sq = 1.0 + b0 * b2;
        prop_assume!(b1_sq >= 0.0);
        let b1 = b1_sq.sqrt() * if b1_sign { 1.0 } else { -1.0 };
        let geom = GeometryParams::from_s_squared(Scalar::float(k), Scalar::float(s2)).unwrap();
        let f = Scalar::float;
        let Ok(ns) = type1_nearly_hypo_tol(&f(b0), &f(b1), &f(b2), &geom, 1e-9) else {
            return Ok(());
        };
        let flags = classify(&ns);
        prop_assert!(flags.su2_valid);
        prop_assert!(flags.double_hypo, "{:?}", flags.residuals);
        prop_assert!(flags.contact_hypo, "{:?}", flags.residuals);
        let w2 = expand_invariant(&ns.omega(2), &geom).unwrap();
        let w3 = expand_invariant(&ns.omega(3), &geom).unwrap();
        prop_assert!(w2.wedge(&w3).unwrap().max_abs().to_f64() < 1e-9);
        prop_assert_eq!(verify_named_systems(&ns).wedge23_auto, Some(true));
    }

    #[test]
    fn sasaki_einstein_family_satisfies_omega3_equation(
        s_num in 1i64..=6,
        s_den in 1i64..=6,
        m in 0i64..8,
        n in 1i64..8,
        positive in any::<bool>(),
    ) {
        // Q^2 + R^2 = 1 with R = 3 s^2 b2
        let s2 = Scalar::ratio(s_num, s_den);
        let den = m * m + n * n;
        let r = Scalar::ratio(2 * m * n, den);
        let b2 = &r / (Scalar::int(3) * &s2);
        let ns = sasaki_einstein_family(&s2, &b2, sign(positive)).unwrap();
        prop_assert!(ns.is_exact());
        let th = ns.theta_tilde();
        let lhs = d_invariant(&ns.omega(3), &ns.geom);
        let rhs = th.wedge(&ns.omega(2)).unwrap().scale(&Scalar::int(-3));
        prop_assert!(lhs.approx_eq(&rhs, 0.0));
        let flags = classify(&ns);
        prop_assert!(flags.sasaki_einstein && flags.omega3_dual);
        let su3 = build_su3(Su3Input::Structure(&ns), Su3Mode::Conical).unwrap();
        let rep = check_integrable(&su3, &ns.geom);
        prop_assert!(rep.exact && rep.integrable);
        prop_assert!(rep.df.is_zero_tol(0.0) && rep.dpsi_plus.is_zero_tol(0.0) && rep.dpsi_minus.is_zero_tol(0.0));
    }

    #[test]
    fn type2_solver_never_reaches_nonpositive_curvature(
        a0 in -4i64..=4, a2 in -4i64..=4, a3 in -4i64..=4, p in -3i64..=3, b0 in -3i64..=3, plus in any::<bool>(),
    ) {
        let s = Scalar::int;
        let tp = TypeIIParams { a0: s(a0), a2: s(a2), a3: s(a3), p: s(p), b0: s(b0), sign_b1: sign(plus) };
        match type2_double_hypo(&tp, None, None) {
            Ok((ns, geom)) => {
                prop_assert!(geom.k().is_positive_tol(0.0));
                prop_assert!(classify(&ns).double_hypo);
            }
            Err(e) => {
                if a0 == 0 && a2 != 0 && p != 0 {
                    prop_assert_eq!(e.label(), Some(LABEL_TYPE2_K_NONZERO));
                }
            }
        }
        let zero = s(0);
        if let Err(e) = type2_double_hypo(&tp, None, Some(&zero)) {
            prop_assert!(e.label().is_some());
        } else {
            prop_assert!(false, "K = 0 accepted");
        }
    }

    /// Rotates a random valid structure so that a1 = 0 (type II shape) and
    /// places it over a flat base: never hypo.
    #[test]
    fn flat_type2_shapes_are_never_hypo(seed in any::<u64>(), s2 in 1i64..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_structure(&mut rng, false);
        let (a1, a3) = (base.a[1].to_f64(), base.a[3].to_f64());
        let r = (a1 * a1 + a3 * a3).sqrt();
        prop_assume!(r > 1e-6);
        let (c, s) = (a3 / r, a1 / r);
        let rot = |q: &[Scalar; 4]| {
            let (q1, q3) = (q[1].to_f64(), q[3].to_f64());
            [q[0].clone(), Scalar::float(c * q1 - s * q3), q[2].clone(), Scalar::float(s * q1 + c * q3)]
        };
        let geom = GeometryParams::from_s_squared(Scalar::zero(), Scalar::ratio(s2, 4)).unwrap();
        let ns = NaturalStructure::new(base.p.clone(), rot(&base.a), rot(&base.b), rot(&base.c), geom).unwrap();
        prop_assert!(ns.a[1].to_f64().abs() < 1e-9);
        // a2 = 0 would be the type I shape a = (0, 0, 0, a3)
        prop_assume!(ns.a[2].to_f64().abs() > 1e-6);
        let flags = classify(&ns);
        prop_assert!(flags.su2_valid);
        prop_assert!(!flags.hypo, "{:?}", ns);
    }
}
