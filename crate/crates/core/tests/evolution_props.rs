use proptest::prelude::*;
use sphere_su2::evolution::{
    build_su3, check_integrable, flat_solution, integrate_numeric, FlatInit, Su3Input, Su3Mode,
};
use sphere_su2::frames::d_extended;
use sphere_su2::Scalar;

fn rational(lo: i64, hi: i64, den: i64) -> impl Strategy<Value = Scalar> {
    (lo * den..=hi * den).prop_map(move |n| Scalar::ratio(n, den))
}

/// Valid flat initial data: start from b0 = -4p^2s^2, c0 = 0, c4 = a4 and
/// rotate the (B, C) pair by a rational angle.
fn flat_init() -> impl Strategy<Value = FlatInit> {
    (
        rational(-3, 3, 2).prop_filter("p != 0", |p| !p.is_zero()),
        (1i64..=8).prop_map(|n| Scalar::ratio(n, 4)),
        rational(1, 3, 3),
        rational(-2, 2, 3),
        0i64..6,
        1i64..6,
    )
        .prop_map(|(p, s2, a4, b4, m, n)| {
            let b0 = -(Scalar::int(4) * p.square() * &s2);
            let c0 = Scalar::zero();
            let c4 = a4.clone();
            let b5 = (b4.square() - a4.square()) / &b0;
            let c5 = Scalar::int(2) * &b4 * &a4 / &b0;
            let den = m * m + n * n;
            let (c, s) = (Scalar::ratio(m * m - n * n, den), Scalar::ratio(2 * m * n, den));
            let rot = |x: &Scalar, y: &Scalar| (&c * x - &s * y, &s * x + &c * y);
            let (b0, c0) = rot(&b0, &c0);
            let (b4, c4) = rot(&b4, &c4);
            let (b5, c5) = rot(&b5, &c5);
            FlatInit { p, a4, b0, c0, b4, c4, b5, c5, s2 }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flat_solution_solves_the_flow_exactly(init in flat_init()) {
        let st = flat_solution(&init).unwrap();
        for r in st.residual().to_array() {
            prop_assert!(r.is_zero() && r.is_exact(), "{r}");
        }
        for c in st.constraint_polys() {
            prop_assert!(c.is_zero(), "{c}");
        }
    }

    #[test]
    fn flat_su3_lift_is_closed(init in flat_init()) {
        let st = flat_solution(&init).unwrap();
        let su3 = build_su3(Su3Input::Family(&st), Su3Mode::General).unwrap();
        let rep = check_integrable(&su3, &st.geom);
        prop_assert!(rep.exact && rep.integrable);
        for f in [&su3.f, &su3.psi_plus, &su3.psi_minus] {
            prop_assert!(d_extended(&d_extended(f, &st.geom), &st.geom).is_zero());
        }
    }

    #[test]
    fn rk4_tracks_the_flat_solution(init in flat_init()) {
        let st = flat_solution(&init).unwrap();
        let mut start = st.sample_at(0.0);
        // the numeric flow needs A3 > 0 and positive orientation on the whole interval
        prop_assume!(start.orientation() > 0.0);
        let p = start.p;
        let t_end = 0.5;
        prop_assume!(st.a3.eval_f64(t_end) > 0.0 && st.sample_at(t_end).orientation() > 0.0);
        start.t = 0.0;
        let traj = integrate_numeric(&start, &move |_| p, &st.geom, t_end, 1e-3).unwrap();
        for pt in &traj.points {
            let exact = st.sample_at(pt.sample.t);
            let err = (0..3)
                .map(|i| (pt.sample.b[i] - exact.b[i]).abs().max((pt.sample.c[i] - exact.c[i]).abs()))
                .fold((pt.sample.a3 - exact.a3).abs(), f64::max);
            prop_assert!(err < 1e-8, "t = {}: {err}", pt.sample.t);
        }
        prop_assert!(traj.max_drift < 1e-8);
    }
}
