use proptest::prelude::*;
use sphere_su2::exterior::{equals, FrameVector};
use sphere_su2::frames::{
    d_extended, d_invariant, expand_at, expand_invariant, generator, project_invariant, Core, Generator, Monomial,
};
use sphere_su2::oracle::{adapted_frame, eval_form, numeric_d, subsets, ChartPoint, NumForm, Pole};
use sphere_su2::{GeometryParams, InvariantForm, Poly, Scalar};

fn rational() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=5).prop_map(|(n, d)| Scalar::ratio(n, d))
}

fn geometry() -> impl Strategy<Value = GeometryParams> {
    (rational(), 1i64..=12, 1i64..=6)
        .prop_map(|(k, n, d)| GeometryParams::from_s_squared(k, Scalar::ratio(n, d)).unwrap())
}

fn poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(rational(), 0..=max_deg + 1).prop_map(Poly::new)
}

fn invariant(dim: usize, degree: usize, max_t: usize) -> impl Strategy<Value = InvariantForm> {
    let monos = Monomial::all(dim, degree);
    prop::collection::vec(poly(max_t), monos.len()).prop_map(move |coeffs| {
        monos
            .iter()
            .zip(coeffs)
            .fold(InvariantForm::zero(dim, degree), |acc, (m, c)| acc.add(&InvariantForm::term(dim, *m, c)).unwrap())
    })
}

fn core_num(c: Core) -> NumForm {
    match c {
        Core::One => NumForm::One,
        Core::Alpha0 => NumForm::Alpha0,
        Core::Alpha1 => NumForm::Alpha1,
        Core::Alpha2 => NumForm::Alpha2,
        Core::Dtheta => NumForm::DTheta,
        Core::Vol4 => NumForm::wedge(NumForm::Alpha0, NumForm::Alpha2),
    }
}

/// The same form written in ambient coordinates for the oracle.
fn to_numform(w: &InvariantForm) -> NumForm {
    let mut terms = Vec::new();
    for (m, p) in w.terms() {
        let mut f = core_num(m.core);
        if m.theta {
            f = NumForm::wedge(NumForm::Theta, f);
        }
        if m.dt {
            f = NumForm::wedge(f, NumForm::Dt);
        }
        for (k, c) in p.coeffs().iter().enumerate() {
            terms.push((c.to_f64(), NumForm::tpow(k as u32, f.clone())));
        }
    }
    if terms.is_empty() {
        return NumForm::Sum(Vec::new());
    }
    NumForm::Sum(terms)
}

fn unit_geom() -> GeometryParams {
    GeometryParams::new(Scalar::zero(), Scalar::one()).unwrap()
}

/// Largest |expand(d w)(e_I) - oracle dω(e_I)| at u = (0,0,1).
fn oracle_gap(w: &InvariantForm, t: f64) -> f64 {
    let geom = unit_geom();
    let dim = w.dim();
    let dw = if dim == 6 { d_extended(w, &geom) } else { d_invariant(w, &geom) };
    let num = to_numform(w);
    let tt = (dim == 6).then_some(t);
    let pt = ChartPoint::from_sphere([0.4, -0.3, 1.1], [0.0, 0.0, 1.0], Pole::South, tt).unwrap();
    let frame = adapted_frame(dim);
    let kd = expand_at(&dw, &geom, &Scalar::float(t)).unwrap();
    let kw = expand_at(w, &geom, &Scalar::float(t)).unwrap();
    let mut worst: f64 = 0.0;
    for idx in subsets(dim, w.grade() + 1) {
        let fv: Vec<FrameVector> = idx.iter().map(|&i| FrameVector::basis(dim, i).unwrap()).collect();
        let cv: Vec<Vec<f64>> = idx.iter().map(|&i| frame[i].clone()).collect();
        let exact = kd.evaluate(&fv).unwrap().to_f64();
        let oracle = if w.terms().is_empty() { 0.0 } else { numeric_d(&num, &pt, &cv).unwrap() };
        worst = worst.max((exact - oracle).abs());
    }
    if !w.terms().is_empty() {
        for idx in subsets(dim, w.grade()) {
            let fv: Vec<FrameVector> = idx.iter().map(|&i| FrameVector::basis(dim, i).unwrap()).collect();
            let cv: Vec<Vec<f64>> = idx.iter().map(|&i| frame[i].clone()).collect();
            let exact = kw.evaluate(&fv).unwrap().to_f64();
            worst = worst.max((exact - eval_form(&num, &pt, &cv).unwrap()).abs());
        }
    }
    worst
}

proptest! {
    #[test]
    fn d_squared_vanishes_exactly((g, w) in (geometry(), (0usize..=3).prop_flat_map(|k| invariant(5, k, 0)))) {
        let dd = d_invariant(&d_invariant(&w, &g), &g);
        prop_assert!(dd.is_exact());
        prop_assert!(dd.is_zero());
    }

    #[test]
    fn extended_d_squared_vanishes((g, w) in (geometry(), (0usize..=4).prop_flat_map(|k| invariant(6, k, 3)))) {
        let dd = d_extended(&d_extended(&w, &g), &g);
        prop_assert!(dd.is_zero());
    }

    #[test]
    fn d_is_a_derivation((g, a, b) in (geometry(), invariant(5, 1, 0), invariant(5, 2, 0))) {
        let lhs = d_invariant(&a.wedge(&b).unwrap(), &g);
        let rhs = d_invariant(&a, &g).wedge(&b).unwrap().sub(&a.wedge(&d_invariant(&b, &g)).unwrap()).unwrap();
        prop_assert!(lhs.approx_eq(&rhs, 0.0));
    }

    #[test]
    fn project_inverts_expand((g, w) in (geometry(), (0usize..=5).prop_flat_map(|k| invariant(5, k, 0)))) {
        let k = expand_invariant(&w, &g).unwrap();
        let back = project_invariant(&k, &g).unwrap();
        prop_assert!(back.approx_eq(&w, 0.0));
    }

    #[test]
    fn invariant_wedge_matches_exterior_wedge(
        (g, a, b) in (geometry(), (0usize..=3).prop_flat_map(|k| invariant(5, k, 0)), (0usize..=2).prop_flat_map(|k| invariant(5, k, 0)))
    ) {
        let lhs = expand_invariant(&a.wedge(&b).unwrap(), &g).unwrap();
        let rhs = expand_invariant(&a, &g).unwrap().wedge(&expand_invariant(&b, &g).unwrap()).unwrap();
        prop_assert!(equals(&lhs, &rhs, 0.0));
    }

    #[test]
    fn d_agrees_with_coordinate_oracle(w in (0usize..=3).prop_flat_map(|k| invariant(5, k, 0))) {
        let gap = oracle_gap(&w, 1.0);
        prop_assert!(gap < 1e-9, "gap {gap}");
    }

    #[test]
    fn extended_d_agrees_with_coordinate_oracle(
        w in (0usize..=4).prop_flat_map(|k| invariant(6, k, 2)),
        t in 0.2f64..3.0,
    ) {
        let gap = oracle_gap(&w, t);
        prop_assert!(gap < 1e-8, "gap {gap}");
    }
}

#[test]
fn wedge_identities_after_expansion() {
    let g = GeometryParams::new(Scalar::ratio(-2, 3), Scalar::ratio(3, 2)).unwrap();
    let f = |x| generator(x, &g);
    let (a0, a1, a2, dth) = (f(Generator::Alpha0), f(Generator::Alpha1), f(Generator::Alpha2), f(Generator::Dtheta));
    let w = |x: &sphere_su2::KForm, y: &sphere_su2::KForm| x.wedge(y).unwrap();
    let half = Scalar::ratio(-1, 2);
    assert!(equals(&w(&a0, &a2), &w(&a1, &a1).scale(&half), 0.0));
    assert!(equals(&w(&a0, &a2), &w(&dth, &dth).scale(&half), 0.0));
    for z in [w(&a0, &a1), w(&a2, &a1), w(&a0, &dth), w(&a1, &dth), w(&a2, &dth)] {
        assert!(z.is_zero());
    }
}

#[test]
fn generators_match_oracle_at_adapted_point() {
    for (core, num) in [
        (Core::Alpha0, NumForm::Alpha0),
        (Core::Alpha1, NumForm::Alpha1),
        (Core::Alpha2, NumForm::Alpha2),
        (Core::Dtheta, NumForm::DTheta),
    ] {
        let w = InvariantForm::core(5, core);
        assert!(oracle_gap(&w, 1.0) < 1e-12, "{num:?}");
    }
    assert!(oracle_gap(&InvariantForm::theta(5), 1.0) < 1e-12);
}
