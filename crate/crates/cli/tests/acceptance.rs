//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs under `cargo test` with its own harness.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sphere_su2::classify::classify;
use sphere_su2::evolution::{
    build_su3, check_integrable, flat_solution, integrate_numeric, EvolutionSample, FlatInit, Su3Input, Su3Mode,
};
use sphere_su2::families::{
    sasaki_einstein_family, type1_from_parameters, type1_nearly_hypo, type2_double_hypo, Sign, TypeIIParams,
    LABEL_A3P_POSITIVE, LABEL_B_POSITIVE, LABEL_SE_RANGE, LABEL_TYPE2_K_NONZERO,
};
use sphere_su2::frames::{d_invariant, Core};
use sphere_su2::oracle::{verify_flat_su3, verify_flat_system, OracleReport};
use sphere_su2::sample::{random_structure, random_type1_point};
use sphere_su2::su2core::{check_su2, metric_closed_form, metric_contraction_matrix, Mat4};
use sphere_su2::{GeometryParams, InvariantForm, NaturalStructure, Poly, Scalar};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn geom(k: Scalar, s2: Scalar) -> GeometryParams {
    GeometryParams::from_s_squared(k, s2).expect("s^2 > 0")
}

fn omega_is(w: &InvariantForm, coeffs: [(Core, Scalar); 4]) -> bool {
    let want = coeffs.iter().fold(InvariantForm::zero(5, 2), |acc, (c, x)| {
        acc.add(&InvariantForm::core(5, *c).scale(x)).expect("same shape")
    });
    w.approx_eq(&want, 0.0)
}

fn metric_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_float: f64 = 0.0;
    for exact in [true, false] {
        for i in 0..1000 {
            let ns = random_structure(&mut rng, exact);
            ensure(check_su2(&ns).valid, || format!("sample {i} failed the SU(2) check"))?;
            let report = metric_closed_form(&ns);
            let c = metric_contraction_matrix(&ns).map_err(|e| e.to_string())?;
            let scaled = c.scale(&report.nu);
            let g = report.metric.clone().ok_or("nu = 0")?;
            if exact {
                ensure(scaled == report.matrix && c == g, || format!("exact sample {i}: contraction differs"))?;
            } else {
                let scale = report.matrix.max_abs().to_f64().max(1.0);
                let gap = scaled.sub(&report.matrix).max_abs().to_f64() / scale;
                worst_float = worst_float.max(gap);
                ensure(gap < 1e-9, || format!("float sample {i}: gap {gap:e}"))?;
            }
        }
    }
    Ok(format!("1000 exact (identical) + 1000 float (max relative gap {worst_float:.1e})"))
}

fn main_example() -> Outcome {
    let ks = [(-5, 1), (-1, 1), (0, 1), (1, 2), (1, 1), (3, 1), (7, 2), (9, 1)];
    let s2s = [(1, 3), (1, 6), (1, 1), (2, 3), (1, 9)];
    let mut se_hits = Vec::new();
    for (kn, kd) in ks {
        for (sn, sd) in s2s {
            let ns = NaturalStructure::main_example(geom(Scalar::ratio(kn, kd), Scalar::ratio(sn, sd)));
            let g = metric_closed_form(&ns).metric.ok_or("nu = 0")?;
            ensure(g == Mat4::identity(), || format!("G != Id at K={kn}/{kd}, s^2={sn}/{sd}"))?;
            let f = classify(&ns);
            ensure(f.hypo && f.contact_hypo, || format!("not contact-hypo at K={kn}/{kd}, s^2={sn}/{sd}"))?;
            if f.sasaki_einstein {
                se_hits.push(((kn, kd), (sn, sd)));
            }
        }
    }
    ensure(se_hits == vec![((3, 1), (1, 3))], || format!("Sasaki-Einstein at {se_hits:?}"))?;
    Ok(format!("{} (K, s^2) pairs; Sasaki-Einstein only at K=3, s^2=1/3", ks.len() * s2s.len()))
}

fn flat_double_hypo() -> Outcome {
    let g = geom(Scalar::zero(), Scalar::ratio(1, 6));
    let ns = type1_nearly_hypo(&Scalar::int(1), &Scalar::int(2), &Scalar::int(3), &g).map_err(|e| e.to_string())?;
    let w3 = [
        (Core::Alpha0, Scalar::zero()),
        (Core::Alpha1, Scalar::int(-1)),
        (Core::Alpha2, Scalar::int(-4)),
        (Core::Dtheta, Scalar::zero()),
    ];
    ensure(omega_is(&ns.omega(3), w3), || format!("ω3 = {}", ns.omega(3)))?;
    let m = metric_closed_form(&ns);
    let got = (m.g11.clone(), m.g33.clone(), m.g13.clone());
    ensure(got == (Scalar::int(1), Scalar::int(5), Scalar::int(2)), || format!("(g11,g33,g13) = {got:?}"))?;
    let f = classify(&ns);
    ensure(f.double_hypo && !f.sasaki_einstein, || format!("flags {f:?}"))?;
    Ok("ω3 = -α1-4α2, (g11,g33,g13) = (1,5,2), double-hypo, not Sasaki-Einstein".into())
}

fn type1_determinant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = geom(Scalar::ratio(2, 3), Scalar::ratio(1, 2));
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let tp = random_type1_point(&mut rng, i % 2 == 0);
        let ns = type1_from_parameters(&tp, &g).map_err(|e| e.to_string())?;
        let det = metric_closed_form(&ns).det_matrix;
        let gap = (det.to_f64() - 1.0).abs();
        worst = worst.max(gap);
        ensure(gap < 1e-9, || format!("point {i}: det G = {det}"))?;
        ensure(!det.is_exact() || det == Scalar::one(), || format!("exact point {i}: det G = {det}"))?;
    }
    Ok(format!("1000 points, max |det G - 1| = {worst:.1e}"))
}

fn sasaki_einstein_family_metric() -> Outcome {
    let s2 = Scalar::ratio(1, 3);
    // b2 = R/(3s^2) with R = 2mn/(m^2+n^2) keeps sqrt(1 - R^2) rational
    let mut values = Vec::new();
    for (m, n) in [(0, 1), (1, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4), (1, 5), (2, 5), (4, 5)] {
        let r = Scalar::ratio(2 * m * n, m * m + n * n);
        let b2 = &r / (Scalar::int(3) * &s2);
        values.push(b2.clone());
        values.push(-b2);
    }
    for (i, b2) in values.iter().enumerate() {
        let sign = if i % 4 < 2 { Sign::Plus } else { Sign::Minus };
        let ns = sasaki_einstein_family(&s2, b2, sign).map_err(|e| e.to_string())?;
        let m = metric_closed_form(&ns);
        let gaps = [m.g11.to_f64() - 1.0, m.g33.to_f64() - 1.0, m.g13.to_f64(), m.g23.to_f64()];
        ensure(gaps.iter().all(|x| x.abs() < 1e-9), || format!("b2 = {b2}: metric gaps {gaps:?}"))?;
        let su3 = build_su3(Su3Input::Structure(&ns), Su3Mode::Conical).map_err(|e| e.to_string())?;
        let rep = check_integrable(&su3, &ns.geom);
        ensure(rep.exact && rep.df.is_zero() && rep.dpsi_plus.is_zero() && rep.dpsi_minus.is_zero(), || {
            format!("b2 = {b2}: conical lift {rep:?}")
        })?;
    }
    Ok(format!("{} values of b2, metric (1,1,0,0), conical lift closed exactly", values.len()))
}

fn type2_example() -> Outcome {
    let sqrt2 = Scalar::float(2f64.sqrt());
    let tp = TypeIIParams {
        a0: Scalar::int(2),
        a2: Scalar::int(1),
        a3: Scalar::int(2),
        p: Scalar::int(1),
        b0: -sqrt2.clone(),
        sign_b1: Sign::Plus,
    };
    let (ns, g) = type2_double_hypo(&tp, None, None).map_err(|e| e.to_string())?;
    let close = |x: &Scalar, y: f64| (x.to_f64() - y).abs() < 1e-9;
    let r2 = 2f64.sqrt();
    ensure(close(&g.s_squared().square(), 2.0 / 9.0), || format!("s^4 = {}", g.s_squared().square()))?;
    ensure(close(g.k(), 3.0 * r2), || format!("K = {}", g.k()))?;
    let b_want = [-r2, 1.0, r2 / 2.0, 0.0];
    let c_want = [r2, 1.0, -r2 / 2.0, 0.0];
    for i in 0..4 {
        ensure(close(&ns.b[i], b_want[i]) && close(&ns.c[i], c_want[i]), || format!("b = {:?}, c = {:?}", ns.b, ns.c))?;
    }
    let f = classify(&ns);
    ensure(f.double_hypo && !f.contact_hypo, || format!("flags {f:?}"))?;
    let lhs = d_invariant(&ns.omega(3), &ns.geom);
    let rhs = ns.theta_tilde().wedge(&ns.omega(2)).map_err(|e| e.to_string())?.scale(&Scalar::int(-3));
    ensure(lhs.approx_eq(&rhs, 1e-9), || "dω3 != -3θ̃∧ω2".to_string())?;
    let m = metric_closed_form(&ns);
    let want = [4.0 * r2, 2.0 * r2, 0.0, -2.0 * r2];
    let got = [&m.g11, &m.g33, &m.g13, &m.g23];
    ensure(got.iter().zip(want).all(|(x, y)| close(x, y)), || format!("metric {got:?}"))?;
    Ok("s^4 = 2/9, K = 3√2, b, c, flags, dω3 = -3θ̃∧ω2, metric (4√2,2√2,0,-2√2)".into())
}

fn flat_evolution() -> Outcome {
    let z = Scalar::zero;
    let init = FlatInit {
        p: Scalar::ratio(1, 2),
        a4: z(),
        b0: Scalar::int(-1),
        c0: z(),
        b4: z(),
        c4: z(),
        b5: z(),
        c5: z(),
        s2: Scalar::one(),
    };
    let st = flat_solution(&init).map_err(|e| e.to_string())?;
    let t = Poly::t;
    ensure(st.a3 == t(), || format!("A3 = {}", st.a3))?;
    let b_want =
        [Poly::constant(Scalar::int(-1)), Poly::zero(), Poly::new(vec![Scalar::zero(), Scalar::zero(), Scalar::one()])];
    let c_want = [Poly::zero(), t(), Poly::zero()];
    ensure(st.b == b_want && st.c == c_want, || format!("B = {:?}, C = {:?}", st.b, st.c))?;
    for r in st.residual().to_array() {
        ensure(r.is_zero() && r.is_exact(), || format!("residual {r}"))?;
    }
    let su3 = build_su3(Su3Input::Family(&st), Su3Mode::General).map_err(|e| e.to_string())?;
    let rep = check_integrable(&su3, &st.geom);
    ensure(rep.exact && rep.df.is_zero() && rep.dpsi_plus.is_zero() && rep.dpsi_minus.is_zero(), || {
        format!("{rep:?}")
    })?;
    Ok("(ω1,ω2,ω3) = (t dθ, t^2 α2 - α0, t α1), zero residual, dF = dΨ± = 0 exactly".into())
}

fn oracle_ok(rep: &OracleReport) -> Result<(), String> {
    ensure(rep.max_residual < 1e-8, || format!("max residual {:e}", rep.max_residual))?;
    ensure(rep.ad_vs_fd < 1e-6, || format!("AD vs FD {:e}", rep.ad_vs_fd))?;
    ensure(rep.chart_independence < 1e-8, || format!("chart independence {:e}", rep.chart_independence))
}

fn oracle_equivalence() -> Outcome {
    let sys = verify_flat_system(100, 7).map_err(|e| e.to_string())?;
    oracle_ok(&sys)?;
    let su3 = verify_flat_su3(100, 7).map_err(|e| e.to_string())?;
    oracle_ok(&su3)?;
    Ok(format!(
        "system {:.1e}/{:.1e}/{:.1e}, su3 {:.1e}/{:.1e}/{:.1e} (residual/AD-FD/charts)",
        sys.max_residual, sys.ad_vs_fd, sys.chart_independence, su3.max_residual, su3.ad_vs_fd, su3.chart_independence
    ))
}

fn numeric_integrator() -> Outcome {
    // flat case against the closed form
    let one = Scalar::one;
    let init = FlatInit {
        p: Scalar::ratio(1, 2),
        a4: one(),
        b0: -one(),
        c0: Scalar::zero(),
        b4: Scalar::zero(),
        c4: one(),
        b5: one(),
        c5: Scalar::zero(),
        s2: one(),
    };
    let st = flat_solution(&init).map_err(|e| e.to_string())?;
    let start = st.sample_at(0.0);
    let traj = integrate_numeric(&start, &|_| 0.5, &st.geom, 1.0, 1e-3).map_err(|e| e.to_string())?;
    let mut flat_err: f64 = 0.0;
    for pt in &traj.points {
        let e = st.sample_at(pt.sample.t);
        flat_err = flat_err.max((pt.sample.a3 - e.a3).abs());
        for i in 0..3 {
            flat_err = flat_err.max((pt.sample.b[i] - e.b[i]).abs()).max((pt.sample.c[i] - e.c[i]).abs());
        }
    }
    ensure(flat_err < 1e-8, || format!("flat error {flat_err:e}"))?;
    ensure((traj.points.last().map(|p| p.sample.t).unwrap_or(0.0) - 1.0).abs() < 1e-12, || {
        "did not reach t = 1".into()
    })?;

    // K > 0, constant P: B1 and C1 solve x'' = ω^2 x with ω = sqrt(K)/(|P| s)
    let mut cosh_err: f64 = 0.0;
    let s2 = Scalar::ratio(1, 3);
    let mut starts: Vec<NaturalStructure> = [Scalar::zero(), Scalar::ratio(1, 2), Scalar::ratio(-4, 5)]
        .iter()
        .map(|b2| sasaki_einstein_family(&s2, b2, Sign::Plus).expect("in range"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in [Scalar::ratio(1, 2), Scalar::int(2)] {
        let tp = random_type1_point(&mut rng, false);
        let ns = type1_from_parameters(&tp, &geom(k, Scalar::ratio(3, 4))).map_err(|e| e.to_string())?;
        if metric_closed_form(&ns).pd_flag {
            starts.push(ns);
        }
    }
    for ns in &starts {
        let s0 = EvolutionSample::from_structure(ns, 0.0);
        let (k, s2) = (ns.geom.k().to_f64(), ns.geom.s_squared().to_f64());
        let p = s0.p;
        let traj = integrate_numeric(&s0, &move |_| p, &ns.geom, 1.0, 1e-3).map_err(|e| e.to_string())?;
        let w = k.sqrt() / (p.abs() * s2.sqrt());
        // x(0) and x'(0): P B1' = (C0 - s^2 K C2)/(2s^2), P C1' = (s^2 K B2 - B0)/(2s^2)
        let db1 = (s0.c[0] - s2 * k * s0.c[2]) / (2.0 * s2 * p);
        let dc1 = (s2 * k * s0.b[2] - s0.b[0]) / (2.0 * s2 * p);
        let (c_inv, b_inv) = (s0.c[0] + s2 * k * s0.c[2], s0.b[0] + s2 * k * s0.b[2]);
        for pt in &traj.points {
            let (t, s) = (pt.sample.t, &pt.sample);
            let b1 = s0.b[1] * (w * t).cosh() + db1 / w * (w * t).sinh();
            let c1 = s0.c[1] * (w * t).cosh() + dc1 / w * (w * t).sinh();
            let errs = [
                s.b[1] - b1,
                s.c[1] - c1,
                s.c[0] + s2 * k * s.c[2] - c_inv,
                s.b[0] + s2 * k * s.b[2] - b_inv,
                s.a3 - (s0.a3 + 2.0 * p * t),
            ];
            cosh_err = errs.iter().fold(cosh_err, |m, e| m.max(e.abs()));
        }
    }
    ensure(cosh_err < 1e-7, || format!("cosh/sinh error {cosh_err:e}"))?;
    Ok(format!("flat error {flat_err:.1e}; {} K>0 runs vs cosh/sinh, error {cosh_err:.1e}", starts.len()))
}

fn negative_guards() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_sphere-su2");
    let cases: [(&[&str], &str); 4] = [
        (&["solve-type1", "--X", "1", "--Y", "0", "--A", "0", "--B", "-1", "--K", "1", "--s", "1"], LABEL_B_POSITIVE),
        (&["solve-se", "--s2", "1/3", "--b2", "3/2"], LABEL_SE_RANGE),
        (&["solve-type2", "--a0", "2", "--a2", "1", "--a3", "-2", "--p", "1", "--b0", "1"], LABEL_A3P_POSITIVE),
        (&["solve-type2", "--a0", "0", "--a2", "1", "--a3", "1", "--p", "1", "--b0", "1"], LABEL_TYPE2_K_NONZERO),
    ];
    for (args, label) in cases {
        let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        let code = out.status.code();
        ensure(code == Some(2), || format!("{args:?}: exit {code:?}"))?;
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        let got = report["violation"]["label"].as_str().unwrap_or_default();
        ensure(got == label, || format!("{args:?}: label {got:?}, expected {label:?}"))?;
    }
    Ok("B<=0, |b2|>1/(3s^2), a3p<=0 and K=0 type II each exit 2 with their label".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("metric: contraction vs closed form", metric_consistency),
        ("main example", main_example),
        ("flat double-hypo example", flat_double_hypo),
        ("type I determinant", type1_determinant),
        ("Sasaki-Einstein family", sasaki_einstein_family_metric),
        ("type II example", type2_example),
        ("flat evolution", flat_evolution),
        ("oracle equivalence", oracle_equivalence),
        ("numeric integrator", numeric_integrator),
        ("negative guards", negative_guards),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
