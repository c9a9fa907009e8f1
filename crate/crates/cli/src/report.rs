//! Command dispatch and report assembly.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sphere_su2::classify::{classify_tol, curvature_guards_tol, ClassificationFlags, EQ_D_OMEGA3};
use sphere_su2::evolution::{
    build_su3, check_integrable_tol, flat_solution_tol, integrate_numeric_tol, write_csv, EvolutionError,
    EvolutionSample, EvolutionState, FlatInit, IntegrabilityReport, Su3Input, Su3Mode, Trajectory,
};
use sphere_su2::families::{
    sasaki_einstein_family, type1_from_parameters_tol, type1_nearly_hypo_tol, type2_double_hypo_tol,
    verify_named_systems_tol, FamilyError, Sign, TypeIIParams, TypeIParams, LABEL_P_NONZERO,
};
use sphere_su2::frames::FramesError;
use sphere_su2::oracle::{verify_flat_su3, verify_flat_system, OracleReport};
use sphere_su2::su2core::{
    check_su2_tol, metric_closed_form_tol, metric_contraction_matrix, phi_matrices, preservation_flags_tol,
    type2_metric_prediction, MetricReport, Su2Error, LABEL_NU_NONZERO, LABEL_PD_DET,
};
use sphere_su2::{GeometryParams, NaturalStructure, Scalar, DEFAULT_TOL};

use crate::config::{Command, RunConfig};
use crate::{CliError, EXIT_OK, EXIT_VIOLATION};

pub const LABEL_RADIUS: &str = "s>0";
pub const LABEL_ORACLE: &str = "oracle residual < tol";
const ORACLE_TOL: f64 = 1e-8;
const ORACLE_SAMPLES: usize = 100;

/// One labelled check in a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub residual: Value,
    pub holds: bool,
}

impl Check {
    fn new(label: &str, residual: impl Serialize, holds: bool) -> Self {
        Check { label: label.to_string(), residual: to_json(&residual), holds }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

/// What a handler produced: a result body, labelled checks and, when a
/// constraint failed, the violated label.
struct Handled {
    result: Value,
    checks: Vec<Check>,
    violation: Option<(String, String)>,
}

enum Fail {
    Violation { label: String, detail: String },
    Cli(CliError),
}

impl From<CliError> for Fail {
    fn from(e: CliError) -> Self {
        Fail::Cli(e)
    }
}

impl From<FramesError> for Fail {
    fn from(e: FramesError) -> Self {
        match e {
            FramesError::BadRadius(_) => violation(LABEL_RADIUS, e.to_string()),
            other => Fail::Cli(CliError::Internal(other.to_string())),
        }
    }
}

impl From<Su2Error> for Fail {
    fn from(e: Su2Error) -> Self {
        let label = match e {
            Su2Error::ZeroP => LABEL_P_NONZERO,
            Su2Error::ZeroNu => LABEL_NU_NONZERO,
            Su2Error::NotPositive => LABEL_PD_DET,
            _ => return Fail::Cli(CliError::Internal(e.to_string())),
        };
        violation(label, e.to_string())
    }
}

impl From<FamilyError> for Fail {
    fn from(e: FamilyError) -> Self {
        match e {
            FamilyError::Constraint { label, detail } => Fail::Violation { label, detail },
            FamilyError::Frames(f) => f.into(),
            FamilyError::Su2(s) => s.into(),
        }
    }
}

impl From<EvolutionError> for Fail {
    fn from(e: EvolutionError) -> Self {
        if let Some(label) = e.label() {
            return violation(label, e.to_string());
        }
        match e {
            EvolutionError::PVanishes(_) => violation("P!=0", e.to_string()),
            EvolutionError::BadStep(_) => Fail::Cli(CliError::Config(e.to_string())),
            EvolutionError::Frames(f) => f.into(),
            other => Fail::Cli(CliError::Internal(other.to_string())),
        }
    }
}

fn violation(label: &str, detail: impl Into<String>) -> Fail {
    Fail::Violation { label: label.to_string(), detail: detail.into() }
}

fn to_json(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn need<T: Clone>(v: &Option<T>, name: &str, cmd: Command) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::Config(format!("{cmd} needs {name}")))
}

/// s^2 from whichever of s, s2 was given.
fn s_squared(cfg: &RunConfig, cmd: Command) -> Result<Scalar, Fail> {
    match (&cfg.s, &cfg.s2) {
        (Some(s), None) => {
            if !s.is_positive() {
                return Err(violation(LABEL_RADIUS, format!("s = {s}")));
            }
            Ok(s.square())
        }
        (None, Some(s2)) => Ok(s2.clone()),
        _ => Err(CliError::Config(format!("{cmd} needs s or s2")).into()),
    }
}

fn geometry(cfg: &RunConfig, cmd: Command) -> Result<GeometryParams, Fail> {
    let k = need(&cfg.k, "K", cmd)?;
    Ok(GeometryParams::from_s_squared(k, s_squared(cfg, cmd)?)?)
}

/// Flags, metric, curvature notes and named systems of a structure.
fn describe(ns: &NaturalStructure, tol: f64) -> (Map<String, Value>, ClassificationFlags, MetricReport) {
    let flags = classify_tol(ns, tol);
    let metric = metric_closed_form_tol(ns, tol);
    let mut m = Map::new();
    m.insert("structure".into(), to_json(ns));
    m.insert("s^4".into(), to_json(&ns.geom.s_squared().square()));
    m.insert("su2".into(), to_json(&check_su2_tol(ns, tol)));
    m.insert("flags".into(), to_json(&flags));
    m.insert("metric".into(), to_json(&metric));
    m.insert("curvature_guards".into(), to_json(&curvature_guards_tol(ns, tol)));
    m.insert("named_systems".into(), to_json(&verify_named_systems_tol(ns, tol)));
    (m, flags, metric)
}

fn structure_checks(
    ns: &NaturalStructure,
    flags: &ClassificationFlags,
    tol: f64,
) -> (Vec<Check>, Option<(String, String)>) {
    let su2 = check_su2_tol(ns, tol);
    let mut checks: Vec<Check> = su2.violations.iter().map(|v| Check::new(&v.label, &v.value, false)).collect();
    checks.extend(flags.equations.iter().map(|e| Check::new(&e.label, &e.residual, e.holds)));
    let violation = su2.violations.first().map(|v| (v.label.clone(), format!("residual {}", v.value)));
    (checks, violation)
}

fn classify_cmd(cfg: &RunConfig, cmd: Command, tol: f64) -> Result<Handled, Fail> {
    let geom = geometry(cfg, cmd)?;
    let [a, b, c] = [(&cfg.a, "a"), (&cfg.b, "b"), (&cfg.c, "c")].map(|(q, n)| need(q, n, cmd));
    let ns = NaturalStructure::new(need(&cfg.p, "p", cmd)?, a?.0, b?.0, c?.0, geom)?;
    let (result, flags, _) = describe(&ns, tol);
    let (checks, violation) = structure_checks(&ns, &flags, tol);
    Ok(Handled { result: Value::Object(result), checks, violation })
}

fn metric_cmd(cfg: &RunConfig, cmd: Command, tol: f64) -> Result<Handled, Fail> {
    let geom = geometry(cfg, cmd)?;
    let [a, b, c] = [(&cfg.a, "a"), (&cfg.b, "b"), (&cfg.c, "c")].map(|(q, n)| need(q, n, cmd));
    let ns = NaturalStructure::new(need(&cfg.p, "p", cmd)?, a?.0, b?.0, c?.0, geom)?;
    let su2 = check_su2_tol(&ns, tol);
    let metric = metric_closed_form_tol(&ns, tol);
    let mut result = Map::new();
    result.insert("structure".into(), to_json(&ns));
    result.insert("su2".into(), to_json(&su2));
    result.insert("metric".into(), to_json(&metric));
    result.insert("preservation".into(), to_json(&preservation_flags_tol(&ns, tol)));
    let mut checks: Vec<Check> = su2.violations.iter().map(|v| Check::new(&v.label, &v.value, false)).collect();
    if let Some(v) = su2.violations.first() {
        return Ok(Handled {
            result: Value::Object(result),
            checks,
            violation: Some((v.label.clone(), format!("residual {}", v.value))),
        });
    }
    let contraction = metric_contraction_matrix(&ns)?;
    let g = metric.metric.clone().ok_or(Su2Error::ZeroNu)?;
    let gap = contraction.sub(&g).max_abs();
    checks.push(Check::new("contraction metric = closed form / nu", &gap, gap.is_zero_tol(tol)));
    let det_gap = (&metric.det_matrix - &metric.det_g).abs();
    checks.push(Check::new("det G = minor^2", &det_gap, metric.det_matrix.approx_eq(&metric.det_g, tol)));
    result.insert("contraction_matrix".into(), to_json(&contraction));
    result.insert("phi".into(), to_json(&phi_matrices(&ns)?));
    Ok(Handled { result: Value::Object(result), checks, violation: None })
}

fn solved(ns: &NaturalStructure, tol: f64, extra: Vec<Check>) -> Handled {
    let (result, flags, _) = describe(ns, tol);
    let (mut checks, violation) = structure_checks(ns, &flags, tol);
    checks.extend(extra);
    Handled { result: Value::Object(result), checks, violation }
}

fn type1_cmd(cfg: &RunConfig, cmd: Command, tol: f64) -> Result<Handled, Fail> {
    let geom = geometry(cfg, cmd)?;
    let tp = TypeIParams {
        x: need(&cfg.x_param, "X", cmd)?,
        y: need(&cfg.y_param, "Y", cmd)?,
        a: need(&cfg.a_param, "A", cmd)?,
        b: need(&cfg.b_param, "B", cmd)?,
    };
    let ns = type1_from_parameters_tol(&tp, &geom, tol)?;
    let det = metric_closed_form_tol(&ns, tol).det_matrix;
    let one = (&det - &Scalar::one()).abs();
    Ok(solved(&ns, tol, vec![Check::new("det G=1", &one, one.is_zero_tol(tol))]))
}

fn type1_nh_cmd(cfg: &RunConfig, cmd: Command, tol: f64) -> Result<Handled, Fail> {
    let geom = geometry(cfg, cmd)?;
    let [b0, b1, b2] = [(&cfg.b0, "b0"), (&cfg.b1, "b1"), (&cfg.b2, "b2")].map(|(v, n)| need(v, n, cmd));
    let ns = type1_nearly_hypo_tol(&b0?, &b1?, &b2?, &geom, tol)?;
    Ok(solved(&ns, tol, Vec::new()))
}

fn integrability_checks(rep: &IntegrabilityReport, tol: f64) -> Vec<Check> {
    vec![
        Check::new("dF=0", &rep.df, rep.df.is_zero_tol(tol)),
        Check::new("dΨ+=0", &rep.dpsi_plus, rep.dpsi_plus.is_zero_tol(tol)),
        Check::new("dΨ-=0", &rep.dpsi_minus, rep.dpsi_minus.is_zero_tol(tol)),
    ]
}

fn se_cmd(cfg: &RunConfig, cmd: Command, tol: f64) -> Result<Handled, Fail> {
    let s2 = s_squared(cfg, cmd)?;
    let b2 = need(&cfg.b2, "b2", cmd)?;
    let ns = sasaki_einstein_family(&s2, &b2, cfg.sign_q.unwrap_or(Sign::Plus))?;
    let su3 = build_su3(Su3Input::Structure(&ns), Su3Mode::Conical)?;
    let rep = check_integrable_tol(&su3, &ns.geom, tol);
    let mut h = solved(&ns, tol, integrability_checks(&rep, tol));
    h.result["conical_su3"] = to_json(&rep);
    Ok(h)
}

fn type2_cmd(cfg: &RunConfig, cmd: Command, tol: f64) -> Result<Handled, Fail> {
    let tp = TypeIIParams {
        a0: need(&cfg.a0, "a0", cmd)?,
        a2: need(&cfg.a2, "a2", cmd)?,
        a3: need(&cfg.a3, "a3", cmd)?,
        p: need(&cfg.p, "p", cmd)?,
        b0: need(&cfg.b0, "b0", cmd)?,
        sign_b1: cfg.sign_b1.unwrap_or(Sign::Plus),
    };
    let s = match (&cfg.s, &cfg.s2) {
        (None, None) => None,
        _ => Some(s_squared(cfg, cmd)?.sqrt().ok_or_else(|| violation(LABEL_RADIUS, "s^2 <= 0"))?),
    };
    let (ns, geom) = type2_double_hypo_tol(&tp, s.as_ref(), cfg.k.as_ref(), tol)?;
    let flags = classify_tol(&ns, tol);
    let eq3 = flags.equations.iter().find(|e| e.label == EQ_D_OMEGA3);
    let mut extra: Vec<Check> = eq3.map(|e| Check::new(&e.label, &e.residual, e.holds)).into_iter().collect();
    let predicted = type2_metric_prediction(&tp.a0, &tp.a2, &tp.a3, geom.s_squared());
    let metric = metric_closed_form_tol(&ns, tol);
    let got = [&metric.g11, &metric.g13, &metric.g23, &metric.g33];
    let gap =
        predicted.iter().zip(got).map(|(p, g)| (p - g).abs()).fold(Scalar::zero(), |m, d| if d > m { d } else { m });
    extra.push(Check::new("metric (g11,g13,g23,g33) = predicted", &gap, gap.is_zero_tol(tol)));
    let mut h = solved(&ns, tol, extra);
    h.result["K"] = to_json(geom.k());
    h.result["s^2"] = to_json(geom.s_squared());
    h.result["predicted_metric"] = to_json(&predicted);
    Ok(h)
}

fn write_trajectory(cfg: &RunConfig, traj: &Trajectory) -> Result<(), Fail> {
    if let Some(path) = &cfg.csv {
        let file = std::fs::File::create(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        write_csv(traj, file)?;
    }
    Ok(())
}

fn trajectory_summary(traj: &Trajectory) -> Value {
    json!({
        "steps": traj.points.len().saturating_sub(1),
        "step": traj.step,
        "max_drift": traj.max_drift,
        "first": traj.points.first(),
        "last": traj.points.last(),
    })
}

fn flat_cmd(cfg: &RunConfig, cmd: Command, tol: f64) -> Result<Handled, Fail> {
    let field = |v: &Option<Scalar>, n: &str| need(v, n, cmd);
    let init = FlatInit {
        p: field(&cfg.p, "p")?,
        a4: field(&cfg.a4, "a4")?,
        b0: field(&cfg.b0, "b0")?,
        c0: field(&cfg.c0, "c0")?,
        b4: field(&cfg.b4, "b4")?,
        c4: field(&cfg.c4, "c4")?,
        b5: field(&cfg.b5, "b5")?,
        c5: field(&cfg.c5, "c5")?,
        s2: s_squared(cfg, cmd)?,
    };
    let st = flat_solution_tol(&init, tol)?;
    let su3 = build_su3(Su3Input::Family(&st), Su3Mode::General)?;
    let rep = check_integrable_tol(&su3, &st.geom, tol);
    let residual = st.residual().to_array();
    let worst = residual.iter().map(|p| p.max_abs_coeff()).fold(Scalar::zero(), |m, d| if d > m { d } else { m });
    let omegas = st.omegas().map(|w| w.to_string());
    let mut checks = vec![Check::new("evolution residual = 0", &worst, worst.is_zero_tol(tol))];
    checks.extend(integrability_checks(&rep, tol));
    let mut result = json!({
        "state": to_json(&st),
        "omegas": omegas,
        "theta_tilde": st.theta_tilde().to_string(),
        "residual": to_json(&residual),
        "su3": to_json(&rep),
    });
    if cfg.t_end.is_some() || cfg.csv.is_some() {
        let traj = numeric_vs_closed(cfg, &st, tol)?;
        let err = closed_form_error(&st, &traj);
        checks.push(Check::new("rk4 = closed form", err, err <= tol.max(1e-8)));
        result["numeric"] = trajectory_summary(&traj);
        result["numeric"]["max_error_vs_closed_form"] = json!(err);
        write_trajectory(cfg, &traj)?;
    }
    Ok(Handled { result, checks, violation: None })
}

fn numeric_vs_closed(cfg: &RunConfig, st: &EvolutionState, tol: f64) -> Result<Trajectory, Fail> {
    let t0 = cfg.t0.unwrap_or(0.0);
    let start = st.sample_at(t0);
    let p = start.p;
    Ok(integrate_numeric_tol(
        &start,
        &move |_| p,
        &st.geom,
        cfg.t_end.unwrap_or(1.0),
        cfg.step.unwrap_or(1e-3),
        tol.max(1e-9),
    )?)
}

/// Largest component gap between a trajectory and the closed form.
pub fn closed_form_error(st: &EvolutionState, traj: &Trajectory) -> f64 {
    let mut worst: f64 = 0.0;
    for pt in &traj.points {
        let e = st.sample_at(pt.sample.t);
        worst = worst.max((pt.sample.a3 - e.a3).abs());
        for i in 0..3 {
            worst = worst.max((pt.sample.b[i] - e.b[i]).abs()).max((pt.sample.c[i] - e.c[i]).abs());
        }
    }
    worst
}

fn numeric_cmd(cfg: &RunConfig, cmd: Command, tol: f64) -> Result<Handled, Fail> {
    let geom = geometry(cfg, cmd)?;
    let f = |v: &Option<Scalar>, n: &str| need(v, n, cmd).map(|x| x.to_f64());
    let p = f(&cfg.p, "p")?;
    let start = EvolutionSample {
        t: cfg.t0.unwrap_or(0.0),
        p,
        a3: f(&cfg.a3, "a3")?,
        b: [f(&cfg.b0, "b0")?, f(&cfg.b1, "b1")?, f(&cfg.b2, "b2")?],
        c: [f(&cfg.c0, "c0")?, f(&cfg.c1, "c1")?, f(&cfg.c2, "c2")?],
    };
    let t_end = need(&cfg.t_end, "t_end", cmd)?;
    let traj = integrate_numeric_tol(&start, &move |_| p, &geom, t_end, cfg.step.unwrap_or(1e-3), tol.max(1e-9))?;
    write_trajectory(cfg, &traj)?;
    let checks = vec![Check::new("constraint drift", traj.max_drift, traj.max_drift <= tol.max(1e-8))];
    Ok(Handled {
        result: json!({ "geometry": to_json(&geom), "trajectory": trajectory_summary(&traj) }),
        checks,
        violation: None,
    })
}

fn oracle_cmd(cfg: &RunConfig, su3: bool, tol: f64) -> Result<Handled, Fail> {
    let samples = cfg.samples.unwrap_or(ORACLE_SAMPLES);
    let seed = cfg.seed.unwrap_or(0);
    let run = if su3 { verify_flat_su3 } else { verify_flat_system };
    let rep: OracleReport = run(samples, seed).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut checks: Vec<Check> = rep.identities.iter().map(|(l, r)| Check::new(l, r, *r < tol)).collect();
    checks.push(Check::new("ad vs finite differences", rep.ad_vs_fd, rep.ad_vs_fd < 1e-6));
    checks.push(Check::new("chart independence", rep.chart_independence, rep.chart_independence < tol));
    checks.push(Check::new("frame vs chart", rep.frame_vs_chart, rep.frame_vs_chart < tol));
    let mut result = json!({ "oracle": to_json(&rep) });
    if su3 {
        // the exact side of the same statement: a closed-form flat family
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
        let st = flat_solution_tol(&init, DEFAULT_TOL)?;
        let lift = build_su3(Su3Input::Family(&st), Su3Mode::General)?;
        let exact = check_integrable_tol(&lift, &st.geom, 0.0);
        checks.push(Check::new("exact flat lift closed", &exact.df, exact.exact && exact.integrable));
        result["exact_flat_lift"] = to_json(&exact);
    }
    let violation = if rep.passes(tol) {
        checks.iter().find(|c| !c.holds).map(|c| (c.label.clone(), format!("residual {}", c.residual)))
    } else {
        let worst = rep.identities.iter().max_by(|a, b| a.1.total_cmp(b.1));
        Some((
            LABEL_ORACLE.to_string(),
            match worst {
                Some((l, r)) => format!("worst identity {l}: {r:e}"),
                None => format!("max residual {:e}", rep.max_residual),
            },
        ))
    };
    Ok(Handled { result, checks, violation })
}

/// Validates `cfg` and runs its command. `Err` means malformed input or an
/// internal failure (exit 1); constraint failures come back as an
/// [`Outcome`] with code 2.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let cmd = cfg.validate()?;
    let tol = cfg.tol.unwrap_or(match cmd {
        Command::VerifyOracle | Command::VerifySu3 => ORACLE_TOL,
        _ => DEFAULT_TOL,
    });
    let handled = match cmd {
        Command::Classify => classify_cmd(cfg, cmd, tol),
        Command::Metric => metric_cmd(cfg, cmd, tol),
        Command::SolveType1 => type1_cmd(cfg, cmd, tol),
        Command::SolveType1Nh => type1_nh_cmd(cfg, cmd, tol),
        Command::SolveSe => se_cmd(cfg, cmd, tol),
        Command::SolveType2 => type2_cmd(cfg, cmd, tol),
        Command::EvolveFlat => flat_cmd(cfg, cmd, tol),
        Command::EvolveNumeric => numeric_cmd(cfg, cmd, tol),
        Command::VerifyOracle => oracle_cmd(cfg, false, tol),
        Command::VerifySu3 => oracle_cmd(cfg, true, tol),
    };
    let (result, checks, violation) = match handled {
        Ok(h) => (h.result, h.checks, h.violation),
        Err(Fail::Violation { label, detail }) => (Value::Null, Vec::new(), Some((label, detail))),
        Err(Fail::Cli(e)) => return Err(e),
    };
    let code = if violation.is_some() { EXIT_VIOLATION } else { EXIT_OK };
    let mut report = json!({
        "command": cmd.name(),
        "status": if violation.is_some() { "violation" } else { "ok" },
        "exit_code": code,
        "tol": tol,
        "input": cfg.to_value(),
        "result": result,
        "checks": checks,
    });
    if let Some((label, detail)) = violation {
        report["violation"] = json!({ "label": label, "detail": detail });
    }
    Ok(Outcome { code, report })
}
