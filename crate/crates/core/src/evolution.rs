//! Hypo evolution flow for type I families, the closed-form flat
//! solution, fixed-step RK4 integration, and the induced SU(3)-structure
//! on the product with the real line.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::{d_extended, Core, FramesError, GeometryParams, InvariantForm, Monomial};
use crate::poly::Poly;
use crate::scalar::{Scalar, DEFAULT_TOL};
use crate::su2core::NaturalStructure;

pub const LABEL_FLAT_NORM: &str = "b0^2+c0^2=16p^4s^4";
pub const LABEL_FLAT_ORIENT: &str = "b4c0-b0c4=4p^2s^2a4";
pub const LABEL_FLAT_B: &str = "b4^2-b0b5=a4^2";
pub const LABEL_FLAT_C: &str = "c4^2-c0c5=a4^2";
pub const LABEL_FLAT_ORTH: &str = "b0c5+b5c0-2b4c4=0";
pub const LABEL_CONICAL_K: &str = "K=9s^2";
pub const LABEL_MANIFOLD_B: &str = "B1^2-B0B2=A3^2";
pub const LABEL_MANIFOLD_C: &str = "C1^2-C0C2=A3^2";
pub const LABEL_MANIFOLD_ORTH: &str = "B0C2+B2C0-2B1C1=0";
pub const LABEL_MANIFOLD_A3: &str = "A3>0";
pub const LABEL_MANIFOLD_ORIENT: &str = "B1C0-B0C1>0";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("constraint {label} violated: {detail}")]
    Constraint { label: String, detail: String },
    #[error("A3 crossed zero near t = {t} (A3 = {a3}); the structure degenerates")]
    A3Crossing { t: f64, a3: f64 },
    #[error("P vanishes at t = {0}")]
    PVanishes(f64),
    #[error("{0}")]
    Mode(String),
    #[error("step must be positive and finite (got {0})")]
    BadStep(f64),
    #[error(transparent)]
    Frames(#[from] FramesError),
    #[error("csv export failed: {0}")]
    Csv(String),
}

impl EvolutionError {
    pub fn label(&self) -> Option<&str> {
        match self {
            EvolutionError::Constraint { label, .. } => Some(label),
            EvolutionError::A3Crossing { .. } => Some(LABEL_MANIFOLD_A3),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, EvolutionError>;

fn violated(label: &str, detail: impl Into<String>) -> EvolutionError {
    EvolutionError::Constraint { label: label.to_string(), detail: detail.into() }
}

/// One value per equation of the flow, in the order
/// (A3, P C0, P C1, P C2, P B0, P B1, P B2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhsRecord<T> {
    pub a3: T,
    pub pc0: T,
    pub pc1: T,
    pub pc2: T,
    pub pb0: T,
    pub pb1: T,
    pub pb2: T,
}

impl<T> RhsRecord<T> {
    pub fn to_array(self) -> [T; 7] {
        [self.a3, self.pc0, self.pc1, self.pc2, self.pb0, self.pb1, self.pb2]
    }
}

/// Coefficient ring of the flow: floats for numeric samples, polynomials
/// in t for closed-form families (division only by constants).
trait FlowCoeff: Sized {
    fn plus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn times_int(&self, c: i64) -> Self;
    fn over(&self, o: &Self) -> Self;
}

impl FlowCoeff for f64 {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn times_int(&self, c: i64) -> Self {
        self * c as f64
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
}

impl FlowCoeff for Poly {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn times_int(&self, c: i64) -> Self {
        self.scale(&Scalar::int(c))
    }
    fn over(&self, o: &Self) -> Self {
        self.scale(&o.coeff(0).recip().expect("nonzero constant divisor"))
    }
}

/// Right-hand sides of
/// ∂A3 = 2P, ∂(PC0) = K B1, ∂(PC1) = (s^2 K B2 - B0)/(2s^2), ∂(PC2) = -B1/s^2,
/// ∂(PB0) = -K C1, ∂(PB1) = -(s^2 K C2 - C0)/(2s^2), ∂(PB2) = C1/s^2.
fn rhs_generic<T: FlowCoeff>(p: &T, b: &[T; 3], c: &[T; 3], k: &T, s2: &T) -> RhsRecord<T> {
    let two_s2 = s2.times_int(2);
    let s2k = s2.times(k);
    RhsRecord {
        a3: p.times_int(2),
        pc0: k.times(&b[1]),
        pc1: s2k.times(&b[2]).plus(&b[0].times_int(-1)).over(&two_s2),
        pc2: b[1].over(s2).times_int(-1),
        pb0: k.times(&c[1]).times_int(-1),
        pb1: s2k.times(&c[2]).plus(&c[0].times_int(-1)).over(&two_s2).times_int(-1),
        pb2: c[1].over(s2),
    }
}

/// A single numeric sample of the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSample {
    pub t: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "A3")]
    pub a3: f64,
    /// (B0, B1, B2)
    #[serde(rename = "B")]
    pub b: [f64; 3],
    /// (C0, C1, C2)
    #[serde(rename = "C")]
    pub c: [f64; 3],
}

impl EvolutionSample {
    /// Initial data from a type I structure (ω1 = a3 dθ, b3 = c3 = 0).
    pub fn from_structure(ns: &NaturalStructure, t: f64) -> Self {
        let f = |x: &Scalar| x.to_f64();
        EvolutionSample {
            t,
            p: f(&ns.p),
            a3: f(&ns.a[3]),
            b: [f(&ns.b[0]), f(&ns.b[1]), f(&ns.b[2])],
            c: [f(&ns.c[0]), f(&ns.c[1]), f(&ns.c[2])],
        }
    }

    /// Constraint-manifold residuals
    /// (B1^2-B0B2-A3^2, C1^2-C0C2-A3^2, B0C2+B2C0-2B1C1).
    pub fn constraint_residuals(&self) -> [f64; 3] {
        let (b, c, a2) = (&self.b, &self.c, self.a3 * self.a3);
        [b[1] * b[1] - b[0] * b[2] - a2, c[1] * c[1] - c[0] * c[2] - a2, b[0] * c[2] + b[2] * c[0] - 2.0 * b[1] * c[1]]
    }

    pub fn orientation(&self) -> f64 {
        self.b[1] * self.c[0] - self.b[0] * self.c[1]
    }
}

/// Numeric right-hand side at one sample.
pub fn evolution_rhs(state: &EvolutionSample, geom: &GeometryParams) -> RhsRecord<f64> {
    let (k, s2) = (geom.k().to_f64(), geom.s_squared().to_f64());
    rhs_generic(&state.p, &state.b, &state.c, &k, &s2)
}

/// The family with polynomial coefficients in t.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionState {
    #[serde(rename = "P")]
    pub p: Poly,
    #[serde(rename = "A3")]
    pub a3: Poly,
    #[serde(rename = "B")]
    pub b: [Poly; 3],
    #[serde(rename = "C")]
    pub c: [Poly; 3],
    pub geom: GeometryParams,
    pub init: Option<FlatInit>,
}

impl EvolutionState {
    /// Exact right-hand sides of the flow.
    pub fn rhs(&self) -> RhsRecord<Poly> {
        let k = Poly::constant(self.geom.k().clone());
        let s2 = Poly::constant(self.geom.s_squared().clone());
        rhs_generic(&self.p, &self.b, &self.c, &k, &s2)
    }

    /// `d/dt(lhs) - rhs` for each equation.
    pub fn residual(&self) -> RhsRecord<Poly> {
        let lhs = RhsRecord {
            a3: self.a3.derivative(),
            pc0: (&self.p * &self.c[0]).derivative(),
            pc1: (&self.p * &self.c[1]).derivative(),
            pc2: (&self.p * &self.c[2]).derivative(),
            pb0: (&self.p * &self.b[0]).derivative(),
            pb1: (&self.p * &self.b[1]).derivative(),
            pb2: (&self.p * &self.b[2]).derivative(),
        };
        let rhs = self.rhs();
        RhsRecord {
            a3: &lhs.a3 - &rhs.a3,
            pc0: &lhs.pc0 - &rhs.pc0,
            pc1: &lhs.pc1 - &rhs.pc1,
            pc2: &lhs.pc2 - &rhs.pc2,
            pb0: &lhs.pb0 - &rhs.pb0,
            pb1: &lhs.pb1 - &rhs.pb1,
            pb2: &lhs.pb2 - &rhs.pb2,
        }
    }

    /// Constraint-manifold identities as polynomials in t.
    pub fn constraint_polys(&self) -> [Poly; 3] {
        let (b, c) = (&self.b, &self.c);
        let a2 = &self.a3 * &self.a3;
        let two = Scalar::int(2);
        [
            &(&(&b[1] * &b[1]) - &(&b[0] * &b[2])) - &a2,
            &(&(&c[1] * &c[1]) - &(&c[0] * &c[2])) - &a2,
            &(&(&b[0] * &c[2]) + &(&b[2] * &c[0])) - &(&b[1] * &c[1]).scale(&two),
        ]
    }

    /// The SU(2)-structure at time t.
    pub fn structure_at(&self, t: &Scalar) -> NaturalStructure {
        let z = Scalar::zero;
        NaturalStructure {
            p: self.p.eval(t),
            a: [z(), z(), z(), self.a3.eval(t)],
            b: [self.b[0].eval(t), self.b[1].eval(t), self.b[2].eval(t), z()],
            c: [self.c[0].eval(t), self.c[1].eval(t), self.c[2].eval(t), z()],
            geom: self.geom.clone(),
        }
    }

    pub fn sample_at(&self, t: f64) -> EvolutionSample {
        EvolutionSample {
            t,
            p: self.p.eval_f64(t),
            a3: self.a3.eval_f64(t),
            b: [self.b[0].eval_f64(t), self.b[1].eval_f64(t), self.b[2].eval_f64(t)],
            c: [self.c[0].eval_f64(t), self.c[1].eval_f64(t), self.c[2].eval_f64(t)],
        }
    }

    /// ω1, ω2, ω3 as 6-dim invariant forms with polynomial coefficients.
    pub fn omegas(&self) -> [InvariantForm; 3] {
        let z = Poly::zero;
        [
            InvariantForm::from_q_poly(6, &[z(), z(), z(), self.a3.clone()]),
            InvariantForm::from_q_poly(6, &[self.b[0].clone(), self.b[1].clone(), self.b[2].clone(), z()]),
            InvariantForm::from_q_poly(6, &[self.c[0].clone(), self.c[1].clone(), self.c[2].clone(), z()]),
        ]
    }

    /// θ̃ = -2Pθ.
    pub fn theta_tilde(&self) -> InvariantForm {
        InvariantForm::theta(6).scale_poly(&self.p.scale(&Scalar::int(-2)))
    }
}

/// Initial constants of the flat closed-form solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatInit {
    pub p: Scalar,
    pub a4: Scalar,
    pub b0: Scalar,
    pub c0: Scalar,
    pub b4: Scalar,
    pub c4: Scalar,
    pub b5: Scalar,
    pub c5: Scalar,
    pub s2: Scalar,
}

impl FlatInit {
    /// Checks the constraint block on the constants.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let FlatInit { p, a4, b0, c0, b4, c4, b5, c5, s2 } = self;
        let req = |ok: bool, label: &str, detail: String| if ok { Ok(()) } else { Err(violated(label, detail)) };
        req(!p.is_zero_tol(tol), "p!=0", "p = 0".into())?;
        req(s2.is_positive_tol(0.0), "s>0", format!("s^2 = {s2}"))?;
        let p2s2 = p.square() * s2;
        let lhs = b0.square() + c0.square();
        let rhs = Scalar::int(16) * p2s2.square();
        req(
            lhs.approx_eq(&rhs, tol),
            LABEL_FLAT_NORM,
            format!("norm constraint: b0^2+c0^2 = {lhs}, 16p^4s^4 = {rhs}"),
        )?;
        let lhs = b4 * c0 - b0 * c4;
        let rhs = Scalar::int(4) * &p2s2 * a4;
        req(lhs.approx_eq(&rhs, tol), LABEL_FLAT_ORIENT, format!("b4c0-b0c4 = {lhs}, 4p^2s^2a4 = {rhs}"))?;
        let a4sq = a4.square();
        let lb = b4.square() - b0 * b5;
        req(lb.approx_eq(&a4sq, tol), LABEL_FLAT_B, format!("b4^2-b0b5 = {lb}, a4^2 = {a4sq}"))?;
        let lc = c4.square() - c0 * c5;
        req(lc.approx_eq(&a4sq, tol), LABEL_FLAT_C, format!("c4^2-c0c5 = {lc}, a4^2 = {a4sq}"))?;
        let o = b0 * c5 + b5 * c0 - Scalar::int(2) * b4 * c4;
        req(o.is_zero_tol(tol), LABEL_FLAT_ORTH, format!("value = {o}"))?;
        Ok(())
    }
}

/// Closed-form flat (K = 0) solution with constant P = p:
/// A3 = 2pt + a4, B0 = b0, C0 = c0, B1 = c0 t/(2ps^2) + b4,
/// C1 = -b0 t/(2ps^2) + c4, B2 = -b0 t^2/(4p^2s^4) + c4 t/(ps^2) + b5,
/// C2 = -c0 t^2/(4p^2s^4) - b4 t/(ps^2) + c5.
pub fn flat_solution(init: &FlatInit) -> Result<EvolutionState> {
    flat_solution_tol(init, DEFAULT_TOL)
}

pub fn flat_solution_tol(init: &FlatInit, tol: f64) -> Result<EvolutionState> {
    init.validate(tol)?;
    let FlatInit { p, a4, b0, c0, b4, c4, b5, c5, s2 } = init;
    let geom = GeometryParams::from_s_squared(Scalar::zero(), s2.clone())?;
    let ps2 = p * s2;
    let two = Scalar::int(2);
    let quad = (two.clone() * &ps2).square();
    let poly = |c: Vec<Scalar>| Poly::new(c);
    let state = EvolutionState {
        p: Poly::constant(p.clone()),
        a3: poly(vec![a4.clone(), &two * p]),
        b: [
            Poly::constant(b0.clone()),
            poly(vec![b4.clone(), c0 / (&two * &ps2)]),
            poly(vec![b5.clone(), c4 / &ps2, -(b0 / &quad)]),
        ],
        c: [
            Poly::constant(c0.clone()),
            poly(vec![c4.clone(), -(b0 / (&two * &ps2))]),
            poly(vec![c5.clone(), -(b4 / &ps2), -(c0 / &quad)]),
        ],
        geom,
        init: Some(init.clone()),
    };
    Ok(state)
}

/// F, Ψ+ and Ψ- on the product with the real line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SU3Structure {
    #[serde(rename = "F")]
    pub f: InvariantForm,
    pub psi_plus: InvariantForm,
    pub psi_minus: InvariantForm,
}

impl SU3Structure {
    /// Coefficient of θ∧e1234∧dt in F∧F∧F, and the largest coefficient of
    /// Ψ+∧F and Ψ-∧F.
    pub fn algebraic_check(&self) -> (Poly, Scalar) {
        let f3 = self.f.wedge(&self.f).and_then(|x| x.wedge(&self.f)).expect("same dim");
        let top = f3.coeff(Monomial::new(true, Core::Vol4, true));
        let r1 = self.psi_plus.wedge(&self.f).expect("same dim").max_abs_coeff();
        let r2 = self.psi_minus.wedge(&self.f).expect("same dim").max_abs_coeff();
        (top, if r1 > r2 { r1 } else { r2 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Su3Mode {
    General,
    Conical,
}

pub enum Su3Input<'a> {
    Family(&'a EvolutionState),
    Structure(&'a NaturalStructure),
}

/// General mode takes a polynomial family: F = ω1 + θ̃∧dt,
/// Ψ+ = ω2∧θ̃ - ω3∧dt, Ψ- = ω3∧θ̃ + ω2∧dt. Conical mode takes a
/// structure with K = 9s^2: F = t^2 ω1 + t θ̃∧dt, Ψ+ = t^3 ω2∧θ̃ - t^2 ω3∧dt,
/// Ψ- = t^3 ω3∧θ̃ + t^2 ω2∧dt.
pub fn build_su3(input: Su3Input<'_>, mode: Su3Mode) -> Result<SU3Structure> {
    match (input, mode) {
        (Su3Input::Family(st), Su3Mode::General) => {
            let [w1, w2, w3] = st.omegas();
            Ok(assemble(&w1, &w2, &w3, &st.theta_tilde(), [0, 0, 0, 0]))
        }
        (Su3Input::Structure(ns), Su3Mode::Conical) => {
            let g = &ns.geom;
            let want = Scalar::int(9) * g.s_squared();
            if !g.k().approx_eq(&want, DEFAULT_TOL) {
                return Err(violated(LABEL_CONICAL_K, format!("K = {}, 9s^2 = {want}", g.k())));
            }
            Ok(conical_su3_unchecked(ns))
        }
        (Su3Input::Family(_), Su3Mode::Conical) => {
            Err(EvolutionError::Mode("conical mode needs a Sasaki-Einstein structure, not a family".into()))
        }
        (Su3Input::Structure(_), Su3Mode::General) => {
            Err(EvolutionError::Mode("general mode needs a polynomial family".into()))
        }
    }
}

/// The conical formulas without the K = 9s^2 guard, for diagnosing
/// structures that are not Sasaki-Einstein.
pub fn conical_su3_unchecked(ns: &NaturalStructure) -> SU3Structure {
    let lift = |f: InvariantForm| f.lift6();
    let (w1, w2, w3) = (lift(ns.omega(1)), lift(ns.omega(2)), lift(ns.omega(3)));
    assemble(&w1, &w2, &w3, &lift(ns.theta_tilde()), [2, 1, 3, 2])
}

/// Powers of t: [ω1 in F, θ̃∧dt in F, ∧θ̃ terms in Ψ, ∧dt terms in Ψ].
fn assemble(
    w1: &InvariantForm,
    w2: &InvariantForm,
    w3: &InvariantForm,
    th: &InvariantForm,
    pw: [usize; 4],
) -> SU3Structure {
    let tp = |k: usize| {
        let mut c = vec![Scalar::zero(); k + 1];
        c[k] = Scalar::one();
        Poly::new(c)
    };
    let dt = InvariantForm::dt();
    let wedge = |a: &InvariantForm, b: &InvariantForm| a.wedge(b).expect("same dim");
    let th_dt = wedge(th, &dt);
    let f = w1.scale_poly(&tp(pw[0])).add(&th_dt.scale_poly(&tp(pw[1]))).expect("grade 2");
    let psi_plus = wedge(w2, th).scale_poly(&tp(pw[2])).sub(&wedge(w3, &dt).scale_poly(&tp(pw[3]))).expect("grade 3");
    let psi_minus = wedge(w3, th).scale_poly(&tp(pw[2])).add(&wedge(w2, &dt).scale_poly(&tp(pw[3]))).expect("grade 3");
    SU3Structure { f, psi_plus, psi_minus }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    #[serde(rename = "dF")]
    pub df: Scalar,
    pub dpsi_plus: Scalar,
    pub dpsi_minus: Scalar,
    pub exact: bool,
    pub integrable: bool,
}

pub fn check_integrable(su3: &SU3Structure, geom: &GeometryParams) -> IntegrabilityReport {
    check_integrable_tol(su3, geom, DEFAULT_TOL)
}

pub fn check_integrable_tol(su3: &SU3Structure, geom: &GeometryParams, tol: f64) -> IntegrabilityReport {
    let r = |f: &InvariantForm| d_extended(f, geom).max_abs_coeff();
    let (df, dpsi_plus, dpsi_minus) = (r(&su3.f), r(&su3.psi_plus), r(&su3.psi_minus));
    let exact = su3.f.is_exact() && su3.psi_plus.is_exact() && su3.psi_minus.is_exact();
    let integrable = [&df, &dpsi_plus, &dpsi_minus].iter().all(|x| x.is_zero_tol(tol));
    IntegrabilityReport { df, dpsi_plus, dpsi_minus, exact, integrable }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    #[serde(flatten)]
    pub sample: EvolutionSample,
    pub residuals: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Largest absolute constraint residual along the trajectory.
    pub max_drift: f64,
    pub step: f64,
}

/// Checks that a sample lies on the constraint manifold.
pub fn check_manifold(s: &EvolutionSample, tol: f64) -> Result<()> {
    let r = s.constraint_residuals();
    for (label, v) in [LABEL_MANIFOLD_B, LABEL_MANIFOLD_C, LABEL_MANIFOLD_ORTH].into_iter().zip(r) {
        if v.abs() > tol {
            return Err(violated(label, format!("residual {v:e} at t = {}", s.t)));
        }
    }
    if s.a3 <= 0.0 {
        return Err(violated(LABEL_MANIFOLD_A3, format!("A3 = {} at t = {}", s.a3, s.t)));
    }
    let o = s.orientation();
    if o <= 0.0 {
        return Err(violated(LABEL_MANIFOLD_ORIENT, format!("B1C0-B0C1 = {o} at t = {}", s.t)));
    }
    Ok(())
}

/// Classical fixed-step RK4 on (A3, PB0..PB2, PC0..PC2) with P(t) given.
/// `t_end < init.t` integrates backwards.
pub fn integrate_numeric(
    init: &EvolutionSample,
    p_of_t: &dyn Fn(f64) -> f64,
    geom: &GeometryParams,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    integrate_numeric_tol(init, p_of_t, geom, t_end, step, 1e-9)
}

pub fn integrate_numeric_tol(
    init: &EvolutionSample,
    p_of_t: &dyn Fn(f64) -> f64,
    geom: &GeometryParams,
    t_end: f64,
    step: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(EvolutionError::BadStep(step));
    }
    let mut start = init.clone();
    start.p = p_of_t(init.t);
    check_manifold(&start, tol)?;

    let span = t_end - init.t;
    let n = (span.abs() / step).round().max(if span == 0.0 { 0.0 } else { 1.0 }) as usize;
    let h = if n == 0 { 0.0 } else { span / n as f64 };

    let (k, s2) = (geom.k().to_f64(), geom.s_squared().to_f64());
    let to_y = |s: &EvolutionSample| -> [f64; 7] {
        [s.a3, s.p * s.c[0], s.p * s.c[1], s.p * s.c[2], s.p * s.b[0], s.p * s.b[1], s.p * s.b[2]]
    };
    let from_y = |t: f64, y: &[f64; 7]| -> Result<EvolutionSample> {
        let p = p_of_t(t);
        if p.abs() < 1e-300 {
            return Err(EvolutionError::PVanishes(t));
        }
        Ok(EvolutionSample { t, p, a3: y[0], b: [y[4] / p, y[5] / p, y[6] / p], c: [y[1] / p, y[2] / p, y[3] / p] })
    };
    let f = |t: f64, y: &[f64; 7]| -> Result<[f64; 7]> {
        let s = from_y(t, y)?;
        let r = rhs_generic(&s.p, &s.b, &s.c, &k, &s2);
        Ok(r.to_array())
    };
    let axpy = |y: &[f64; 7], a: f64, d: &[f64; 7]| -> [f64; 7] { std::array::from_fn(|i| y[i] + a * d[i]) };

    let point = |s: EvolutionSample| {
        let residuals = s.constraint_residuals();
        TrajectoryPoint { sample: s, residuals }
    };
    let mut points = vec![point(start.clone())];
    let mut y = to_y(&start);
    let mut t = start.t;
    for i in 0..n {
        let k1 = f(t, &y)?;
        let k2 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k1))?;
        let k3 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k2))?;
        let k4 = f(t + h, &axpy(&y, h, &k3))?;
        y = std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        t = start.t + (i + 1) as f64 * h;
        if y[0] <= 0.0 {
            return Err(EvolutionError::A3Crossing { t, a3: y[0] });
        }
        points.push(point(from_y(t, &y)?));
    }
    let max_drift = points.iter().flat_map(|p| p.residuals.iter().map(|r| r.abs())).fold(0.0, f64::max);
    Ok(Trajectory { points, max_drift, step: h })
}

/// CSV with columns t, P, A3, B0, B1, B2, C0, C1, C2 and the three
/// constraint residuals.
pub fn write_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| EvolutionError::Csv(e.to_string());
    w.write_record(["t", "P", "A3", "B0", "B1", "B2", "C0", "C1", "C2", "res_B", "res_C", "res_BC"]).map_err(err)?;
    for p in &traj.points {
        let s = &p.sample;
        let row = [
            s.t,
            s.p,
            s.a3,
            s.b[0],
            s.b[1],
            s.b[2],
            s.c[0],
            s.c[1],
            s.c[2],
            p.residuals[0],
            p.residuals[1],
            p.residuals[2],
        ];
        w.write_record(row.iter().map(|x| format!("{x:e}"))).map_err(err)?;
    }
    w.flush().map_err(|e| EvolutionError::Csv(e.to_string()))?;
    Ok(())
}
