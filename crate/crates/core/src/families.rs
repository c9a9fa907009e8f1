//! Solution families: the type I parametrization, type I nearly-hypo
//! (double-hypo) structures, the Sasaki-Einstein family, type II
//! double-hypo structures, and checkers for the named polynomial systems.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::KForm;
use crate::frames::{expand_invariant, FramesError, GeometryParams};
use crate::scalar::{Scalar, DEFAULT_TOL};
use crate::su2core::{quad_norm, quad_pair, NaturalStructure, Quad, Su2Error};

pub const LABEL_B_POSITIVE: &str = "B>0";
pub const LABEL_TYPE1_SURFACE: &str = "B^2(1+A^2)^2(X^2+Y^2)=1";
pub const LABEL_TYPE1_NORM: &str = "b1^2-b0b2=1";
pub const LABEL_TYPE1_NORM_C: &str = "c1^2-c0c2=1";
pub const LABEL_TYPE1_ORTH: &str = "b0c2+b2c0-2b1c1=0";
pub const LABEL_TYPE1_ORIENT: &str = "b1c0-b0c1>0";
pub const LABEL_NH_CURVATURE: &str = "(b0+s^2Kb2)^2+4s^2K=36s^4";
pub const LABEL_NH_LOWER_K: &str = "K>-b0^2/(s^2(1+b1^2))";
pub const LABEL_SE_RANGE: &str = "|b2|<=1/(3s^2)";
pub const LABEL_A2_NONZERO: &str = "a2!=0";
pub const LABEL_P_NONZERO: &str = "p!=0";
pub const LABEL_TYPE2_K_NONZERO: &str = "type II hypo requires K!=0";
pub const LABEL_A0A2_POSITIVE: &str = "a0a2>0";
pub const LABEL_A3P_POSITIVE: &str = "a3p>0";
pub const LABEL_TYPE2_NU: &str = "a3^2-a0a2=a3p";
pub const LABEL_TYPE2_B1: &str = "b1^2=a3p-a2b0^2/a0>=0";
pub const LABEL_TYPE2_S: &str = "s^4=a0/(9a2p^2)";
pub const LABEL_TYPE2_K: &str = "K=9s^2p^2";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("constraint {label} violated: {detail}")]
    Constraint { label: String, detail: String },
    #[error(transparent)]
    Frames(#[from] FramesError),
    #[error(transparent)]
    Su2(#[from] Su2Error),
}

impl FamilyError {
    pub fn label(&self) -> Option<&str> {
        match self {
            FamilyError::Constraint { label, .. } => Some(label),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, FamilyError>;

fn violated(label: &str, detail: impl Into<String>) -> FamilyError {
    FamilyError::Constraint { label: label.to_string(), detail: detail.into() }
}

fn require(ok: bool, label: &str, detail: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(violated(label, detail()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn apply(self, x: Scalar) -> Scalar {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }
}

impl FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Sign::Plus),
            "-" | "-1" | "minus" => Ok(Sign::Minus),
            other => Err(format!("sign must be + or -, got {other:?}")),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

fn z4() -> Scalar {
    Scalar::zero()
}

fn dtheta_quad() -> Quad {
    [z4(), z4(), z4(), Scalar::one()]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeIParams {
    #[serde(rename = "X")]
    pub x: Scalar,
    #[serde(rename = "Y")]
    pub y: Scalar,
    #[serde(rename = "A")]
    pub a: Scalar,
    #[serde(rename = "B")]
    pub b: Scalar,
}

/// Type I structure (ω1 = dθ, p = 1) from a point of the surface
/// `B^2 (1+A^2)^2 (X^2+Y^2) = 1`, `B > 0`.
pub fn type1_from_parameters(tp: &TypeIParams, geom: &GeometryParams) -> Result<NaturalStructure> {
    type1_from_parameters_tol(tp, geom, DEFAULT_TOL)
}

pub fn type1_from_parameters_tol(tp: &TypeIParams, geom: &GeometryParams, tol: f64) -> Result<NaturalStructure> {
    let (x, y, a, b) = (&tp.x, &tp.y, &tp.a, &tp.b);
    require(b.is_positive_tol(0.0), LABEL_B_POSITIVE, || format!("B = {b}"))?;
    let one = Scalar::one();
    let opa2 = &one + a.square();
    let surface = b.square() * opa2.square() * (x.square() + y.square());
    require(surface.approx_eq(&one, tol), LABEL_TYPE1_SURFACE, || format!("left side = {surface}"))?;

    let omb = &one - a.square();
    let b2 = b.square();
    let two = Scalar::int(2);
    let bq = [&omb * &b2 * x + &two * a * &b2 * y, &opa2 * b * (y - a * x), -(opa2.square() * x), z4()];
    let cq = [&omb * &b2 * y - &two * a * &b2 * x, -(&opa2 * b * (x + a * y)), -(opa2.square() * y), z4()];
    let ns = NaturalStructure::new(one.clone(), dtheta_quad(), bq, cq, geom.clone())?;
    check_type1_system(&ns, tol)?;
    Ok(ns)
}

/// The type I algebraic system on (b, c) with b3 = c3 = 0.
pub fn check_type1_system(ns: &NaturalStructure, tol: f64) -> Result<()> {
    let (b, c) = (&ns.b, &ns.c);
    let one = Scalar::one();
    let nb = quad_norm(b);
    require(nb.approx_eq(&one, tol), LABEL_TYPE1_NORM, || format!("b1^2-b0b2 = {nb}"))?;
    let nc = quad_norm(c);
    require(nc.approx_eq(&one, tol), LABEL_TYPE1_NORM_C, || format!("c1^2-c0c2 = {nc}"))?;
    let orth = quad_pair(b, c);
    require(orth.is_zero_tol(tol), LABEL_TYPE1_ORTH, || format!("value = {orth}"))?;
    let orient = &b[1] * &c[0] - &b[0] * &c[1];
    require(orient.is_positive_tol(tol), LABEL_TYPE1_ORIENT, || format!("b1c0-b0c1 = {orient}"))?;
    Ok(())
}

/// Type I nearly-hypo structure with ω2 = b0 α0 + b1 α1 + b2 α2 and
/// `ω3 = (K b1/3) α0 + ((s^2 K b2 - b0)/(6 s^2)) α1 - (b1/(3 s^2)) α2`.
pub fn type1_nearly_hypo(b0: &Scalar, b1: &Scalar, b2: &Scalar, geom: &GeometryParams) -> Result<NaturalStructure> {
    type1_nearly_hypo_tol(b0, b1, b2, geom, DEFAULT_TOL)
}

pub fn type1_nearly_hypo_tol(
    b0: &Scalar,
    b1: &Scalar,
    b2: &Scalar,
    geom: &GeometryParams,
    tol: f64,
) -> Result<NaturalStructure> {
    let (k, s2) = (geom.k(), geom.s_squared());
    let one = Scalar::one();
    let norm = b1.square() - b0 * b2;
    require(norm.approx_eq(&one, tol), LABEL_TYPE1_NORM, || format!("b1^2-b0b2 = {norm}"))?;
    let lhs = (b0 + s2 * k * b2).square() + Scalar::int(4) * s2 * k;
    let rhs = Scalar::int(36) * s2.square();
    require(lhs.approx_eq(&rhs, tol), LABEL_NH_CURVATURE, || format!("left side = {lhs}, right side = {rhs}"))?;
    // equivalent to positivity of the metric
    let bound = -(b0.square() / (s2 * (&one + b1.square())));
    require(k > &bound && !(k - &bound).is_zero_tol(tol), LABEL_NH_LOWER_K, || format!("K = {k}, bound = {bound}"))?;

    let three = Scalar::int(3);
    let cq = [k * b1 / &three, (s2 * k * b2 - b0) / (Scalar::int(6) * s2), -(b1 / (&three * s2)), z4()];
    let bq = [b0.clone(), b1.clone(), b2.clone(), z4()];
    let ns = NaturalStructure::new(one, dtheta_quad(), bq, cq, geom.clone())?;
    check_type1_system(&ns, tol)?;
    Ok(ns)
}

/// Sasaki-Einstein family at K = 9 s^2 with `Q = sign sqrt(1 - 9 s^4 b2^2)`:
/// ω2 = -9 s^4 b2 α0 + Q α1 + b2 α2, ω3 = 3 s^2 Q α0 + 3 s^2 b2 α1 - Q/(3 s^2) α2.
pub fn sasaki_einstein_family(s2: &Scalar, b2: &Scalar, sign_q: Sign) -> Result<NaturalStructure> {
    let k = Scalar::int(9) * s2;
    let geom = GeometryParams::from_s_squared(k, s2.clone())?;
    let s4 = s2.square();
    let disc = Scalar::one() - Scalar::int(9) * &s4 * b2.square();
    let q = match disc.sqrt() {
        Some(q) => sign_q.apply(q),
        None if disc.is_zero_tol(DEFAULT_TOL) => Scalar::zero(),
        None => {
            return Err(violated(
                LABEL_SE_RANGE,
                format!("b2 = {b2}, 1/(3s^2) = {}", (Scalar::int(3) * s2).recip().expect("s^2 > 0")),
            ))
        }
    };
    let three_s2 = Scalar::int(3) * s2;
    let bq = [-(Scalar::int(9) * &s4 * b2), q.clone(), b2.clone(), z4()];
    let cq = [&three_s2 * &q, &three_s2 * b2, -(&q / &three_s2), z4()];
    Ok(NaturalStructure::new(Scalar::one(), dtheta_quad(), bq, cq, geom)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeIIParams {
    pub a0: Scalar,
    pub a2: Scalar,
    pub a3: Scalar,
    pub p: Scalar,
    pub b0: Scalar,
    pub sign_b1: Sign,
}

/// Type II double-hypo structure. s and K are derived
/// (`s^4 = a0/(9 a2 p^2)`, `K = a0/(a2 s^2) = 9 s^2 p^2`); optional
/// user-supplied values are cross-checked.
pub fn type2_double_hypo(
    tp: &TypeIIParams,
    s_given: Option<&Scalar>,
    k_given: Option<&Scalar>,
) -> Result<(NaturalStructure, GeometryParams)> {
    type2_double_hypo_tol(tp, s_given, k_given, DEFAULT_TOL)
}

pub fn type2_double_hypo_tol(
    tp: &TypeIIParams,
    s_given: Option<&Scalar>,
    k_given: Option<&Scalar>,
    tol: f64,
) -> Result<(NaturalStructure, GeometryParams)> {
    let TypeIIParams { a0, a2, a3, p, b0, sign_b1 } = tp;
    require(!a2.is_zero_tol(tol), LABEL_A2_NONZERO, || "a2 = 0".to_string())?;
    require(!p.is_zero_tol(tol), LABEL_P_NONZERO, || "p = 0".to_string())?;
    let k_zero = "K = 0 admits no type II hypo structures (b0 = c0 = 0 forces b1 c1 = 0 against b1^2 = c1^2 != 0)";
    require(!a0.is_zero_tol(tol), LABEL_TYPE2_K_NONZERO, || format!("a0 = 0 forces K = a0/(a2 s^2) = 0; {k_zero}"))?;
    if let Some(k) = k_given {
        require(!k.is_zero_tol(tol), LABEL_TYPE2_K_NONZERO, || format!("K = 0 given; {k_zero}"))?;
    }
    let a0a2 = a0 * a2;
    require(a0a2.is_positive_tol(tol), LABEL_A0A2_POSITIVE, || format!("a0a2 = {a0a2}"))?;
    let a3p = a3 * p;
    require(a3p.is_positive_tol(tol), LABEL_A3P_POSITIVE, || format!("a3p = {a3p}"))?;
    let nu = a3.square() - &a0a2;
    require(nu.approx_eq(&a3p, tol), LABEL_TYPE2_NU, || format!("a3^2-a0a2 = {nu}, a3p = {a3p}"))?;
    let b1_sq = &a3p - a2 * b0.square() / a0;
    let b1 = match b1_sq.sqrt() {
        Some(r) => sign_b1.apply(r),
        None if b1_sq.is_zero_tol(tol) => Scalar::zero(),
        None => return Err(violated(LABEL_TYPE2_B1, format!("a3p-a2b0^2/a0 = {b1_sq}"))),
    };

    let s4 = a0 / (Scalar::int(9) * a2 * p.square());
    let s2 = s4.sqrt().expect("a0a2 > 0 gives s^4 > 0");
    let k = a0 / (a2 * &s2);
    if let Some(s) = s_given {
        let s4_given = s.square().square();
        require(s.is_positive_tol(tol) && s4_given.approx_eq(&s4, tol), LABEL_TYPE2_S, || {
            format!("given s = {s}, derived s^4 = {s4}")
        })?;
    }
    if let Some(kg) = k_given {
        require(kg.approx_eq(&k, tol), LABEL_TYPE2_K, || format!("given K = {kg}, derived K = {k}"))?;
    }
    let geom = GeometryParams::from_s_squared(k.clone(), s2.clone())?;

    let b2 = -(a2 * b0 / a0);
    let three = Scalar::int(3);
    let cq = [
        &k * &b1 / (&three * p),
        (&s2 * &k * &b2 - b0) / (Scalar::int(6) * &s2 * p),
        -(&b1 / (&three * &s2 * p)),
        z4(),
    ];
    let aq = [a0.clone(), z4(), a2.clone(), a3.clone()];
    let bq = [b0.clone(), b1, b2, z4()];
    let ns = NaturalStructure::new(p.clone(), aq, bq, cq, geom.clone())?;
    Ok((ns, geom))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemEquation {
    pub label: String,
    pub residual: Scalar,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedSystemsReport {
    /// The five-equation system characterizing natural nearly-hypo
    /// structures with b3 = c3 = 0 and ω3 determined by ω2.
    pub nearly_hypo_general: Vec<SystemEquation>,
    pub nearly_hypo_holds: bool,
    /// `ω2 ∧ ω3 = 0`, evaluated whenever the five equations hold.
    pub wedge23_auto: Option<bool>,
    /// The type II hypo system.
    pub type2_hypo: Vec<SystemEquation>,
    pub type2_hypo_holds: bool,
}

fn equation(label: &str, residual: Scalar, tol: f64) -> SystemEquation {
    let holds = residual.is_zero_tol(tol);
    SystemEquation { label: label.to_string(), residual, holds }
}

pub fn verify_named_systems(ns: &NaturalStructure) -> NamedSystemsReport {
    verify_named_systems_tol(ns, DEFAULT_TOL)
}

pub fn verify_named_systems_tol(ns: &NaturalStructure, tol: f64) -> NamedSystemsReport {
    let (a, b, c) = (&ns.a, &ns.b, &ns.c);
    let (k, s2, p) = (ns.geom.k(), ns.geom.s_squared(), &ns.p);
    let a3p = &a[3] * p;
    let s4 = s2.square();
    let two = Scalar::int(2);
    let general = vec![
        equation("a1^2+a3^2-a0a2=a3p", quad_norm(a) - &a3p, tol),
        equation("b1^2+b3^2-b0b2=a3p", quad_norm(b) - &a3p, tol),
        equation(
            "b0^2-2s^2Kb0b2+s^4K^2b2^2+4s^2Kb1^2=36s^4a3p^3",
            b[0].square() - &two * s2 * k * &b[0] * &b[2]
                + &s4 * k.square() * b[2].square()
                + Scalar::int(4) * s2 * k * b[1].square()
                - Scalar::int(36) * &s4 * &a[3] * p.powi(3),
            tol,
        ),
        equation("a0b2+a2b0-2a1b1-2a3b3=0", quad_pair(a, b), tol),
        equation(
            "a0b1-s^2Ka2b1+s^2Ka1b2-a1b0=0",
            &a[0] * &b[1] - s2 * k * &a[2] * &b[1] + s2 * k * &a[1] * &b[2] - &a[1] * &b[0],
            tol,
        ),
    ];
    let nearly_hypo_holds = general.iter().all(|e| e.holds);
    let wedge23_auto = nearly_hypo_holds.then(|| {
        let w = |i| -> KForm { expand_invariant(&ns.omega(i), &ns.geom).expect("constant") };
        w(2).wedge(&w(3)).expect("same dim").max_abs().is_zero_tol(tol)
    });

    let nu_a = a[3].square() - &a[0] * &a[2];
    let type2 = vec![
        equation("b1^2-b0b2=a3^2-a0a2", b[1].square() - &b[0] * &b[2] - &nu_a, tol),
        equation("c1^2-c0c2=a3^2-a0a2", c[1].square() - &c[0] * &c[2] - &nu_a, tol),
        SystemEquation { label: "a3^2-a0a2!=0".to_string(), residual: nu_a.clone(), holds: !nu_a.is_zero_tol(tol) },
        equation("b0a2+b2a0=0", &b[0] * &a[2] + &b[2] * &a[0], tol),
        equation("c0a2+c2a0=0", &c[0] * &a[2] + &c[2] * &a[0], tol),
        equation("b0c2+b2c0-2b1c1=0", &b[0] * &c[2] + &b[2] * &c[0] - &two * &b[1] * &c[1], tol),
    ];
    let type2_hypo_holds = type2.iter().all(|e| e.holds);
    NamedSystemsReport {
        nearly_hypo_general: general,
        nearly_hypo_holds,
        wedge23_auto,
        type2_hypo: type2,
        type2_hypo_holds,
    }
}
