//! Invariant forms on the tangent sphere bundle and their exterior
//! derivative for a constant-curvature base.
//!
//! Every form in the span of θ, α0, α1, α2, dθ (and dt on the product with
//! the real line) is a sum of monomials `θ^ε ∧ core ∧ dt^δ` with `core` one
//! of `1, α0, α1, α2, dθ, e1234`. Coefficients are polynomials in t.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::{ExteriorError, KForm};
use crate::poly::Poly;
use crate::scalar::{Scalar, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FramesError {
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("form lies outside the invariant span (residual {residual})")]
    OutsideSpan { residual: Scalar },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("grade mismatch: {0} vs {1}")]
    GradeMismatch(usize, usize),
    #[error("coefficients depend on t; evaluate at a time first")]
    NonConstant,
    #[error("sphere radius must be positive (got s^2 = {0})")]
    BadRadius(Scalar),
}

pub type Result<T> = std::result::Result<T, FramesError>;

/// Sectional curvature K of the base and radius s of the sphere bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    #[serde(rename = "K")]
    k: Scalar,
    s2: Scalar,
}

impl GeometryParams {
    pub fn new(k: Scalar, s: Scalar) -> Result<Self> {
        if !s.is_positive() {
            return Err(FramesError::BadRadius(s.square()));
        }
        Ok(GeometryParams { k, s2: s.square() })
    }

    pub fn from_s_squared(k: Scalar, s2: Scalar) -> Result<Self> {
        if !s2.is_positive() {
            return Err(FramesError::BadRadius(s2));
        }
        Ok(GeometryParams { k, s2 })
    }

    pub fn k(&self) -> &Scalar {
        &self.k
    }

    pub fn s_squared(&self) -> &Scalar {
        &self.s2
    }

    /// s, exact when s^2 is a rational square.
    pub fn s(&self) -> Scalar {
        self.s2.sqrt().expect("s^2 > 0")
    }

    /// r = 2K.
    pub fn r(&self) -> Scalar {
        &self.k * Scalar::int(2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Theta,
    Alpha0,
    Alpha1,
    Alpha2,
    Dtheta,
    Psi1,
    Psi2,
    Vol4,
    Vol5,
}

impl FromStr for Generator {
    type Err = FramesError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "theta" => Generator::Theta,
            "alpha0" => Generator::Alpha0,
            "alpha1" => Generator::Alpha1,
            "alpha2" => Generator::Alpha2,
            "dtheta" => Generator::Dtheta,
            "psi1" => Generator::Psi1,
            "psi2" => Generator::Psi2,
            "vol4" => Generator::Vol4,
            "vol5" => Generator::Vol5,
            other => return Err(FramesError::UnknownGenerator(other.to_string())),
        })
    }
}

fn e(dim: usize, c: i64, ix: &[usize]) -> KForm {
    KForm::monomial(dim, Scalar::int(c), ix).expect("valid basis monomial")
}

fn sum(forms: &[KForm]) -> KForm {
    forms[1..].iter().fold(forms[0].clone(), |acc, f| acc.add(f).expect("same shape"))
}

/// A named form in the coframe e0..e4.
pub fn generator(g: Generator, geom: &GeometryParams) -> KForm {
    generator_in(g, geom, 5)
}

fn generator_in(g: Generator, geom: &GeometryParams, dim: usize) -> KForm {
    match g {
        Generator::Theta => KForm::monomial(dim, geom.s(), &[0]).expect("valid"),
        Generator::Alpha0 => e(dim, 1, &[1, 2]),
        Generator::Alpha1 => sum(&[e(dim, 1, &[1, 4]), e(dim, -1, &[2, 3])]),
        Generator::Alpha2 => e(dim, 1, &[3, 4]),
        Generator::Dtheta => sum(&[e(dim, 1, &[3, 1]), e(dim, 1, &[4, 2])]),
        Generator::Psi1 => sum(&[e(dim, 1, &[1, 4]), e(dim, 1, &[2, 3])]),
        Generator::Psi2 => sum(&[e(dim, 1, &[3, 1]), e(dim, -1, &[4, 2])]),
        Generator::Vol4 => e(dim, 1, &[1, 2, 3, 4]),
        Generator::Vol5 => e(dim, 1, &[0, 1, 2, 3, 4]),
    }
}

/// The part of a monomial living on the 4-plane ker θ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Core {
    One,
    Alpha0,
    Alpha1,
    Alpha2,
    Dtheta,
    Vol4,
}

impl Core {
    pub const DEG2: [Core; 4] = [Core::Alpha0, Core::Alpha1, Core::Alpha2, Core::Dtheta];

    pub fn degree(self) -> usize {
        match self {
            Core::One => 0,
            Core::Vol4 => 4,
            _ => 2,
        }
    }

    /// `self ∧ other` as a multiple of a core element.
    fn wedge(self, other: Core) -> Option<(i64, Core)> {
        use Core::*;
        match (self, other) {
            (One, x) | (x, One) => Some((1, x)),
            (Alpha0, Alpha2) | (Alpha2, Alpha0) => Some((1, Vol4)),
            (Alpha1, Alpha1) | (Dtheta, Dtheta) => Some((-2, Vol4)),
            _ => None,
        }
    }

    fn kform(self, dim: usize) -> KForm {
        match self {
            Core::One => KForm::constant(dim, Scalar::one()).expect("valid"),
            Core::Alpha0 => e(dim, 1, &[1, 2]),
            Core::Alpha1 => sum(&[e(dim, 1, &[1, 4]), e(dim, -1, &[2, 3])]),
            Core::Alpha2 => e(dim, 1, &[3, 4]),
            Core::Dtheta => sum(&[e(dim, 1, &[3, 1]), e(dim, 1, &[4, 2])]),
            Core::Vol4 => e(dim, 1, &[1, 2, 3, 4]),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Core::One => "1",
            Core::Alpha0 => "α0",
            Core::Alpha1 => "α1",
            Core::Alpha2 => "α2",
            Core::Dtheta => "dθ",
            Core::Vol4 => "e1234",
        }
    }
}

/// `θ^theta ∧ core ∧ dt^dt` in this canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub theta: bool,
    pub core: Core,
    pub dt: bool,
}

impl Monomial {
    pub const fn new(theta: bool, core: Core, dt: bool) -> Self {
        Monomial { theta, core, dt }
    }

    pub fn degree(self) -> usize {
        self.theta as usize + self.core.degree() + self.dt as usize
    }

    /// `self ∧ other` as a signed monomial.
    fn wedge(self, other: Monomial) -> Option<(i64, Monomial)> {
        if (self.theta && other.theta) || (self.dt && other.dt) {
            return None;
        }
        let (c, core) = self.core.wedge(other.core)?;
        // Moving other's θ past self's dt costs a sign; cores are even.
        let sign = if other.theta && self.dt { -1 } else { 1 };
        Some((sign * c, Monomial::new(self.theta || other.theta, core, self.dt || other.dt)))
    }

    /// All monomials of the given degree that exist in dimension `dim`.
    pub fn all(dim: usize, degree: usize) -> Vec<Monomial> {
        let mut out = Vec::new();
        let cores = [Core::One, Core::Alpha0, Core::Alpha1, Core::Alpha2, Core::Dtheta, Core::Vol4];
        for theta in [false, true] {
            for core in cores {
                for dt in [false, true] {
                    if dt && dim < 6 {
                        continue;
                    }
                    let m = Monomial::new(theta, core, dt);
                    if m.degree() == degree {
                        out.push(m);
                    }
                }
            }
        }
        out
    }

    fn kform(self, dim: usize, geom: &GeometryParams) -> KForm {
        let mut f = self.core.kform(dim);
        if self.theta {
            f = generator_in(Generator::Theta, geom, dim).wedge(&f).expect("same dim");
        }
        if self.dt {
            f = f.wedge(&e(dim, 1, &[5])).expect("same dim");
        }
        f
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.theta {
            parts.push("θ");
        }
        if self.core != Core::One || (!self.theta && !self.dt) {
            parts.push(self.core.name());
        }
        if self.dt {
            parts.push("dt");
        }
        write!(f, "{}", parts.join("∧"))
    }
}

/// Homogeneous form in the invariant span, coefficients polynomial in t.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantForm {
    dim: usize,
    grade: usize,
    terms: BTreeMap<Monomial, Poly>,
}

impl InvariantForm {
    pub fn zero(dim: usize, grade: usize) -> Self {
        assert!(dim == 5 || dim == 6, "dimension must be 5 or 6");
        InvariantForm { dim, grade, terms: BTreeMap::new() }
    }

    pub fn term(dim: usize, m: Monomial, c: Poly) -> Self {
        let mut f = InvariantForm::zero(dim, m.degree());
        f.add_term(m, c);
        f
    }

    pub fn constant(dim: usize, c: Poly) -> Self {
        Self::term(dim, Monomial::new(false, Core::One, false), c)
    }

    pub fn theta(dim: usize) -> Self {
        Self::term(dim, Monomial::new(true, Core::One, false), Poly::constant(Scalar::one()))
    }

    pub fn dt() -> Self {
        Self::term(6, Monomial::new(false, Core::One, true), Poly::constant(Scalar::one()))
    }

    pub fn core(dim: usize, core: Core) -> Self {
        Self::term(dim, Monomial::new(false, core, false), Poly::constant(Scalar::one()))
    }

    /// `q0 α0 + q1 α1 + q2 α2 + q3 dθ`.
    pub fn from_q(dim: usize, q: &[Scalar; 4]) -> Self {
        Self::from_q_poly(dim, &q.clone().map(Poly::constant))
    }

    pub fn from_q_poly(dim: usize, q: &[Poly; 4]) -> Self {
        let mut f = InvariantForm::zero(dim, 2);
        for (core, c) in Core::DEG2.iter().zip(q) {
            f.add_term(Monomial::new(false, *core, false), c.clone());
        }
        f
    }

    fn add_term(&mut self, m: Monomial, c: Poly) {
        let entry = self.terms.entry(m).or_default();
        *entry = &*entry + &c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Poly> {
        &self.terms
    }

    pub fn coeff(&self, m: Monomial) -> Poly {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Poly::is_exact)
    }

    /// Largest absolute coefficient over all monomials and powers of t.
    pub fn max_abs_coeff(&self) -> Scalar {
        self.terms.values().map(Poly::max_abs_coeff).fold(Scalar::zero(), |m, c| if c > m { c } else { m })
    }

    /// The same form on the 6-dim coframe.
    pub fn lift6(&self) -> InvariantForm {
        InvariantForm { dim: 6, grade: self.grade, terms: self.terms.clone() }
    }

    pub fn scale(&self, c: &Scalar) -> InvariantForm {
        self.scale_poly(&Poly::constant(c.clone()))
    }

    pub fn scale_poly(&self, c: &Poly) -> InvariantForm {
        let mut out = InvariantForm::zero(self.dim, self.grade);
        for (m, p) in &self.terms {
            out.add_term(*m, p * c);
        }
        out
    }

    pub fn neg(&self) -> InvariantForm {
        self.scale(&Scalar::int(-1))
    }

    fn check_same(&self, other: &InvariantForm) -> Result<()> {
        if self.dim != other.dim {
            return Err(FramesError::DimMismatch(self.dim, other.dim));
        }
        if self.grade != other.grade && !self.is_zero() && !other.is_zero() {
            return Err(FramesError::GradeMismatch(self.grade, other.grade));
        }
        Ok(())
    }

    pub fn add(&self, other: &InvariantForm) -> Result<InvariantForm> {
        self.check_same(other)?;
        let grade = if self.is_zero() { other.grade } else { self.grade };
        let mut out = InvariantForm { dim: self.dim, grade, terms: self.terms.clone() };
        for (m, p) in &other.terms {
            out.add_term(*m, p.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &InvariantForm) -> Result<InvariantForm> {
        self.add(&other.neg())
    }

    pub fn wedge(&self, other: &InvariantForm) -> Result<InvariantForm> {
        if self.dim != other.dim {
            return Err(FramesError::DimMismatch(self.dim, other.dim));
        }
        let mut out = InvariantForm::zero(self.dim, self.grade + other.grade);
        for (ma, pa) in &self.terms {
            for (mb, pb) in &other.terms {
                if let Some((sign, m)) = ma.wedge(*mb) {
                    out.add_term(m, (pa * pb).scale(&Scalar::int(sign)));
                }
            }
        }
        Ok(out)
    }

    /// Coefficients evaluated at time `t`.
    pub fn at(&self, t: &Scalar) -> InvariantForm {
        let mut out = InvariantForm::zero(self.dim, self.grade);
        for (m, p) in &self.terms {
            out.add_term(*m, Poly::constant(p.eval(t)));
        }
        out
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &InvariantForm) -> Result<Scalar> {
        Ok(self.sub(other)?.max_abs_coeff())
    }

    pub fn approx_eq(&self, other: &InvariantForm, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d.is_zero_tol(tol)).unwrap_or(false)
    }
}

impl PartialEq for InvariantForm {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, DEFAULT_TOL)
    }
}

impl fmt::Display for InvariantForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, p)| match (p.coeffs().len(), m.degree()) {
                (_, 0) => format!("({p})"),
                (1, _) if p.coeff(0) == Scalar::one() => m.to_string(),
                _ => format!("({p})*{m}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// d of a single monomial on the sphere bundle (coefficient held constant).
fn d_monomial(m: Monomial, geom: &GeometryParams) -> Vec<(Scalar, Monomial)> {
    let inv_s2 = geom.s_squared().recip().expect("s^2 > 0");
    let k = geom.k().clone();
    let out: Vec<(Scalar, Monomial)> = if m.theta {
        // d(θ ∧ c) = dθ ∧ c - θ ∧ dc, and θ ∧ dc = 0 since dc ∈ θ ∧ (...)
        match Core::Dtheta.wedge(m.core) {
            Some((c, core)) => vec![(Scalar::int(c), Monomial::new(false, core, false))],
            None => vec![],
        }
    } else {
        let th = |core| Monomial::new(true, core, false);
        match m.core {
            Core::One | Core::Dtheta | Core::Vol4 => vec![],
            Core::Alpha0 => vec![(inv_s2, th(Core::Alpha1))],
            Core::Alpha1 => {
                vec![(&inv_s2 * Scalar::int(2), th(Core::Alpha2)), (-(&k * Scalar::int(2)), th(Core::Alpha0))]
            }
            Core::Alpha2 => vec![(-k, th(Core::Alpha1))],
        }
    };
    // d(X ∧ dt) = dX ∧ dt
    out.into_iter().map(|(c, mm)| (c, Monomial::new(mm.theta, mm.core, m.dt))).collect()
}

/// Exterior derivative along the sphere bundle, coefficients treated as
/// constants.
pub fn d_invariant(w: &InvariantForm, geom: &GeometryParams) -> InvariantForm {
    let mut out = InvariantForm::zero(w.dim, w.grade + 1);
    for (m, p) in &w.terms {
        for (c, dm) in d_monomial(*m, geom) {
            out.add_term(dm, p.scale(&c));
        }
    }
    out
}

/// Exterior derivative on the product with the real line:
/// `d = d_S + dt ∧ ∂_t`. A 5-dim input is lifted first.
pub fn d_extended(w: &InvariantForm, geom: &GeometryParams) -> InvariantForm {
    let w = if w.dim == 5 { w.lift6() } else { w.clone() };
    let mut out = d_invariant(&w, geom);
    for (m, p) in &w.terms {
        if m.dt {
            continue;
        }
        // dt ∧ θ^a ∧ c = (-1)^a θ^a ∧ c ∧ dt
        let sign = if m.theta { -1 } else { 1 };
        out.add_term(Monomial::new(m.theta, m.core, true), p.derivative().scale(&Scalar::int(sign)));
    }
    out
}

/// Expand a form with constant coefficients into the e-basis.
pub fn expand_invariant(w: &InvariantForm, geom: &GeometryParams) -> Result<KForm> {
    let mut out = KForm::zero(w.dim, w.grade)?;
    for (m, p) in &w.terms {
        if p.degree().unwrap_or(0) > 0 {
            return Err(FramesError::NonConstant);
        }
        out = out.add(&m.kform(w.dim, geom).scale(&p.coeff(0)))?;
    }
    Ok(out)
}

/// Expand at a fixed time.
pub fn expand_at(w: &InvariantForm, geom: &GeometryParams, t: &Scalar) -> Result<KForm> {
    expand_invariant(&w.at(t), geom)
}

fn dot(a: &KForm, b: &KForm) -> Scalar {
    a.terms().iter().map(|(mi, c)| c * b.terms().get(mi).cloned().unwrap_or_default()).sum()
}

/// Inverse of [`expand_invariant`] on the invariant span. Fails with the
/// max-coefficient residual when `f` has a component outside the span.
pub fn project_invariant(f: &KForm, geom: &GeometryParams) -> Result<InvariantForm> {
    let mut out = InvariantForm::zero(f.dim(), f.grade());
    // The monomial expansions have pairwise disjoint supports.
    for m in Monomial::all(f.dim(), f.grade()) {
        let basis = m.kform(f.dim(), geom);
        let c = dot(f, &basis) / dot(&basis, &basis);
        out.add_term(m, Poly::constant(c));
    }
    let residual = f.sub(&expand_invariant(&out, geom)?)?.max_abs();
    if residual.is_zero() {
        Ok(out)
    } else {
        Err(FramesError::OutsideSpan { residual })
    }
}
