//! Natural SU(2)-structures: validity, induced metric (closed form and
//! contraction route), the endomorphisms Φ1, Φ2, Φ3 and preservation of the
//! horizontal/vertical planes.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::{ExteriorError, FrameVector, KForm};
use crate::frames::{expand_invariant, GeometryParams, InvariantForm};
use crate::scalar::{Scalar, DEFAULT_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Su2Error {
    #[error("p must be nonzero")]
    ZeroP,
    #[error("vector has a nonzero e0 component; only ker θ is allowed")]
    NotHorizontal,
    #[error("nu = a1^2+a3^2-a0a2 vanishes")]
    ZeroNu,
    #[error("metric is not positive definite")]
    NotPositive,
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

pub type Result<T> = std::result::Result<T, Su2Error>;

pub type Quad = [Scalar; 4];

/// `ω1, ω2, ω3` as constant combinations of α0, α1, α2, dθ, with
/// θ̃ = -2pθ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaturalStructure {
    pub p: Scalar,
    pub a: Quad,
    pub b: Quad,
    pub c: Quad,
    pub geom: GeometryParams,
}

impl NaturalStructure {
    pub fn new(p: Scalar, a: Quad, b: Quad, c: Quad, geom: GeometryParams) -> Result<Self> {
        if p.is_zero() {
            return Err(Su2Error::ZeroP);
        }
        Ok(NaturalStructure { p, a, b, c, geom })
    }

    /// p = 1, ω1 = dθ, ω2 = α2 - α0, ω3 = α1.
    pub fn main_example(geom: GeometryParams) -> Self {
        let q = |v: [i64; 4]| v.map(Scalar::int);
        NaturalStructure { p: Scalar::one(), a: q([0, 0, 0, 1]), b: q([-1, 0, 1, 0]), c: q([0, 1, 0, 0]), geom }
    }

    pub fn quad(&self, i: usize) -> &Quad {
        match i {
            1 => &self.a,
            2 => &self.b,
            3 => &self.c,
            _ => panic!("ω index must be 1, 2 or 3"),
        }
    }

    pub fn omega(&self, i: usize) -> InvariantForm {
        InvariantForm::from_q(5, self.quad(i))
    }

    /// θ̃ = -2pθ.
    pub fn theta_tilde(&self) -> InvariantForm {
        InvariantForm::theta(5).scale(&(&self.p * Scalar::int(-2)))
    }

    pub fn is_exact(&self) -> bool {
        [&self.a, &self.b, &self.c].iter().all(|q| q.iter().all(Scalar::is_exact)) && self.p.is_exact()
    }

    pub fn to_float(&self) -> Self {
        let f = |q: &Quad| q.clone().map(|x| x.to_float());
        NaturalStructure { p: self.p.to_float(), a: f(&self.a), b: f(&self.b), c: f(&self.c), geom: self.geom.clone() }
    }
}

/// `q1^2 + q3^2 - q0 q2`.
pub fn quad_norm(q: &Quad) -> Scalar {
    q[1].square() + q[3].square() - &q[0] * &q[2]
}

/// `q0 r2 + q2 r0 - 2 q1 r1 - 2 q3 r3`; vanishes iff `ωq ∧ ωr = 0`.
pub fn quad_pair(q: &Quad, r: &Quad) -> Scalar {
    &q[0] * &r[2] + &q[2] * &r[0] - Scalar::int(2) * (&q[1] * &r[1] + &q[3] * &r[3])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub label: String,
    pub value: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SU2Check {
    pub valid: bool,
    pub nu: Scalar,
    pub nu_b: Scalar,
    pub nu_c: Scalar,
    pub violations: Vec<Violation>,
}

pub const LABEL_NU_AB: &str = "a1^2+a3^2-a0a2=b1^2+b3^2-b0b2";
pub const LABEL_NU_BC: &str = "b1^2+b3^2-b0b2=c1^2+c3^2-c0c2";
pub const LABEL_NU_NONZERO: &str = "a1^2+a3^2-a0a2!=0";
pub const LABEL_ORTH_AB: &str = "a0b2+a2b0-2a1b1-2a3b3=0";
pub const LABEL_ORTH_BC: &str = "b0c2+b2c0-2b1c1-2b3c3=0";
pub const LABEL_ORTH_CA: &str = "c0a2+c2a0-2c1a1-2c3a3=0";
pub const LABEL_PD_G11: &str = "g11>0";
pub const LABEL_PD_DET: &str = "g11g33-g13^2-g23^2>0";

pub fn check_su2(ns: &NaturalStructure) -> SU2Check {
    check_su2_tol(ns, DEFAULT_TOL)
}

pub fn check_su2_tol(ns: &NaturalStructure, tol: f64) -> SU2Check {
    let (na, nb, nc) = (quad_norm(&ns.a), quad_norm(&ns.b), quad_norm(&ns.c));
    let mut violations = Vec::new();
    let mut need_zero = |label: &str, v: Scalar| {
        if !v.is_zero_tol(tol) {
            violations.push(Violation { label: label.to_string(), value: v });
        }
    };
    need_zero(LABEL_NU_AB, &na - &nb);
    need_zero(LABEL_NU_BC, &nb - &nc);
    need_zero(LABEL_ORTH_AB, quad_pair(&ns.a, &ns.b));
    need_zero(LABEL_ORTH_BC, quad_pair(&ns.b, &ns.c));
    need_zero(LABEL_ORTH_CA, quad_pair(&ns.c, &ns.a));
    if na.is_zero_tol(tol) {
        violations.push(Violation { label: LABEL_NU_NONZERO.to_string(), value: na.clone() });
    } else {
        let m = metric_closed_form(ns);
        // Positivity of G/nu; nu > 0 for every orthogonal triple.
        let g11n = &m.g11 / &na;
        if !g11n.is_positive_tol(tol) {
            violations.push(Violation { label: LABEL_PD_G11.to_string(), value: g11n });
        }
        if !m.minor.is_positive_tol(tol) {
            violations.push(Violation { label: LABEL_PD_DET.to_string(), value: m.minor.clone() });
        }
    }
    SU2Check { valid: violations.is_empty(), nu: na, nu_b: nb, nu_c: nc, violations }
}

/// 4x4 matrix over `Scalar`, acting on column vectors in the basis
/// e1, e2, e3, e4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat4(pub [[Scalar; 4]; 4]);

impl Mat4 {
    pub fn from_fn(f: impl Fn(usize, usize) -> Scalar) -> Self {
        Mat4(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn from_ints(m: [[i64; 4]; 4]) -> Self {
        Self::from_fn(|i, j| Scalar::int(m[i][j]))
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { Scalar::one() } else { Scalar::zero() })
    }

    pub fn zero() -> Self {
        Self::from_fn(|_, _| Scalar::zero())
    }

    /// `[[0, 1_2], [-1_2, 0]]`.
    pub fn j2() -> Self {
        Self::from_ints([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::from_fn(|i, j| &self.0[i][j] * c)
    }

    pub fn add(&self, other: &Mat4) -> Self {
        Self::from_fn(|i, j| &self.0[i][j] + &other.0[i][j])
    }

    pub fn sub(&self, other: &Mat4) -> Self {
        Self::from_fn(|i, j| &self.0[i][j] - &other.0[i][j])
    }

    pub fn max_abs(&self) -> Scalar {
        self.0.iter().flatten().map(Scalar::abs).fold(Scalar::zero(), |m, c| if c > m { c } else { m })
    }

    pub fn approx_eq(&self, other: &Mat4, tol: f64) -> bool {
        self.sub(other).max_abs().is_zero_tol(tol)
    }

    pub fn mul_vec(&self, v: &[Scalar; 4]) -> [Scalar; 4] {
        std::array::from_fn(|i| (0..4).map(|k| &self.0[i][k] * &v[k]).sum())
    }

    /// Determinant by cofactor expansion.
    pub fn det(&self) -> Scalar {
        fn minor(m: &[Vec<Scalar>]) -> Scalar {
            if m.len() == 1 {
                return m[0][0].clone();
            }
            let mut acc = Scalar::zero();
            for (j, head) in m[0].iter().enumerate() {
                if head.is_zero_tol(0.0) {
                    continue;
                }
                let sub: Vec<Vec<Scalar>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = head * minor(&sub);
                acc = if j % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
        let rows: Vec<Vec<Scalar>> = self.0.iter().map(|r| r.to_vec()).collect();
        minor(&rows)
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.0[i][j]
    }
}

impl<'b> Mul<&'b Mat4> for &Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: &'b Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| (0..4).map(|k| &self.0[i][k] * &rhs.0[k][j]).sum())
    }
}

impl fmt::Display for Mat4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// The symmetric matrix built from the four independent entries.
pub fn metric_matrix(g11: &Scalar, g13: &Scalar, g23: &Scalar, g33: &Scalar) -> Mat4 {
    let z = Scalar::zero;
    let n = |x: &Scalar| -x;
    Mat4([
        [g11.clone(), z(), g13.clone(), n(g23)],
        [z(), g11.clone(), g23.clone(), g13.clone()],
        [g13.clone(), g23.clone(), g33.clone(), z()],
        [n(g23), g13.clone(), z(), g33.clone()],
    ])
}

/// Closed-form metric data. `g11, g13, g23, g33` and `matrix` are the
/// cubic closed-form expressions; they equal `nu` times the metric induced
/// on ker θ, which is `metric`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub g11: Scalar,
    pub g13: Scalar,
    pub g23: Scalar,
    pub g33: Scalar,
    /// `|e0|^2 = 4 p^2 s^2`.
    pub g00: Scalar,
    pub nu: Scalar,
    /// `g11 g33 - g13^2 - g23^2`.
    pub minor: Scalar,
    /// `(g11 g33 - g13^2 - g23^2)^2`.
    pub det_g: Scalar,
    /// Determinant computed from `matrix` directly.
    pub det_matrix: Scalar,
    pub pd_flag: bool,
    pub g_natural: bool,
    pub matrix: Mat4,
    /// `matrix / nu`; absent when nu = 0.
    pub metric: Option<Mat4>,
}

pub fn metric_closed_form(ns: &NaturalStructure) -> MetricReport {
    metric_closed_form_tol(ns, DEFAULT_TOL)
}

pub fn metric_closed_form_tol(ns: &NaturalStructure, tol: f64) -> MetricReport {
    let (a, b, c) = (&ns.a, &ns.b, &ns.c);
    let half = Scalar::ratio(1, 2);
    let g11 = (&a[1] * &b[0] - &a[0] * &b[1]) * &c[3]
        + (&a[0] * &b[3] - &a[3] * &b[0]) * &c[1]
        + (&a[3] * &b[1] - &a[1] * &b[3]) * &c[0];
    let g33 = (&a[2] * &b[1] - &a[1] * &b[2]) * &c[3]
        + (&a[1] * &b[3] - &a[3] * &b[1]) * &c[2]
        + (&a[3] * &b[2] - &a[2] * &b[3]) * &c[1];
    let g13 = &half
        * (&a[3] * (&b[2] * &c[0] - &b[0] * &c[2])
            + &b[3] * (&a[0] * &c[2] - &a[2] * &c[0])
            + &c[3] * (&a[2] * &b[0] - &a[0] * &b[2]));
    let g14 = &half
        * (&a[1] * (&b[0] * &c[2] - &b[2] * &c[0])
            + &b[1] * (&a[2] * &c[0] - &a[0] * &c[2])
            + &c[1] * (&a[0] * &b[2] - &a[2] * &b[0]));
    let g23 = -g14;
    let nu = quad_norm(a);
    let minor = &g11 * &g33 - g13.square() - g23.square();
    let matrix = metric_matrix(&g11, &g13, &g23, &g33);
    let metric = nu.recip().filter(|_| !nu.is_zero_tol(tol)).map(|inv| matrix.scale(&inv));
    let pd_flag = !nu.is_zero_tol(tol) && (&g11 / &nu).is_positive_tol(tol) && minor.is_positive_tol(tol);
    MetricReport {
        g00: Scalar::int(4) * ns.p.square() * ns.geom.s_squared(),
        det_g: minor.square(),
        det_matrix: matrix.det(),
        g_natural: g23.is_zero_tol(tol),
        pd_flag,
        minor,
        nu,
        matrix,
        metric,
        g11,
        g13,
        g23,
        g33,
    }
}

fn horizontal(x: &FrameVector) -> Result<()> {
    if x.dim() != 5 {
        return Err(ExteriorError::DimMismatch(x.dim(), 5).into());
    }
    if !x.component(0).is_zero_tol(0.0) {
        return Err(Su2Error::NotHorizontal);
    }
    Ok(())
}

/// `[(x ⌟ ω1) ∧ (y ⌟ ω2) ∧ ω3] / v` with `v = ½ ω1 ∧ ω1 = -nu e1234`.
pub fn metric_contraction(ns: &NaturalStructure, x: &FrameVector, y: &FrameVector) -> Result<Scalar> {
    horizontal(x)?;
    horizontal(y)?;
    let nu = quad_norm(&ns.a);
    if nu.is_zero_tol(0.0) {
        return Err(Su2Error::ZeroNu);
    }
    let form = |i: usize| -> KForm { expand_invariant(&ns.omega(i), &ns.geom).expect("constant coefficients") };
    let top = form(1).contract(x)?.wedge(&form(2).contract(y)?)?.wedge(&form(3))?;
    let v = -nu;
    Ok(top.coeff(&[1, 2, 3, 4]) / v)
}

/// Symmetrized contraction values on e1..e4.
pub fn metric_contraction_matrix(ns: &NaturalStructure) -> Result<Mat4> {
    let basis: Vec<FrameVector> = (1..5).map(|i| FrameVector::basis(5, i).expect("valid")).collect();
    let mut m = Mat4::zero();
    for i in 0..4 {
        for j in i..4 {
            let xy = metric_contraction(ns, &basis[i], &basis[j])?;
            let yx = metric_contraction(ns, &basis[j], &basis[i])?;
            let v = (xy + yx) * Scalar::ratio(1, 2);
            m[(i, j)] = v.clone();
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// `W_ij = ω(e_i, e_j)` for `ω = q0 α0 + q1 α1 + q2 α2 + q3 dθ`.
pub fn omega_matrix(q: &Quad) -> Mat4 {
    let (q0, q1, q2, q3) = (&q[0], &q[1], &q[2], &q[3]);
    let z = Scalar::zero;
    let n = |x: &Scalar| -x;
    Mat4([
        [z(), q0.clone(), n(q3), q1.clone()],
        [n(q0), z(), n(q1), n(q3)],
        [q3.clone(), q1.clone(), z(), q2.clone()],
        [n(q1), q3.clone(), n(q2), z()],
    ])
}

/// `[[q2 J1, -A13], [A13^T, q0 J1]]` with `J1 = [[0,1],[-1,0]]` and
/// `A13 = [[-q3, q1], [-q1, -q3]]`; satisfies `W ω̂ = nu Id`.
pub fn omega_hat(q: &Quad) -> Mat4 {
    let (q0, q1, q2, q3) = (&q[0], &q[1], &q[2], &q[3]);
    let z = Scalar::zero;
    let n = |x: &Scalar| -x;
    Mat4([
        [z(), q2.clone(), q3.clone(), n(q1)],
        [n(q2), z(), q1.clone(), q3.clone()],
        [n(q3), n(q1), z(), q0.clone()],
        [q1.clone(), n(q3), n(q0), z()],
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiTriple {
    pub phi1: Mat4,
    pub phi2: Mat4,
    pub phi3: Mat4,
}

impl PhiTriple {
    pub fn get(&self, i: usize) -> &Mat4 {
        match i {
            1 => &self.phi1,
            2 => &self.phi2,
            3 => &self.phi3,
            _ => panic!("Φ index must be 1, 2 or 3"),
        }
    }
}

/// `Φ_i = ω̂_i g / nu` where `g` is the induced metric, so that
/// `ω_i(x, Φ_i y) = g(x, y)` and `Φ_i^2 = -Id`.
pub fn phi_matrices(ns: &NaturalStructure) -> Result<PhiTriple> {
    let report = metric_closed_form(ns);
    let g = report.metric.as_ref().ok_or(Su2Error::ZeroNu)?;
    if !report.pd_flag {
        return Err(Su2Error::NotPositive);
    }
    let inv = report.nu.recip().ok_or(Su2Error::ZeroNu)?;
    let phi = |q: &Quad| (&omega_hat(q) * g).scale(&inv);
    Ok(PhiTriple { phi1: phi(&ns.a), phi2: phi(&ns.b), phi3: phi(&ns.c) })
}

/// Whether Φ_i maps the vertical plane V0 = <e3, e4> and the horizontal
/// plane H0 = <e1, e2> into themselves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservationFlags {
    pub phi1_v0: bool,
    pub phi1_h0: bool,
    pub phi2_v0: bool,
    pub phi2_h0: bool,
    pub phi3_v0: bool,
    pub phi3_h0: bool,
}

/// (V0, H0) conditions for a single quadruple:
/// V0: `q2 g23 + q3 g33 = 0` and `q2 g13 - q1 g33 = 0`;
/// H0: `q0 g23 + q3 g11 = 0` and `q0 g13 - q1 g11 = 0`.
pub fn preserves(q: &Quad, m: &MetricReport, tol: f64) -> (bool, bool) {
    let z = |x: Scalar| x.is_zero_tol(tol);
    let v0 = z(&q[2] * &m.g23 + &q[3] * &m.g33) && z(&q[2] * &m.g13 - &q[1] * &m.g33);
    let h0 = z(&q[0] * &m.g23 + &q[3] * &m.g11) && z(&q[0] * &m.g13 - &q[1] * &m.g11);
    (v0, h0)
}

pub fn preservation_flags(ns: &NaturalStructure) -> PreservationFlags {
    preservation_flags_tol(ns, DEFAULT_TOL)
}

pub fn preservation_flags_tol(ns: &NaturalStructure, tol: f64) -> PreservationFlags {
    let m = metric_closed_form_tol(ns, tol);
    let (phi1_v0, phi1_h0) = preserves(&ns.a, &m, tol);
    let (phi2_v0, phi2_h0) = preserves(&ns.b, &m, tol);
    let (phi3_v0, phi3_h0) = preserves(&ns.c, &m, tol);
    PreservationFlags { phi1_v0, phi1_h0, phi2_v0, phi2_h0, phi3_v0, phi3_h0 }
}

/// Closed-form entries predicted for a type II structure with ω1 =
/// a0 α0 + a2 α2 + a3 dθ and ω3 free of α1:
/// `(g11, g13, g23, g33) = (a0 a3^2 / (3 a2 s^2), 0, -a0 a3 / (3 s^2), a3^2 / (3 s^2))`.
pub fn type2_metric_prediction(a0: &Scalar, a2: &Scalar, a3: &Scalar, s2: &Scalar) -> [Scalar; 4] {
    let three_s2 = Scalar::int(3) * s2;
    [a0 * a3.square() / (a2 * &three_s2), Scalar::zero(), -(a0 * a3) / &three_s2, a3.square() / three_s2]
}
