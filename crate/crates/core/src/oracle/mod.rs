//! Independent coordinate oracle: the flat model ℝ³×S² (and its cone
//! ℝ³×S²×ℝ₊) in stereographic charts, with derivatives computed by
//! forward-mode differentiation and cross-checked by finite differences.

pub mod chart;
pub mod dual;
pub mod forms;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::FrameVector;
use crate::frames::{d_invariant, expand_at, Core, GeometryParams, InvariantForm};
use crate::poly::Poly;
use crate::scalar::Scalar;

pub use chart::{ChartPoint, Pole};
pub use dual::{Dual, Real};
pub use forms::{basis_vector, eval_form, numeric_d, numeric_d_fd, subsets, NumForm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("point too close to the excluded {pole:?} pole (denominator {denominator:e})")]
    PoleProximity { pole: Pole, denominator: f64 },
    #[error("t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("form needs {expected} vectors, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("expected dimension {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
}

/// Largest residual per identity over all sampled points and basis tuples,
/// plus the largest AD/finite-difference disagreement and the largest
/// north/south chart disagreement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub seed: u64,
    pub samples: usize,
    pub identities: BTreeMap<String, f64>,
    pub max_residual: f64,
    pub ad_vs_fd: f64,
    pub chart_independence: f64,
    pub frame_vs_chart: f64,
}

impl OracleReport {
    fn new(seed: u64, samples: usize) -> Self {
        OracleReport {
            seed,
            samples,
            identities: BTreeMap::new(),
            max_residual: 0.0,
            ad_vs_fd: 0.0,
            chart_independence: 0.0,
            frame_vs_chart: 0.0,
        }
    }

    fn record(&mut self, label: &str, r: f64) {
        let e = self.identities.entry(label.to_string()).or_insert(0.0);
        *e = e.max(r);
        self.max_residual = self.max_residual.max(r);
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol && self.chart_independence <= tol && self.frame_vs_chart <= tol
    }
}

/// An identity `d(lhs_d) + Σ c·rhs = 0` or `Σ c·rhs = 0` checked on basis tuples.
struct Identity {
    label: &'static str,
    d_of: Option<NumForm>,
    rest: NumForm,
}

use NumForm::{Alpha0, Alpha1, Alpha2, DTheta, Dt, Theta};

fn w(a: NumForm, b: NumForm) -> NumForm {
    NumForm::wedge(a, b)
}

/// The empty sum, standing for the zero form of whatever grade the d-term has.
fn zero() -> NumForm {
    NumForm::Sum(Vec::new())
}

fn flat_identities() -> Vec<Identity> {
    vec![
        Identity { label: "d(θ)=dθ", d_of: Some(Theta), rest: NumForm::scale(-1.0, DTheta) },
        Identity { label: "dα0=θ∧α1", d_of: Some(Alpha0), rest: NumForm::scale(-1.0, w(Theta, Alpha1)) },
        Identity { label: "dα1=2θ∧α2", d_of: Some(Alpha1), rest: NumForm::scale(-2.0, w(Theta, Alpha2)) },
        Identity { label: "dα2=0", d_of: Some(Alpha2), rest: zero() },
        Identity { label: "d(dθ)=0", d_of: Some(DTheta), rest: zero() },
        Identity {
            label: "α0∧α2=-½α1∧α1",
            d_of: None,
            rest: NumForm::Sum(vec![(1.0, w(Alpha0, Alpha2)), (0.5, w(Alpha1, Alpha1))]),
        },
        Identity {
            label: "α0∧α2=-½dθ∧dθ",
            d_of: None,
            rest: NumForm::Sum(vec![(1.0, w(Alpha0, Alpha2)), (0.5, w(DTheta, DTheta))]),
        },
        Identity { label: "α0∧dθ=0", d_of: None, rest: w(Alpha0, DTheta) },
        Identity { label: "α1∧dθ=0", d_of: None, rest: w(Alpha1, DTheta) },
        Identity { label: "α2∧dθ=0", d_of: None, rest: w(Alpha2, DTheta) },
        Identity { label: "α0∧α1=0", d_of: None, rest: w(Alpha0, Alpha1) },
        Identity { label: "α1∧α2=0", d_of: None, rest: w(Alpha1, Alpha2) },
        Identity { label: "α0∧α0=0", d_of: None, rest: w(Alpha0, Alpha0) },
        Identity { label: "α2∧α2=0", d_of: None, rest: w(Alpha2, Alpha2) },
    ]
}

/// F = t dθ - θ∧dt.
pub fn cone_f() -> NumForm {
    NumForm::Sum(vec![(1.0, NumForm::tpow(1, DTheta)), (-1.0, w(Theta, Dt))])
}

/// Ψ+ = θ∧α0 - t²θ∧α2 - tα1∧dt.
pub fn cone_psi_plus() -> NumForm {
    NumForm::Sum(vec![
        (1.0, w(Theta, Alpha0)),
        (-1.0, NumForm::tpow(2, w(Theta, Alpha2))),
        (-1.0, NumForm::tpow(1, w(Alpha1, Dt))),
    ])
}

/// Ψ- = -(tθ∧α1 - t²α2∧dt + α0∧dt).
pub fn cone_psi_minus() -> NumForm {
    NumForm::Sum(vec![
        (-1.0, NumForm::tpow(1, w(Theta, Alpha1))),
        (1.0, NumForm::tpow(2, w(Alpha2, Dt))),
        (-1.0, w(Alpha0, Dt)),
    ])
}

fn cone_identities() -> Vec<Identity> {
    vec![
        Identity { label: "dF=0", d_of: Some(cone_f()), rest: zero() },
        Identity { label: "dΨ+=0", d_of: Some(cone_psi_plus()), rest: zero() },
        Identity { label: "dΨ-=0", d_of: Some(cone_psi_minus()), rest: zero() },
        Identity { label: "F∧Ψ+=0", d_of: None, rest: w(cone_f(), cone_psi_plus()) },
        Identity { label: "F∧Ψ-=0", d_of: None, rest: w(cone_f(), cone_psi_minus()) },
    ]
}

fn identity_grade(id: &Identity) -> usize {
    match &id.d_of {
        Some(f) => f.grade() + 1,
        None => id.rest.grade(),
    }
}

fn eval_rest(id: &Identity, pt: &ChartPoint, vs: &[Vec<f64>]) -> Result<f64, OracleError> {
    match &id.rest {
        NumForm::Sum(v) if v.is_empty() => Ok(0.0),
        f => eval_form(f, pt, vs),
    }
}

/// Residual of an identity on given vectors, and |AD - FD| of its d-term.
fn residual(id: &Identity, pt: &ChartPoint, vs: &[Vec<f64>]) -> Result<(f64, f64, f64), OracleError> {
    let rest = eval_rest(id, pt, vs)?;
    match &id.d_of {
        Some(f) => {
            let ad = numeric_d(f, pt, vs)?;
            let fd = numeric_d_fd(f, pt, vs)?;
            Ok((ad + rest, (ad - fd).abs(), ad))
        }
        None => Ok((rest, 0.0, rest)),
    }
}

/// Value of the identity's leading term (d-term or full expression), used
/// for comparing charts on the same tangent vectors.
fn leading_value(id: &Identity, pt: &ChartPoint, vs: &[Vec<f64>]) -> Result<f64, OracleError> {
    residual(id, pt, vs).map(|r| r.2)
}

fn run_identities(
    ids: &[Identity],
    n: usize,
    seed: u64,
    with_t: bool,
    mut frame_check: impl FnMut(&mut OracleReport, [f64; 3], Option<f64>),
) -> Result<OracleReport, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport::new(seed, n);
    let dim = if with_t { 6 } else { 5 };
    for i in 0..n {
        let pole = if i % 2 == 0 { Pole::North } else { Pole::South };
        let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let u = chart::random_unit_off_poles(&mut rng);
        let t = with_t.then(|| rng.gen_range(0.1..10.0));
        let pt = ChartPoint::from_sphere(x, u, pole, t)?;
        let other = ChartPoint::from_sphere(x, u, pole.other(), t)?;
        for id in ids {
            let k = identity_grade(id);
            for idx in subsets(dim, k) {
                let vs: Vec<Vec<f64>> = idx.iter().map(|&a| basis_vector(dim, a)).collect();
                let (r, adfd, _) = residual(id, &pt, &vs)?;
                report.record(id.label, r.abs());
                report.ad_vs_fd = report.ad_vs_fd.max(adfd);
            }
            // same point, same ambient tangent vectors, both charts
            let amb: Vec<([f64; 3], [f64; 3], f64)> = (0..k)
                .map(|_| {
                    let xd: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                    (xd, chart::random_tangent(&mut rng, u), rng.gen_range(-1.0..1.0))
                })
                .collect();
            let in_a: Vec<Vec<f64>> = amb.iter().map(|&(a, b, c)| pt.chart_vector(a, b, c)).collect();
            let in_b: Vec<Vec<f64>> = amb.iter().map(|&(a, b, c)| other.chart_vector(a, b, c)).collect();
            let va = leading_value(id, &pt, &in_a)?;
            let vb = leading_value(id, &other, &in_b)?;
            report.chart_independence = report.chart_independence.max((va - vb).abs());
        }
        frame_check(&mut report, x, t);
    }
    Ok(report)
}

/// Chart vectors of the adapted coframe dual basis at u = (0,0,1) with s = 1:
/// e0 = ∂x3, e1 = ∂x1, e2 = ∂x2, e3 = ∂u1, e4 = ∂u2, e5 = ∂t. In the south
/// chart at its origin ∂ξ = 2∂u1 and ∂η = 2∂u2.
pub fn adapted_frame(dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![
        basis_vector(dim, 2),
        basis_vector(dim, 0),
        basis_vector(dim, 1),
        basis_vector(dim, chart::XI),
        basis_vector(dim, chart::ETA),
    ];
    out[3][chart::XI] = 0.5;
    out[4][chart::ETA] = 0.5;
    if dim == 6 {
        out.push(basis_vector(dim, chart::T));
    }
    out
}

fn invariant_of(f: &NumForm, dim: usize) -> InvariantForm {
    let core = |c| InvariantForm::core(dim, c);
    match f {
        NumForm::One => InvariantForm::constant(dim, Poly::constant(Scalar::one())),
        Theta => InvariantForm::theta(dim),
        Dt => InvariantForm::dt(),
        Alpha0 => core(Core::Alpha0),
        Alpha1 => core(Core::Alpha1),
        Alpha2 => core(Core::Alpha2),
        DTheta => core(Core::Dtheta),
        NumForm::Wedge(a, b) => invariant_of(a, dim).wedge(&invariant_of(b, dim)).expect("wedge of invariant forms"),
        NumForm::Sum(v) => v.iter().fold(InvariantForm::zero(dim, f.grade()), |acc, (c, g)| {
            acc.add(&invariant_of(g, dim).scale(&Scalar::float(*c))).expect("sum of invariant forms")
        }),
        NumForm::TPow(k, g) => {
            let mut p = Poly::constant(Scalar::one());
            for _ in 0..*k {
                p = &p * &Poly::t();
            }
            invariant_of(g, dim).scale_poly(&p)
        }
    }
}

/// Max discrepancy between the adapted-frame expansion of `f` (and of its
/// derivative, when `with_d`) and the chart evaluation at u = (0,0,1).
fn frame_discrepancy(f: &NumForm, x: [f64; 3], t: Option<f64>, with_d: bool) -> f64 {
    let geom = GeometryParams::new(Scalar::zero(), Scalar::one()).expect("s = 1");
    let pt = ChartPoint::from_sphere(x, [0.0, 0.0, 1.0], Pole::South, t).expect("north pole lies in the south chart");
    let dim = pt.dim();
    let frame = adapted_frame(dim);
    let ts = Scalar::float(t.unwrap_or(1.0));
    let inv = invariant_of(f, dim);
    let mut worst: f64 = 0.0;
    let mut compare = |inv: &InvariantForm, numeric: &dyn Fn(&[Vec<f64>]) -> f64| {
        let k = expand_at(inv, &geom, &ts).expect("expansion");
        for idx in subsets(dim, k.grade()) {
            let fv: Vec<FrameVector> = idx.iter().map(|&i| FrameVector::basis(dim, i).expect("basis")).collect();
            let cv: Vec<Vec<f64>> = idx.iter().map(|&i| frame[i].clone()).collect();
            let a = k.evaluate(&fv).expect("evaluate").to_f64();
            worst = worst.max((a - numeric(&cv)).abs());
        }
    };
    compare(&inv, &|cv| eval_form(f, &pt, cv).expect("oracle evaluation"));
    if with_d {
        let dinv = if dim == 6 { crate::frames::d_extended(&inv, &geom) } else { d_invariant(&inv, &geom) };
        compare(&dinv, &|cv| numeric_d(f, &pt, cv).expect("oracle derivative"));
    }
    worst
}

/// Checks the flat structure equations and algebraic identities of
/// θ, α0, α1, α2, dθ on `n` random points of ℝ³×S², alternating charts.
pub fn verify_flat_system(n: usize, seed: u64) -> Result<OracleReport, OracleError> {
    let named = [Theta, Alpha0, Alpha1, Alpha2, DTheta];
    run_identities(&flat_identities(), n, seed, false, |rep, x, _| {
        for f in &named {
            rep.frame_vs_chart = rep.frame_vs_chart.max(frame_discrepancy(f, x, None, true));
        }
    })
}

/// Checks closure of F, Ψ+ and Ψ- on ℝ³×S²×ℝ₊ at `n` random points.
pub fn verify_flat_su3(n: usize, seed: u64) -> Result<OracleReport, OracleError> {
    let named = [cone_f(), cone_psi_plus(), cone_psi_minus()];
    run_identities(&cone_identities(), n, seed, true, |rep, x, t| {
        for f in &named {
            rep.frame_vs_chart = rep.frame_vs_chart.max(frame_discrepancy(f, x, t, true));
        }
    })
}
