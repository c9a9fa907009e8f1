//! Differential forms on ℝ³×S² written in ambient coordinates, evaluated
//! pointwise in a stereographic chart.

use super::chart::{sphere_map, ChartPoint, Pole, ETA, T, XI};
use super::dual::{Dual, Real};
use super::OracleError;

/// Step for the central finite-difference cross-check.
pub const FD_STEP: f64 = 1e-5;

/// Expression tree for the forms the oracle knows.
///
/// With u ∈ S² ⊂ ℝ³ and cyclic sums over (1,2,3):
/// θ = Σ u_i dx_i, α0 = Σ u_1 dx_2∧dx_3, α1 = Σ u_1 (dx_2∧du_3 - dx_3∧du_2),
/// α2 = Σ u_1 du_2∧du_3, dθ = Σ du_i∧dx_i.
#[derive(Clone, Debug, PartialEq)]
pub enum NumForm {
    Theta,
    Alpha0,
    Alpha1,
    Alpha2,
    DTheta,
    Dt,
    /// The constant 0-form 1.
    One,
    Wedge(Box<NumForm>, Box<NumForm>),
    /// Linear combination of forms of a common grade.
    Sum(Vec<(f64, NumForm)>),
    /// `t^k` times a form.
    TPow(u32, Box<NumForm>),
}

impl NumForm {
    pub fn wedge(a: NumForm, b: NumForm) -> NumForm {
        NumForm::Wedge(Box::new(a), Box::new(b))
    }

    pub fn scale(c: f64, a: NumForm) -> NumForm {
        NumForm::Sum(vec![(c, a)])
    }

    pub fn tpow(k: u32, a: NumForm) -> NumForm {
        NumForm::TPow(k, Box::new(a))
    }

    pub fn grade(&self) -> usize {
        match self {
            NumForm::One => 0,
            NumForm::Theta | NumForm::Dt => 1,
            NumForm::Alpha0 | NumForm::Alpha1 | NumForm::Alpha2 | NumForm::DTheta => 2,
            NumForm::Wedge(a, b) => a.grade() + b.grade(),
            NumForm::Sum(v) => v.first().map_or(0, |(_, f)| f.grade()),
            NumForm::TPow(_, f) => f.grade(),
        }
    }

    fn uses_t(&self) -> bool {
        match self {
            NumForm::Dt => true,
            NumForm::TPow(k, f) => *k > 0 || f.uses_t(),
            NumForm::Wedge(a, b) => a.uses_t() || b.uses_t(),
            NumForm::Sum(v) => v.iter().any(|(_, f)| f.uses_t()),
            _ => false,
        }
    }
}

/// Covectors dx_i, du_i and dt at a point, as chart components.
struct Frame<R> {
    u: [R; 3],
    dx: [Vec<R>; 3],
    du: [Vec<R>; 3],
    dt: Vec<R>,
    t: R,
}

impl<R: Real> Frame<R> {
    fn at(q: &[R], pole: Pole) -> Self {
        let n = q.len();
        let zero = R::cst(0.0);
        let (u, jac) = sphere_map(q[XI], q[ETA], pole);
        let unit = |k: usize| {
            let mut v = vec![zero; n];
            if k < n {
                v[k] = R::cst(1.0);
            }
            v
        };
        let du = std::array::from_fn(|i| {
            let mut v = vec![zero; n];
            v[XI] = jac[i][0];
            v[ETA] = jac[i][1];
            v
        });
        let t = if n > T { q[T] } else { R::cst(1.0) };
        Frame { u, dx: std::array::from_fn(unit), du, dt: unit(T), t }
    }
}

fn pair<R: Real>(c: &[R], v: &[f64]) -> R {
    c.iter().zip(v).fold(R::cst(0.0), |acc, (&a, &b)| acc + a * R::cst(b))
}

fn wedge11<R: Real>(a: &[R], b: &[R], v: &[f64], w: &[f64]) -> R {
    pair(a, v) * pair(b, w) - pair(a, w) * pair(b, v)
}

/// Sum of signed terms, with positive and negative parts each summed in
/// sorted order so that terms cancelling in pairs give exactly zero.
fn alt_sum<R: Real>(terms: Vec<R>) -> R {
    let (mut pos, mut neg): (Vec<R>, Vec<R>) = terms.into_iter().partition(|x| x.re() >= 0.0);
    let key = |x: &R| x.re().abs();
    pos.sort_by(|a, b| key(a).total_cmp(&key(b)));
    neg.sort_by(|a, b| key(a).total_cmp(&key(b)));
    let sp = pos.into_iter().fold(R::cst(0.0), |a, b| a + b);
    let sn = neg.into_iter().fold(R::cst(0.0), |a, b| a - b);
    sp - sn
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn eval_frame<R: Real>(form: &NumForm, f: &Frame<R>, vs: &[&[f64]]) -> R {
    let cyc = [(0usize, 1usize, 2usize), (1, 2, 0), (2, 0, 1)];
    match form {
        NumForm::One => R::cst(1.0),
        NumForm::Theta => (0..3).fold(R::cst(0.0), |acc, i| acc + f.u[i] * pair(&f.dx[i], vs[0])),
        NumForm::Dt => pair(&f.dt, vs[0]),
        NumForm::Alpha0 => {
            cyc.iter().fold(R::cst(0.0), |acc, &(a, b, c)| acc + f.u[a] * wedge11(&f.dx[b], &f.dx[c], vs[0], vs[1]))
        }
        NumForm::Alpha1 => cyc.iter().fold(R::cst(0.0), |acc, &(a, b, c)| {
            acc + f.u[a] * (wedge11(&f.dx[b], &f.du[c], vs[0], vs[1]) - wedge11(&f.dx[c], &f.du[b], vs[0], vs[1]))
        }),
        NumForm::Alpha2 => {
            cyc.iter().fold(R::cst(0.0), |acc, &(a, b, c)| acc + f.u[a] * wedge11(&f.du[b], &f.du[c], vs[0], vs[1]))
        }
        NumForm::DTheta => (0..3).fold(R::cst(0.0), |acc, i| acc + wedge11(&f.du[i], &f.dx[i], vs[0], vs[1])),
        NumForm::Sum(terms) => terms.iter().fold(R::cst(0.0), |acc, (c, g)| acc + R::cst(*c) * eval_frame(g, f, vs)),
        NumForm::TPow(k, g) => {
            let mut p = R::cst(1.0);
            for _ in 0..*k {
                p = p * f.t;
            }
            p * eval_frame(g, f, vs)
        }
        NumForm::Wedge(a, b) => {
            let (p, n) = (a.grade(), vs.len());
            let terms = subsets(n, p)
                .into_iter()
                .map(|left| {
                    let right: Vec<usize> = (0..n).filter(|i| !left.contains(i)).collect();
                    let inversions = left.iter().map(|&l| right.iter().filter(|&&r| r < l).count()).sum::<usize>();
                    let va: Vec<&[f64]> = left.iter().map(|&i| vs[i]).collect();
                    let vb: Vec<&[f64]> = right.iter().map(|&i| vs[i]).collect();
                    let val = eval_frame(a, f, &va) * eval_frame(b, f, &vb);
                    if inversions % 2 == 1 {
                        -val
                    } else {
                        val
                    }
                })
                .collect();
            alt_sum(terms)
        }
    }
}

fn check_args(form: &NumForm, pt: &ChartPoint, vectors: &[Vec<f64>], extra: usize) -> Result<(), OracleError> {
    let want = form.grade() + extra;
    if vectors.len() != want {
        return Err(OracleError::Arity { expected: want, got: vectors.len() });
    }
    let n = pt.dim();
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(OracleError::DimMismatch { expected: n, got: v.len() });
    }
    if form.uses_t() && pt.t.is_none() {
        return Err(OracleError::DimMismatch { expected: 6, got: n });
    }
    if pt.xi * pt.xi + pt.eta * pt.eta > 1e12 {
        return Err(OracleError::PoleProximity { pole: pt.pole, denominator: 0.0 });
    }
    Ok(())
}

fn eval_at<R: Real>(form: &NumForm, q: &[R], pole: Pole, vectors: &[Vec<f64>]) -> R {
    let frame = Frame::at(q, pole);
    let vs: Vec<&[f64]> = vectors.iter().map(Vec::as_slice).collect();
    eval_frame(form, &frame, &vs)
}

/// ω_p(v_1, …, v_k) for chart-component vectors.
pub fn eval_form(form: &NumForm, pt: &ChartPoint, vectors: &[Vec<f64>]) -> Result<f64, OracleError> {
    check_args(form, pt, vectors, 0)?;
    Ok(eval_at(form, &pt.coords(), pt.pole, vectors))
}

/// dω_p(v_0, …, v_k) = Σ_j (-1)^j ∂_{v_j} ω(v_0, …, v̂_j, …, v_k), with the
/// v_j extended as constant coordinate fields and directional derivatives
/// taken by forward-mode differentiation.
pub fn numeric_d(form: &NumForm, pt: &ChartPoint, vectors: &[Vec<f64>]) -> Result<f64, OracleError> {
    check_args(form, pt, vectors, 1)?;
    let q = pt.coords();
    let mut terms = Vec::with_capacity(vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        let rest: Vec<Vec<f64>> = vectors.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, w)| w.clone()).collect();
        let qd: Vec<Dual> = q.iter().zip(v).map(|(&a, &b)| Dual::new(a, b)).collect();
        let der = eval_at(form, &qd, pt.pole, &rest).eps;
        terms.push(if j % 2 == 1 { -der } else { der });
    }
    Ok(alt_sum(terms))
}

/// Same as [`numeric_d`] with central differences of step [`FD_STEP`].
pub fn numeric_d_fd(form: &NumForm, pt: &ChartPoint, vectors: &[Vec<f64>]) -> Result<f64, OracleError> {
    check_args(form, pt, vectors, 1)?;
    let q = pt.coords();
    let mut total = 0.0;
    for (j, v) in vectors.iter().enumerate() {
        let rest: Vec<Vec<f64>> = vectors.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, w)| w.clone()).collect();
        let shifted = |h: f64| -> Vec<f64> { q.iter().zip(v).map(|(&a, &b)| a + h * b).collect() };
        let fp = eval_at(form, &shifted(FD_STEP), pt.pole, &rest);
        let fm = eval_at(form, &shifted(-FD_STEP), pt.pole, &rest);
        let der = (fp - fm) / (2.0 * FD_STEP);
        total += if j % 2 == 1 { -der } else { der };
    }
    Ok(total)
}

/// Coordinate basis vector of length `n`.
pub fn basis_vector(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt() -> ChartPoint {
        ChartPoint::from_sphere([0.3, -1.2, 0.5], [0.48, 0.6, 0.64], Pole::North, None).unwrap()
    }

    #[test]
    fn repeated_vector_gives_exact_zero() {
        let p = pt();
        let v = vec![0.3, -0.7, 1.1, 0.25, -0.9];
        let w = vec![1.3, 0.2, -0.4, 0.5, 0.6];
        let z = vec![-0.2, 0.9, 0.1, -1.5, 0.35];
        for f in [NumForm::Alpha0, NumForm::Alpha1, NumForm::Alpha2, NumForm::DTheta] {
            assert_eq!(eval_form(&f, &p, &[v.clone(), v.clone()]).unwrap(), 0.0);
        }
        let f3 = NumForm::wedge(NumForm::Theta, NumForm::Alpha1);
        assert_eq!(eval_form(&f3, &p, &[v.clone(), w.clone(), v.clone()]).unwrap(), 0.0);
        let f4 = NumForm::wedge(NumForm::Alpha1, NumForm::Alpha1);
        assert_eq!(eval_form(&f4, &p, &[v.clone(), w.clone(), z, w.clone()]).unwrap(), 0.0);
    }

    #[test]
    fn arity_checked() {
        let p = pt();
        assert!(matches!(
            eval_form(&NumForm::Alpha0, &p, &[basis_vector(5, 0)]),
            Err(OracleError::Arity { expected: 2, got: 1 })
        ));
        assert!(eval_form(&NumForm::Dt, &p, &[basis_vector(5, 0)]).is_err());
    }

    #[test]
    fn d_theta_matches_named_dtheta() {
        let p = pt();
        for idx in subsets(5, 2) {
            let vs: Vec<Vec<f64>> = idx.iter().map(|&i| basis_vector(5, i)).collect();
            let a = numeric_d(&NumForm::Theta, &p, &vs).unwrap();
            let b = eval_form(&NumForm::DTheta, &p, &vs).unwrap();
            let c = numeric_d_fd(&NumForm::Theta, &p, &vs).unwrap();
            assert!((a - b).abs() < 1e-12, "{idx:?}: {a} vs {b}");
            assert!((a - c).abs() < 1e-8);
        }
    }

    #[test]
    fn shuffle_sign_matches_determinant() {
        // (dx1∧dx2)∧dx3 on e1,e2,e3 and on a permutation
        let p = pt();
        let f = NumForm::wedge(NumForm::Alpha0, NumForm::Theta);
        let e = |i| basis_vector(5, i);
        let a = eval_form(&f, &p, &[e(0), e(1), e(2)]).unwrap();
        let b = eval_form(&f, &p, &[e(1), e(0), e(2)]).unwrap();
        let c = eval_form(&f, &p, &[e(2), e(0), e(1)]).unwrap();
        assert_eq!(a, -b);
        assert!((a - c).abs() < 1e-15);
    }
}
