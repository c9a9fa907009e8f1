//! Random valid inputs for sweeps and property checks.
//!
//! In the coordinates X = (q1, q3, (q0-q2)/2), T = (q0+q2)/2 the quadratic
//! form q1^2 + q3^2 - q0 q2 is X·X - T^2, so proper orthochronous Lorentz
//! maps send valid triples to valid triples. Random structures are built by
//! applying rotations and boosts with rational (or float) parameters to the
//! main example and rescaling.

use rand::Rng;

use crate::families::TypeIParams;
use crate::frames::GeometryParams;
use crate::scalar::Scalar;
use crate::su2core::{NaturalStructure, Quad};

fn to_lorentz(q: &Quad) -> [Scalar; 4] {
    let half = Scalar::ratio(1, 2);
    [q[1].clone(), q[3].clone(), &half * (&q[0] - &q[2]), &half * (&q[0] + &q[2])]
}

fn from_lorentz(y: &[Scalar; 4]) -> Quad {
    [&y[3] + &y[2], y[0].clone(), &y[3] - &y[2], y[1].clone()]
}

/// `(cos, sin)` of a rational point on the unit circle, or of a float angle.
fn circle_point<R: Rng>(rng: &mut R, exact: bool) -> (Scalar, Scalar) {
    if exact {
        let m: i64 = rng.gen_range(0..7);
        let n: i64 = rng.gen_range(1..7) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let den = m * m + n * n;
        (Scalar::ratio(m * m - n * n, den), Scalar::ratio(2 * m * n, den))
    } else {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        (Scalar::float(a.cos()), Scalar::float(a.sin()))
    }
}

/// `(cosh, sinh)` of a moderate rapidity.
fn hyperbola_point<R: Rng>(rng: &mut R, exact: bool) -> (Scalar, Scalar) {
    if exact {
        let m: i64 = rng.gen_range(1..4);
        let n: i64 = rng.gen_range(1..4);
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        (Scalar::ratio(m * m + n * n, 2 * m * n), Scalar::ratio(sign * (m * m - n * n), 2 * m * n))
    } else {
        let r: f64 = rng.gen_range(-1.2..1.2);
        (Scalar::float(r.cosh()), Scalar::float(r.sinh()))
    }
}

fn rotate(y: &mut [Scalar; 4], i: usize, j: usize, c: &Scalar, s: &Scalar) {
    let (yi, yj) = (y[i].clone(), y[j].clone());
    y[i] = c * &yi - s * &yj;
    y[j] = s * &yi + c * &yj;
}

fn boost(y: &mut [Scalar; 4], i: usize, ch: &Scalar, sh: &Scalar) {
    let (yi, t) = (y[i].clone(), y[3].clone());
    y[i] = ch * &yi + sh * &t;
    y[3] = sh * &yi + ch * &t;
}

fn random_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64, den: i64) -> Scalar {
    Scalar::ratio(rng.gen_range(lo * den..=hi * den), den)
}

/// Random geometry with rational K in [-5, 5] and s^2 in (0, 4].
pub fn random_geometry<R: Rng>(rng: &mut R) -> GeometryParams {
    let k = random_rational(rng, -5, 5, 4);
    let s2 = Scalar::ratio(rng.gen_range(1..=16), 4);
    GeometryParams::from_s_squared(k, s2).expect("positive s^2")
}

/// Random valid structure: exact rationals when `exact`, floats otherwise.
pub fn random_structure<R: Rng>(rng: &mut R, exact: bool) -> NaturalStructure {
    let geom = random_geometry(rng);
    let base = NaturalStructure::main_example(geom.clone());
    let mut ys = [to_lorentz(&base.a), to_lorentz(&base.b), to_lorentz(&base.c)];
    for _ in 0..3 {
        let (c, s) = circle_point(rng, exact);
        let i = rng.gen_range(0..3);
        let j = (i + rng.gen_range(1..3)) % 3;
        let (ch, sh) = hyperbola_point(rng, exact);
        let k = rng.gen_range(0..3);
        for y in ys.iter_mut() {
            rotate(y, i, j, &c, &s);
            boost(y, k, &ch, &sh);
        }
    }
    let lambda = Scalar::ratio(rng.gen_range(1..=8), 4);
    let [a, b, c] = ys.map(|y| from_lorentz(&y).map(|x| &lambda * x));
    let mut p = Scalar::ratio(rng.gen_range(1..=12), 4);
    if rng.gen_bool(0.5) {
        p = -p;
    }
    let ns = NaturalStructure::new(p, a, b, c, geom).expect("p != 0");
    if exact {
        ns
    } else {
        ns.to_float()
    }
}

/// Random point on `B^2 (1+A^2)^2 (X^2+Y^2) = 1`, `B > 0`. Exact points use
/// rational directions so that `B` stays rational.
pub fn random_type1_point<R: Rng>(rng: &mut R, exact: bool) -> TypeIParams {
    let (c, s) = circle_point(rng, exact);
    let a = if exact { random_rational(rng, -3, 3, 4) } else { Scalar::float(rng.gen_range(-3.0..3.0)) };
    let r = if exact { Scalar::ratio(rng.gen_range(1..=12), 4) } else { Scalar::float(rng.gen_range(0.25..3.0)) };
    let one = Scalar::one();
    let b = ((&one + a.square()) * &r).recip().expect("r > 0");
    TypeIParams { x: &r * c, y: &r * s, a, b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2core::check_su2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_structures_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..200 {
            let ns = random_structure(&mut rng, i % 2 == 0);
            assert_eq!(ns.is_exact(), i % 2 == 0);
            let chk = check_su2(&ns);
            assert!(chk.valid, "{ns:?}: {:?}", chk.violations);
        }
    }
}
