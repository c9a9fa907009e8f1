//! Stereographic charts on the unit sphere factor of ℝ³×S² (and ℝ³×S²×ℝ).

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dual::Real;
use super::OracleError;

/// Chart coordinates are ordered (x1, x2, x3, ξ, η) and, in the 6-dim
/// mode, t last.
pub const XI: usize = 3;
pub const ETA: usize = 4;
pub const T: usize = 5;

/// Samples closer than this to a chart's excluded pole are rejected.
pub const POLE_MARGIN: f64 = 1e-2;

/// Which pole the chart omits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    /// Projection from (0,0,1): u = (2ξ, 2η, ξ²+η²-1)/(1+ξ²+η²).
    North,
    /// Projection from (0,0,-1): u = (2ξ, 2η, 1-ξ²-η²)/(1+ξ²+η²).
    South,
}

impl Pole {
    fn sign(self) -> f64 {
        match self {
            Pole::North => 1.0,
            Pole::South => -1.0,
        }
    }

    pub fn other(self) -> Pole {
        match self {
            Pole::North => Pole::South,
            Pole::South => Pole::North,
        }
    }
}

/// u(ξ, η) and its Jacobian `[∂u/∂ξ, ∂u/∂η]` per component.
pub fn sphere_map<R: Real>(xi: R, eta: R, pole: Pole) -> ([R; 3], [[R; 2]; 3]) {
    let one = R::cst(1.0);
    let two = R::cst(2.0);
    let four = R::cst(4.0);
    let d = one + xi * xi + eta * eta;
    let d2 = d * d;
    let sg = R::cst(pole.sign());
    let u = [two * xi / d, two * eta / d, sg * (one - two / d)];
    let jac = [
        [two / d - four * xi * xi / d2, -(four * xi * eta) / d2],
        [-(four * xi * eta) / d2, two / d - four * eta * eta / d2],
        [sg * four * xi / d2, sg * four * eta / d2],
    ];
    (u, jac)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub x: [f64; 3],
    pub xi: f64,
    pub eta: f64,
    pub pole: Pole,
    pub t: Option<f64>,
}

impl ChartPoint {
    /// Chart coordinates of `(x, u)`; fails within 1e-6 of the excluded pole.
    pub fn from_sphere(x: [f64; 3], u: [f64; 3], pole: Pole, t: Option<f64>) -> Result<Self, OracleError> {
        let den = 1.0 - pole.sign() * u[2];
        if den.abs() < 1e-6 {
            return Err(OracleError::PoleProximity { pole, denominator: den });
        }
        if let Some(t) = t {
            if t <= 0.0 {
                return Err(OracleError::NonPositiveT(t));
            }
        }
        Ok(ChartPoint { x, xi: u[0] / den, eta: u[1] / den, pole, t })
    }

    pub fn u(&self) -> [f64; 3] {
        sphere_map(self.xi, self.eta, self.pole).0
    }

    pub fn dim(&self) -> usize {
        if self.t.is_some() {
            6
        } else {
            5
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut q = vec![self.x[0], self.x[1], self.x[2], self.xi, self.eta];
        if let Some(t) = self.t {
            q.push(t);
        }
        q
    }

    /// Chart components of the ambient tangent vector (ẋ, u̇, ṫ) at this
    /// point; `u̇` must be tangent to the sphere.
    pub fn chart_vector(&self, xdot: [f64; 3], udot: [f64; 3], tdot: f64) -> Vec<f64> {
        let u = self.u();
        let sg = self.pole.sign();
        let den = 1.0 - sg * u[2];
        // ξ = u1/(1 - σ u3), η = u2/(1 - σ u3)
        let dxi = udot[0] / den + sg * u[0] * udot[2] / (den * den);
        let deta = udot[1] / den + sg * u[1] * udot[2] / (den * den);
        let mut v = vec![xdot[0], xdot[1], xdot[2], dxi, deta];
        if self.t.is_some() {
            v.push(tdot);
        }
        v
    }
}

/// Uniform point on S².
pub fn random_unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

/// Uniform point on S² at least `POLE_MARGIN` away from both poles.
pub fn random_unit_off_poles<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let u = random_unit(rng);
        if 1.0 - u[2].abs() > POLE_MARGIN * POLE_MARGIN {
            return u;
        }
    }
}

/// Random tangent vector to S² at u.
pub fn random_tangent<R: Rng>(rng: &mut R, u: [f64; 3]) -> [f64; 3] {
    let w: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let dot = w[0] * u[0] + w[1] * u[1] + w[2] * u[2];
    std::array::from_fn(|i| w[i] - dot * u[i])
}
