//! Rotation group SO(3), its Lie algebra and coadjoint orbits.
//!
//! Algebra elements and momenta are plain `Vector3<f64>`; the hat map
//! identifies so(3) with R^3 so that the bracket is the cross product and
//! the pairing with so(3)* is the dot product.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type AlgebraVector = Vector3<f64>;
pub type CoadjointPoint = Vector3<f64>;

const SMALL_ANGLE: f64 = 1e-4;
const ROTATION_TOL: f64 = 1e-9;
const NEAR_PI_TRACE: f64 = 1e-9;

/// Proper orthogonal 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Checks `R^T R = I` and `det R = 1` to `1e-9`.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let orthogonality = (m.transpose() * m - Matrix3::identity()).norm();
        let determinant = m.determinant();
        if !orthogonality.is_finite() || orthogonality > ROTATION_TOL || (determinant - 1.0).abs() > ROTATION_TOL {
            return Err(Error::NotARotation { orthogonality, determinant });
        }
        Ok(Rotation(m))
    }

    /// Wraps a matrix the caller already knows to be a rotation.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    pub fn exp(v: &AlgebraVector) -> Self {
        Rotation(exp_so3(v))
    }

    pub fn about_z(angle: f64) -> Self {
        Self::exp(&Vector3::new(0.0, 0.0, angle))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn log(&self) -> Result<AlgebraVector> {
        log_so3(&self.0)
    }

    pub fn act(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Polar re-orthonormalisation; keeps long integrations on the group.
    pub fn renormalized(&self) -> Self {
        let svd = self.0.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * vt;
        if r.determinant() < 0.0 {
            let mut d = Matrix3::identity();
            d[(2, 2)] = -1.0;
            r = u * d * vt;
        }
        Rotation(r)
    }

    /// Geodesic distance `|log(self^T other)|`, with the angle taken from
    /// the trace so it stays defined at pi.
    pub fn angle_to(&self, other: &Rotation) -> f64 {
        let d = self.0.transpose() * other.0;
        let skew = vee_unchecked(&(d - d.transpose())) * 0.5;
        skew.norm().atan2((d.trace() - 1.0) * 0.5)
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<&Rotation> for &Rotation {
    type Output = Rotation;
    fn mul(self, rhs: &Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

pub fn hat(v: &AlgebraVector) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn vee(m: &Matrix3<f64>) -> Result<AlgebraVector> {
    let defect = (m + m.transpose()).norm();
    if defect > 1e-12 * (1.0 + m.norm()) {
        return Err(Error::NotSkew(defect));
    }
    Ok(vee_unchecked(m))
}

pub(crate) fn vee_unchecked(m: &Matrix3<f64>) -> AlgebraVector {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Rodrigues formula. Below `|v| = 1e-4` the coefficients come from their
/// Taylor series.
pub fn exp_so3(v: &AlgebraVector) -> Matrix3<f64> {
    let t2 = v.norm_squared();
    let t = t2.sqrt();
    let (a, b) = if t < SMALL_ANGLE {
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        (t.sin() / t, (1.0 - t.cos()) / t2)
    };
    let k = hat(v);
    Matrix3::identity() + k * a + k * k * b
}

/// Principal logarithm, angle in `[0, pi)`.
pub fn log_so3(r: &Matrix3<f64>) -> Result<AlgebraVector> {
    let tr = r.trace();
    if tr <= -1.0 + NEAR_PI_TRACE {
        return Err(Error::AngleNearPi { trace: tr });
    }
    let c = ((tr - 1.0) * 0.5).clamp(-1.0, 1.0);
    let w = vee_unchecked(&(r - r.transpose())) * 0.5;
    let s = w.norm();
    let theta = s.atan2(c);
    if theta < SMALL_ANGLE {
        // theta / sin(theta) = 1 + theta^2/6 + 7 theta^4/360
        let t2 = theta * theta;
        return Ok(w * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0));
    }
    if c > -0.5 {
        return Ok(w * (theta / s));
    }
    // Near pi the skew part is small; read the axis off the symmetric part.
    let nn = (r + r.transpose() - Matrix3::identity() * (2.0 * c)) / (2.0 * (1.0 - c));
    let i = (0..3).max_by(|&a, &b| nn[(a, a)].total_cmp(&nn[(b, b)])).unwrap();
    let mut axis = nn.column(i) / nn[(i, i)].sqrt();
    if axis.dot(&w) < 0.0 {
        axis = -axis;
    }
    Ok(axis.normalize() * theta)
}

/// `ad_x y = [x, y] = x × y`.
pub fn ad(x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
    x.cross(y)
}

/// `ad*_x mu`, defined by `<ad*_x mu, y> = <mu, [x, y]>`.
pub fn coad(x: &AlgebraVector, mu: &CoadjointPoint) -> CoadjointPoint {
    mu.cross(x)
}

/// `Ad_g v = g v` under the hat identification.
pub fn big_ad(g: &Rotation, v: &AlgebraVector) -> AlgebraVector {
    g.0 * v
}

/// Coadjoint action `g · mu = Ad*_{g^{-1}} mu = g mu`.
pub fn big_coad(g: &Rotation, mu: &CoadjointPoint) -> CoadjointPoint {
    g.0 * mu
}

/// Kirillov-Kostant-Souriau form on the orbit through `mu`, evaluated on the
/// tangent vectors generated by `eta1` and `eta2` (that is `-ad*_{eta_i} mu`).
/// `sign` selects the orbit symplectic form `± <mu, [eta1, eta2]>`.
pub fn kks_form(mu: &CoadjointPoint, eta1: &AlgebraVector, eta2: &AlgebraVector, sign: f64) -> f64 {
    sign * mu.dot(&eta1.cross(eta2))
}

/// KKS form on explicit tangent vectors `t1`, `t2` at `mu`. Each must be
/// tangent to the sphere `|mu| = const`; the generators are recovered as the
/// components orthogonal to `mu` of `mu × t / |mu|^2`.
pub fn kks_form_tangent(mu: &CoadjointPoint, t1: &Vector3<f64>, t2: &Vector3<f64>, sign: f64) -> Result<f64> {
    let m2 = mu.norm_squared();
    for t in [t1, t2] {
        let defect = mu.dot(t).abs() / (mu.norm() * t.norm()).max(f64::MIN_POSITIVE);
        if defect > 1e-9 {
            return Err(Error::NotTangent(defect));
        }
    }
    // t = eta × mu  =>  eta_perp = mu × t / |mu|^2
    let e1 = mu.cross(t1) / m2;
    let e2 = mu.cross(t2) / m2;
    Ok(kks_form(mu, &e1, &e2, sign))
}
