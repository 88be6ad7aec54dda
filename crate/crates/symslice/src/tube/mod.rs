//! Explicit symplectic tube for `T*SO(3)` at a momentum `mu = (0, 0, mu0)`.
//!
//! Slice coordinates are `(R, nu, eta)` with `nu` the scalar momentum shift
//! along `e3` and `eta = (eta_x, eta_y)` in the plane orthogonal to `e3`. The
//! tube element is `F(nu, eta) = exp(h eta/|eta|)` with
//! `h = 2 asin(|eta| sqrt(mu0 / (mu0 + nu)) / 2)` and the forward map is
//! `(R, nu, eta) -> (R F^{-1}, F (mu + nu))` in left-trivialised coordinates.

mod general;
mod verify;

pub use general::{general_tube_compose, MechSlicePoint};
pub use verify::{
    pullback_residual, run_case_family, sample_case, tube_condition_residual, verify_pullback_grid, CaseReport, DirectionCase,
    GridReport, SliceDirection,
};

use nalgebra::{Matrix3, Matrix6, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{exp_so3, Rotation};

/// Relative margin kept from the boundary of the tube domain.
pub const DOMAIN_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeConfig {
    pub mu0: f64,
    /// Multiplies the tube angle. Exactly 1 for the symplectic tube; other
    /// values produce a deliberately broken map for negative controls.
    pub theta_scale: f64,
}

impl TubeConfig {
    pub fn new(mu0: f64) -> Result<Self> {
        if !(mu0.is_finite() && mu0 > 0.0) {
            return Err(Error::InvalidConfig(format!("mu0 must be positive and finite, got {mu0}")));
        }
        Ok(TubeConfig { mu0, theta_scale: 1.0 })
    }

    pub fn with_theta_scale(mut self, scale: f64) -> Self {
        self.theta_scale = scale;
        self
    }

    /// Supremum of `|eta|` at a given `nu`: `2 sqrt((mu0 + nu) / mu0)`.
    pub fn eta_bound(&self, nu: f64) -> f64 {
        2.0 * ((self.mu0 + nu).max(0.0) / self.mu0).sqrt()
    }

    pub fn check_domain(&self, nu: f64, eta: &Vector2<f64>) -> Result<()> {
        let bound = self.eta_bound(nu);
        let eta_norm = eta.norm();
        let ok = nu.is_finite()
            && eta_norm.is_finite()
            && self.mu0 + nu > DOMAIN_MARGIN * self.mu0
            && eta_norm < bound - DOMAIN_MARGIN * bound.max(1.0);
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfDomain { nu, eta_norm, bound })
        }
    }

    pub fn in_domain(&self, nu: f64, eta: &Vector2<f64>) -> bool {
        self.check_domain(nu, eta).is_ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicePoint {
    pub r: Rotation,
    pub nu: f64,
    pub eta: Vector2<f64>,
}

impl SlicePoint {
    pub fn new(r: Rotation, nu: f64, eta: Vector2<f64>) -> Self {
        SlicePoint { r, nu, eta }
    }

    pub fn at_identity(nu: f64, eta: Vector2<f64>) -> Self {
        SlicePoint { r: Rotation::identity(), nu, eta }
    }
}

/// Point of `SO(3) × so(3)*` in body (left-trivialised) coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrivializedPoint {
    pub s: Rotation,
    pub mu: Vector3<f64>,
}

/// Embeds `eta` into the algebra as `(eta_x, eta_y, 0)`.
pub fn embed_eta(eta: &Vector2<f64>) -> Vector3<f64> {
    Vector3::new(eta.x, eta.y, 0.0)
}

/// `asin(y) / y`, continuous through `y = 0`.
fn asin_ratio(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        let y2 = y * y;
        1.0 + y2 / 6.0 + 3.0 * y2 * y2 / 40.0
    } else {
        y.asin() / y
    }
}

/// Tube angle `h(nu, |eta|)`.
pub fn tube_angle(cfg: &TubeConfig, nu: f64, eta_norm: f64) -> f64 {
    let c = (cfg.mu0 / (cfg.mu0 + nu)).sqrt();
    cfg.theta_scale * 2.0 * (0.5 * eta_norm * c).asin()
}

/// Tube angle with its partial derivatives `(h, dh/d|eta|, dh/dnu)` for the
/// exact tube.
pub fn tube_angle_partials(cfg: &TubeConfig, nu: f64, eta_norm: f64) -> (f64, f64, f64) {
    let m = cfg.mu0 + nu;
    let c = (cfg.mu0 / m).sqrt();
    let x = eta_norm * c;
    let h = 2.0 * (0.5 * x).asin();
    let dh_dx = 1.0 / (0.5 * h).cos();
    (h, dh_dx * c, dh_dx * eta_norm * (-0.5 * c / m))
}

/// Residual of the first scalar condition on the tube angle:
/// `(mu0 + nu) h_|eta| sin(h) / |eta| - mu0`.
pub fn angle_identity_parallel_perp(cfg: &TubeConfig, nu: f64, eta_norm: f64) -> f64 {
    let (h, h_r, _) = tube_angle_partials(cfg, nu, eta_norm);
    (cfg.mu0 + nu) * h_r * h.sin() / eta_norm - cfg.mu0
}

/// Residual of the second scalar condition on the tube angle:
/// `(mu0 + nu) h_nu cos(h/2) + sin(h/2)`.
pub fn angle_identity_nu_perp(cfg: &TubeConfig, nu: f64, eta_norm: f64) -> f64 {
    let (h, _, h_nu) = tube_angle_partials(cfg, nu, eta_norm);
    (cfg.mu0 + nu) * h_nu * (0.5 * h).cos() + (0.5 * h).sin()
}

/// Rotation vector of `F(nu, eta)`; smooth through `eta = 0`.
pub fn tube_log(cfg: &TubeConfig, nu: f64, eta: &Vector2<f64>) -> Vector3<f64> {
    let c = (cfg.mu0 / (cfg.mu0 + nu)).sqrt();
    let y = 0.5 * c * eta.norm();
    embed_eta(eta) * (cfg.theta_scale * c * asin_ratio(y))
}

/// Tube element `F(nu, eta)` as a matrix. No domain check.
pub fn tube_f_matrix(cfg: &TubeConfig, nu: f64, eta: &Vector2<f64>) -> Matrix3<f64> {
    exp_so3(&tube_log(cfg, nu, eta))
}

pub fn tube_f(cfg: &TubeConfig, nu: f64, eta: &Vector2<f64>) -> Result<Rotation> {
    cfg.check_domain(nu, eta)?;
    Ok(Rotation::from_matrix_unchecked(tube_f_matrix(cfg, nu, eta)))
}

/// Body momentum `F (0, 0, mu0 + nu)` without domain checks.
pub(crate) fn tube_momentum_unchecked(cfg: &TubeConfig, nu: f64, eta: &Vector2<f64>) -> Vector3<f64> {
    tube_f_matrix(cfg, nu, eta) * Vector3::new(0.0, 0.0, cfg.mu0 + nu)
}

/// Body momentum of the slice point `(nu, eta)`.
pub fn tube_momentum(cfg: &TubeConfig, nu: f64, eta: &Vector2<f64>) -> Result<Vector3<f64>> {
    cfg.check_domain(nu, eta)?;
    Ok(tube_momentum_unchecked(cfg, nu, eta))
}

/// Closed form of the body momentum for the exact tube.
pub fn tube_momentum_closed_form(mu0: f64, nu: f64, eta: &Vector2<f64>) -> Vector3<f64> {
    let m = mu0 + nu;
    let r2 = eta.norm_squared();
    let root = (mu0 * m * (1.0 - mu0 * r2 / (4.0 * m))).max(0.0).sqrt();
    Vector3::new(eta.y * root, -eta.x * root, m - 0.5 * mu0 * r2)
}

/// Jacobian of the closed-form body momentum with respect to
/// `(nu, eta_x, eta_y)`, one column per coordinate.
pub fn tube_momentum_jacobian(mu0: f64, nu: f64, eta: &Vector2<f64>) -> Matrix3<f64> {
    let (ex, ey) = (eta.x, eta.y);
    let g = (mu0 * (mu0 + nu - 0.25 * mu0 * eta.norm_squared())).sqrt();
    let (g_nu, g_x, g_y) = (0.5 * mu0 / g, -0.25 * mu0 * mu0 * ex / g, -0.25 * mu0 * mu0 * ey / g);
    Matrix3::new(
        ey * g_nu, ey * g_x, g + ey * g_y,
        -ex * g_nu, -g - ex * g_x, -ex * g_y,
        1.0, -mu0 * ex, -mu0 * ey,
    )
}

pub fn tube_forward(cfg: &TubeConfig, p: &SlicePoint) -> Result<TrivializedPoint> {
    let f = tube_f(cfg, p.nu, &p.eta)?;
    Ok(TrivializedPoint { s: p.r * f.inverse(), mu: f.act(&Vector3::new(0.0, 0.0, cfg.mu0 + p.nu)) })
}

/// Inverse of [`tube_forward`]. Defined away from the antipodal ray
/// `mu = -|mu| e3`.
pub fn tube_inverse(cfg: &TubeConfig, x: &TrivializedPoint) -> Result<SlicePoint> {
    if cfg.theta_scale != 1.0 {
        return Err(Error::InvalidConfig("tube_inverse needs the exact tube (theta_scale = 1)".into()));
    }
    let mu = x.mu;
    let norm = mu.norm();
    let nu = norm - cfg.mu0;
    // |mu| + mu_3 cancels in the southern hemisphere; use rho^2 / (|mu| - mu_3).
    let rho2 = mu.x * mu.x + mu.y * mu.y;
    let denom = if mu.z >= 0.0 { norm + mu.z } else { rho2 / (norm - mu.z) };
    if !(norm > 0.0) || denom <= 1e-9 * norm.max(cfg.mu0) {
        return Err(Error::AntipodalPoint);
    }
    // |eta|^2 = 2 (|mu| - mu_3) / mu0 = 2 (mu_1^2 + mu_2^2) / (mu0 (|mu| + mu_3)),
    // direction (-mu_2, mu_1).
    let scale = (2.0 / (cfg.mu0 * denom)).sqrt();
    let eta = Vector2::new(-mu.y, mu.x) * scale;
    let f = tube_f(cfg, nu, &eta)?;
    Ok(SlicePoint { r: x.s * f, nu, eta })
}

/// Symplectic form on the slice in the ordered basis
/// `(xi_x, xi_y, xi_z, nu_dot, eta_x_dot, eta_y_dot)`:
/// blocks `(mu0 + nu) J`, `J`, `-mu0 J` with `J = [[0, 1], [-1, 0]]`.
pub fn omega_y(cfg: &TubeConfig, nu: f64) -> Matrix6<f64> {
    let mut w = Matrix6::zeros();
    for (i, v) in [(0, cfg.mu0 + nu), (2, 1.0), (4, -cfg.mu0)] {
        w[(i, i + 1)] = v;
        w[(i + 1, i)] = -v;
    }
    w
}

/// Canonical symplectic form on `SO(3) × so(3)*` at `mu` in the ordered basis
/// `(xi, rho)`: `<mu, [xi1, xi2]> + <rho2, xi1> - <rho1, xi2>`.
pub fn omega_canonical(mu: &Vector3<f64>) -> Matrix6<f64> {
    let mut w = Matrix6::zeros();
    w.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-crate::so3::hat(mu)));
    w.fixed_view_mut::<3, 3>(0, 3).copy_from(&Matrix3::identity());
    w.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-Matrix3::identity()));
    w
}

/// Area-preserving map from the disc `|eta| < 2` onto the orbit sphere of
/// radius `mu0`, minus the antipode of `mu0 e3`.
pub fn kks_area_map(mu0: f64, eta: &Vector2<f64>) -> Vector3<f64> {
    let cfg = TubeConfig { mu0, theta_scale: 1.0 };
    tube_momentum_unchecked(&cfg, 0.0, eta)
}
