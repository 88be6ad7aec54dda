//! Free rigid body in slice coordinates at a proper rotation about `e3`.

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::contour::{marching_squares, Grid};
use crate::dynamics::SliceHamiltonian;
use crate::error::{Error, Result};
use crate::tube::TubeConfig;

/// Principal moments of inertia `(I1, I2, I3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InertiaTensor(Vector3<f64>);

impl InertiaTensor {
    pub fn new(i1: f64, i2: f64, i3: f64) -> Result<Self> {
        if [i1, i2, i3].iter().any(|&i| !(i > 0.0 && i.is_finite())) {
            return Err(Error::InvalidConfig(format!("moments of inertia must be positive, got ({i1}, {i2}, {i3})")));
        }
        Ok(InertiaTensor(Vector3::new(i1, i2, i3)))
    }

    pub fn principal(&self) -> &Vector3<f64> {
        &self.0
    }
}

/// Kinetic energy `1/2 sum mu_i^2 / I_i` on `so(3)*`.
pub fn euler_poinsot_h_mu(inertia: &InertiaTensor, mu: &Vector3<f64>) -> f64 {
    0.5 * mu.component_div(&inertia.0).dot(mu)
}

/// The same energy in slice coordinates, a polynomial in `(nu, eta)`:
/// `mu0 w (eta_x^2 / 2I2 + eta_y^2 / 2I1) + u^2 / 2I3` with
/// `w = mu0 + nu - mu0 |eta|^2 / 4` and `u = mu0 + nu - mu0 |eta|^2 / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidBodySlice {
    pub inertia: InertiaTensor,
    pub mu0: f64,
}

impl RigidBodySlice {
    pub fn new(inertia: InertiaTensor, mu0: f64) -> Self {
        RigidBodySlice { inertia, mu0 }
    }
}

pub fn euler_poinsot_h_slice(inertia: &InertiaTensor, mu0: f64, nu: f64, eta: &Vector2<f64>) -> f64 {
    RigidBodySlice::new(*inertia, mu0).value(nu, eta)
}

impl SliceHamiltonian for RigidBodySlice {
    fn value(&self, nu: f64, eta: &Vector2<f64>) -> f64 {
        let [i1, i2, i3] = [self.inertia.0.x, self.inertia.0.y, self.inertia.0.z];
        let mu0 = self.mu0;
        let r2 = eta.norm_squared();
        let w = mu0 + nu - 0.25 * mu0 * r2;
        let u = mu0 + nu - 0.5 * mu0 * r2;
        let a = 0.5 * (eta.x * eta.x / i2 + eta.y * eta.y / i1);
        mu0 * w * a + 0.5 * u * u / i3
    }

    fn gradient(&self, nu: f64, eta: &Vector2<f64>) -> (f64, Vector2<f64>) {
        let [i1, i2, i3] = [self.inertia.0.x, self.inertia.0.y, self.inertia.0.z];
        let mu0 = self.mu0;
        let r2 = eta.norm_squared();
        let w = mu0 + nu - 0.25 * mu0 * r2;
        let u = mu0 + nu - 0.5 * mu0 * r2;
        let a = 0.5 * (eta.x * eta.x / i2 + eta.y * eta.y / i1);
        let d_nu = mu0 * a + u / i3;
        let dx = mu0 * (w * eta.x / i2 - 0.5 * mu0 * a * eta.x) - mu0 * u * eta.x / i3;
        let dy = mu0 * (w * eta.y / i1 - 0.5 * mu0 * a * eta.y) - mu0 * u * eta.y / i3;
        (d_nu, Vector2::new(dx, dy))
    }
}

/// Linear stability type of the rotation about `e3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Centre,
    Saddle,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub stability: Stability,
    /// Eigenvalues of the Hessian of `h(0, .)` at `eta = 0`.
    pub hessian_eigenvalues: [f64; 2],
}

/// Classifies the relative equilibrium `eta = 0` by the Hessian of the slice
/// energy, `mu0^2 diag(1/I2 - 1/I3, 1/I1 - 1/I3)`. A definite Hessian gives
/// a centre and an indefinite one a saddle. When the Hessian vanishes
/// (isotropic body) every point is an equilibrium and the rotation is
/// reported as a centre; a single zero eigenvalue is `Degenerate`.
pub fn classify_proper_rotation(inertia: &InertiaTensor, mu0: f64) -> Classification {
    let i = inertia.0;
    let hess = Matrix2::new(mu0 * mu0 * (1.0 / i.y - 1.0 / i.z), 0.0, 0.0, mu0 * mu0 * (1.0 / i.x - 1.0 / i.z));
    let e = [hess[(0, 0)], hess[(1, 1)]];
    let scale = mu0 * mu0 / i.min();
    let zero = |v: f64| v.abs() <= 1e-12 * scale;
    let stability = match (zero(e[0]), zero(e[1])) {
        (true, true) => Stability::Centre,
        (true, false) | (false, true) => Stability::Degenerate,
        _ if e[0] * e[1] > 0.0 => Stability::Centre,
        _ => Stability::Saddle,
    };
    Classification { stability, hessian_eigenvalues: e }
}

/// Contour polyline of one energy level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub level: f64,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePortrait {
    pub nu0: f64,
    pub grid: Grid,
    pub levels: Vec<f64>,
    /// Node values of `h`, NaN outside the tube domain.
    pub values: Vec<f64>,
    pub polylines: Vec<Polyline>,
}

/// Level sets of `h(nu0, .)` on `grid`, clipped to the tube domain.
pub fn phase_portrait(cfg: &TubeConfig, h: &dyn SliceHamiltonian, nu0: f64, grid: &Grid, levels: &[f64]) -> Result<PhasePortrait> {
    if grid.nx < 2 || grid.ny < 2 || !(grid.x_max > grid.x_min && grid.y_max > grid.y_min) {
        return Err(Error::InvalidConfig("portrait grid needs at least 2x2 nodes and a positive extent".into()));
    }
    if !(cfg.mu0 + nu0 > 0.0) {
        return Err(Error::OutOfDomain { nu: nu0, eta_norm: 0.0, bound: 0.0 });
    }
    let values = grid.sample(|x, y| {
        let eta = Vector2::new(x, y);
        if cfg.in_domain(nu0, &eta) {
            h.value(nu0, &eta)
        } else {
            f64::NAN
        }
    });
    let polylines = levels
        .iter()
        .flat_map(|&level| marching_squares(grid, &values, level).into_iter().map(move |points| Polyline { level, points }))
        .collect();
    Ok(PhasePortrait { nu0, grid: *grid, levels: levels.to_vec(), values, polylines })
}

/// `n` levels evenly spaced strictly inside the range of the finite node values.
pub fn default_levels(values: &[f64], n: usize) -> Vec<f64> {
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(lo < hi) {
        return Vec::new();
    }
    (1..=n).map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64).collect()
}

/// Distance from `p` to the nearest segment of any polyline.
pub fn distance_to_polylines(p: (f64, f64), lines: &[Polyline]) -> f64 {
    let seg = |a: (f64, f64), b: (f64, f64)| {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
        ((a.0 + t * dx - p.0).powi(2) + (a.1 + t * dy - p.1).powi(2)).sqrt()
    };
    lines
        .iter()
        .flat_map(|l| l.points.windows(2).map(|w| seg(w[0], w[1])))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tube::tube_momentum_closed_form;

    #[test]
    fn slice_energy_is_orbit_energy_pulled_back() {
        let inertia = InertiaTensor::new(1.0, 2.0, 3.5).unwrap();
        for &(nu, x, y) in &[(0.0, 0.3, 0.1), (0.4, -0.8, 0.6), (-0.3, 0.2, -1.1)] {
            let eta = Vector2::new(x, y);
            let mu = tube_momentum_closed_form(1.2, nu, &eta);
            let a = euler_poinsot_h_mu(&inertia, &mu);
            let b = euler_poinsot_h_slice(&inertia, 1.2, nu, &eta);
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn analytic_gradient_matches_differences() {
        let h = RigidBodySlice::new(InertiaTensor::new(1.3, 2.1, 0.7).unwrap(), 0.9);
        let (nu, eta, d) = (0.2, Vector2::new(0.4, -0.5), 1e-6);
        let (g_nu, g) = h.gradient(nu, &eta);
        let num_nu = (h.value(nu + d, &eta) - h.value(nu - d, &eta)) / (2.0 * d);
        let num_x = (h.value(nu, &(eta + Vector2::x() * d)) - h.value(nu, &(eta - Vector2::x() * d))) / (2.0 * d);
        let num_y = (h.value(nu, &(eta + Vector2::y() * d)) - h.value(nu, &(eta - Vector2::y() * d))) / (2.0 * d);
        assert!((g_nu - num_nu).abs() < 1e-9 && (g.x - num_x).abs() < 1e-9 && (g.y - num_y).abs() < 1e-9);
    }

    #[test]
    fn classification_of_principal_axes() {
        let c = |a, b, c| classify_proper_rotation(&InertiaTensor::new(a, b, c).unwrap(), 1.0).stability;
        assert_eq!(c(1.0, 2.0, 3.0), Stability::Centre);
        assert_eq!(c(3.0, 2.0, 1.0), Stability::Centre);
        assert_eq!(c(1.0, 3.0, 2.0), Stability::Saddle);
        assert_eq!(c(1.0, 1.0, 1.0), Stability::Centre);
        assert_eq!(c(1.0, 2.0, 2.0), Stability::Degenerate);
    }
}
