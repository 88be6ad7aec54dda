//! Finite-difference checks of the tube: the pullback of the canonical form
//! and the Tube Condition on sampled direction pairs.

use nalgebra::{Matrix3, Matrix6, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{omega_canonical, omega_y, tube_f_matrix, tube_forward, SlicePoint, TubeConfig};
use crate::error::{Error, Result};
use crate::so3::{exp_so3, log_so3, vee_unchecked, Rotation};

/// Max-abs entry of `DPhi^T Omega_can DPhi - Omega_Y` at `p`, with the
/// Jacobian taken by central differences of step `fd_step`. Group directions
/// are perturbed as `R exp(t e_i)` to match the left-trivialised `xi`.
pub fn pullback_residual(cfg: &TubeConfig, p: &SlicePoint, fd_step: f64) -> Result<f64> {
    // Keep ten steps clear of the boundary in every direction.
    let reach = 10.0 * fd_step;
    let bound = cfg.eta_bound(p.nu - reach);
    if p.nu - reach <= -cfg.mu0 || p.eta.norm() + 2.0 * reach >= bound {
        return Err(Error::OutOfDomain { nu: p.nu, eta_norm: p.eta.norm(), bound });
    }
    let base = tube_forward(cfg, p)?;
    let st = base.s.inverse();
    let mut jac = Matrix6::zeros();
    for i in 0..6 {
        let shifted = |t: f64| -> Result<_> {
            let mut q = *p;
            match i {
                0..=2 => q.r = p.r * Rotation::exp(&(Vector3::ith(i, 1.0) * t)),
                3 => q.nu += t,
                _ => q.eta[i - 4] += t,
            }
            tube_forward(cfg, &q)
        };
        let (plus, minus) = (shifted(fd_step)?, shifted(-fd_step)?);
        let xi = (log_so3(&(st.matrix() * plus.s.matrix()))? - log_so3(&(st.matrix() * minus.s.matrix()))?) / (2.0 * fd_step);
        let rho = (plus.mu - minus.mu) / (2.0 * fd_step);
        jac.fixed_view_mut::<3, 1>(0, i).copy_from(&xi);
        jac.fixed_view_mut::<3, 1>(3, i).copy_from(&rho);
    }
    let pulled = jac.transpose() * omega_canonical(&base.mu) * jac;
    Ok((pulled - omega_y(cfg, p.nu)).amax())
}

/// Tangent vector of the slice fibre: momentum shift `nu_dot` and `zeta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceDirection {
    pub nu_dot: f64,
    pub zeta: Vector2<f64>,
}

impl SliceDirection {
    pub fn new(nu_dot: f64, zeta: Vector2<f64>) -> Self {
        SliceDirection { nu_dot, zeta }
    }
}

/// `Theta(v) = F^{-1} DF(nu, eta) v` by central differences.
fn theta(cfg: &TubeConfig, nu: f64, eta: &Vector2<f64>, v: &SliceDirection, h: f64) -> Vector3<f64> {
    let f = tube_f_matrix(cfg, nu, eta);
    let fp = tube_f_matrix(cfg, nu + h * v.nu_dot, &(eta + v.zeta * h));
    let fm = tube_f_matrix(cfg, nu - h * v.nu_dot, &(eta - v.zeta * h));
    let m: Matrix3<f64> = f.transpose() * (fp - fm) / (2.0 * h);
    vee_unchecked(&((m - m.transpose()) * 0.5))
}

/// Residual of the Tube Condition at `(nu, eta)` on the pair `(v1, v2)`:
/// `<mu + nu, [Theta v1, Theta v2]> + <nu_dot2, Theta v1> - <nu_dot1, Theta v2>
///  - <mu, [zeta1, zeta2]>`.
pub fn tube_condition_residual(
    cfg: &TubeConfig,
    nu: f64,
    eta: &Vector2<f64>,
    v1: &SliceDirection,
    v2: &SliceDirection,
    fd_step: f64,
) -> Result<f64> {
    cfg.check_domain(nu, eta)?;
    let t1 = theta(cfg, nu, eta, v1, fd_step);
    let t2 = theta(cfg, nu, eta, v2, fd_step);
    let lhs = (cfg.mu0 + nu) * t1.cross(&t2).z + v2.nu_dot * t1.z - v1.nu_dot * t2.z;
    let rhs = cfg.mu0 * (v1.zeta.x * v2.zeta.y - v1.zeta.y * v2.zeta.x);
    Ok(lhs - rhs)
}

/// Direction-pair families used to probe the Tube Condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionCase {
    /// Both directions purely along `nu`.
    NuNu,
    /// A `nu` direction against a `zeta` orthogonal to `eta`.
    NuZeta,
    /// `zeta1`, `zeta2` both parallel to `eta`, arbitrary `nu_dot`.
    ParallelParallel,
    /// `zeta1`, `zeta2` both orthogonal to `eta`, arbitrary `nu_dot`.
    PerpPerp,
    /// `zeta1` parallel and `zeta2` orthogonal to `eta`.
    ParallelPerp,
}

impl DirectionCase {
    pub const ALL: [DirectionCase; 5] =
        [DirectionCase::NuNu, DirectionCase::NuZeta, DirectionCase::ParallelParallel, DirectionCase::PerpPerp, DirectionCase::ParallelPerp];

    pub fn name(&self) -> &'static str {
        match self {
            DirectionCase::NuNu => "nu-nu",
            DirectionCase::NuZeta => "nu-zeta",
            DirectionCase::ParallelParallel => "zeta-parallel",
            DirectionCase::PerpPerp => "zeta-perp",
            DirectionCase::ParallelPerp => "zeta-parallel-perp",
        }
    }
}

/// Draws a base point in 80% of the domain (with `|eta|` kept off zero so
/// "parallel to eta" is meaningful) and a direction pair of the given family.
pub fn sample_case(cfg: &TubeConfig, case: DirectionCase, rng: &mut impl Rng) -> (f64, Vector2<f64>, SliceDirection, SliceDirection) {
    let mu0 = cfg.mu0;
    let nu = rng.gen_range(-0.8 * mu0..0.8 * mu0);
    let radius = rng.gen_range(0.05..0.8) * cfg.eta_bound(nu);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let dir = Vector2::new(phi.cos(), phi.sin());
    let perp = Vector2::new(-dir.y, dir.x);
    let eta = dir * radius;
    let mut s = || rng.gen_range(-1.0..1.0);
    let (v1, v2) = match case {
        DirectionCase::NuNu => (SliceDirection::new(s(), Vector2::zeros()), SliceDirection::new(s(), Vector2::zeros())),
        DirectionCase::NuZeta => (SliceDirection::new(s(), Vector2::zeros()), SliceDirection::new(0.0, perp * s())),
        DirectionCase::ParallelParallel => (SliceDirection::new(s(), dir * s()), SliceDirection::new(s(), dir * s())),
        DirectionCase::PerpPerp => (SliceDirection::new(s(), perp * s()), SliceDirection::new(s(), perp * s())),
        DirectionCase::ParallelPerp => (SliceDirection::new(0.0, dir * s()), SliceDirection::new(0.0, perp * s())),
    };
    (nu, eta, v1, v2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: DirectionCase,
    pub mu0: f64,
    pub draws: usize,
    pub max_residual: f64,
}

pub fn run_case_family(cfg: &TubeConfig, case: DirectionCase, draws: usize, seed: u64, fd_step: f64) -> Result<CaseReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0f64;
    for _ in 0..draws {
        let (nu, eta, v1, v2) = sample_case(cfg, case, &mut rng);
        max_residual = max_residual.max(tube_condition_residual(cfg, nu, &eta, &v1, &v2, fd_step)?.abs());
    }
    Ok(CaseReport { case, mu0: cfg.mu0, draws, max_residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub mu0: f64,
    pub points: usize,
    pub coverage: f64,
    pub max_residual: f64,
}

/// Pullback residual over an `n^3` grid in `(nu, |eta|, angle)` covering the
/// fraction `coverage` of the domain: `nu` in `[-c mu0, c mu0]` and `|eta|`
/// up to `c` times the bound at that `nu`. A random rotation is used for `R`.
pub fn verify_pullback_grid(cfg: &TubeConfig, n: usize, coverage: f64, fd_step: f64, seed: u64) -> Result<GridReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = Rotation::from_matrix_unchecked(exp_so3(&Vector3::new(rng.gen(), rng.gen(), rng.gen())));
    let lerp = |k: usize| if n == 1 { 0.5 } else { k as f64 / (n - 1) as f64 };
    let points: Vec<SlicePoint> = (0..n * n * n)
        .map(|idx| {
            let (a, b, c) = (idx / (n * n), (idx / n) % n, idx % n);
            let nu = cfg.mu0 * coverage * (2.0 * lerp(a) - 1.0);
            let radius = coverage * cfg.eta_bound(nu) * lerp(b);
            let phi = std::f64::consts::TAU * c as f64 / n as f64;
            SlicePoint::new(r, nu, Vector2::new(phi.cos(), phi.sin()) * radius)
        })
        .collect();
    let residuals: Result<Vec<f64>> = points.par_iter().map(|p| pullback_residual(cfg, p, fd_step)).collect();
    let max_residual = residuals?.into_iter().fold(0.0, f64::max);
    Ok(GridReport { mu0: cfg.mu0, points: points.len(), coverage, max_residual })
}
