//! Simple mechanical systems `T*Q` with a free `SO(3)` action, written in
//! Palais slice coordinates `q = R (q0 + B s)`.
//!
//! The locked kinetic metric splits into the inertia tensor `I(s)`, the
//! coupling `C(s)` and the internal metric `m(s)`. From these come the
//! connection `A = I^{-1} C` and the reduced metric `M = m - C^T I^{-1} C`,
//! and the Hamiltonian in `(mu, s, sigma)` reads
//! `1/2 mu^T I^{-1} mu + 1/2 (sigma - A^T mu)^T M^{-1} (sigma - A^T mu) + V(s)`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::dynamics::{IntegrationOptions, Ode};
use crate::so3::{hat, Rotation};
use crate::tube::{tube_momentum_closed_form, tube_momentum_jacobian, TubeConfig};

/// Kinetic metric blocks at one slice point.
#[derive(Clone, Debug, PartialEq)]
pub struct LockedBlocks {
    pub inertia: Matrix3<f64>,
    pub coupling: DMatrix<f64>,
    pub internal: DMatrix<f64>,
}

/// Derived quantities used by the Hamiltonian: `I^{-1}`, `A`, `M^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedMetric {
    pub inertia_inv: Matrix3<f64>,
    pub connection: DMatrix<f64>,
    pub internal_inv: DMatrix<f64>,
}

impl LockedBlocks {
    pub fn slice_dim(&self) -> usize {
        self.internal.nrows()
    }

    pub fn reduced(&self) -> Result<ReducedMetric> {
        let inertia_inv = self.inertia.try_inverse().ok_or_else(|| Error::SingularBlock("locked inertia tensor".into()))?;
        let ii = DMatrix::from_column_slice(3, 3, inertia_inv.as_slice());
        let connection = &ii * &self.coupling;
        let reduced = &self.internal - self.coupling.transpose() * &connection;
        let internal_inv = if reduced.nrows() == 0 {
            reduced
        } else {
            reduced.try_inverse().ok_or_else(|| Error::SingularBlock("reduced internal metric".into()))?
        };
        Ok(ReducedMetric { inertia_inv, connection, internal_inv })
    }
}

/// A mechanical system seen through a slice at its base configuration.
pub trait MechSystem: Sync {
    fn slice_dim(&self) -> usize;
    fn blocks(&self, s: &DVector<f64>) -> Result<LockedBlocks>;
    fn potential(&self, s: &DVector<f64>) -> f64;
}

/// Free rigid body: no shape space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidBodySystem {
    pub inertia: Vector3<f64>,
}

impl MechSystem for RigidBodySystem {
    fn slice_dim(&self) -> usize {
        0
    }

    fn blocks(&self, _s: &DVector<f64>) -> Result<LockedBlocks> {
        Ok(LockedBlocks {
            inertia: Matrix3::from_diagonal(&self.inertia),
            coupling: DMatrix::zeros(3, 0),
            internal: DMatrix::zeros(0, 0),
        })
    }

    fn potential(&self, _s: &DVector<f64>) -> f64 {
        0.0
    }
}

/// Potential of a point cloud. Springs join consecutive particles; the
/// optional anchor term pulls every particle to the sphere `|q_i| = radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Spring {
        k: f64,
        rest: f64,
        #[serde(default)]
        anchor_k: f64,
        #[serde(default)]
        anchor_radius: f64,
    },
}

impl Potential {
    pub fn value(&self, q: &DVector<f64>) -> f64 {
        let Potential::Spring { k, rest, anchor_k, anchor_radius } = *self;
        let n = q.len() / 3;
        let p = |i: usize| Vector3::new(q[3 * i], q[3 * i + 1], q[3 * i + 2]);
        let springs: f64 = (1..n).map(|i| 0.5 * k * ((p(i) - p(i - 1)).norm() - rest).powi(2)).sum();
        let anchors: f64 = (0..n).map(|i| 0.5 * anchor_k * (p(i).norm() - anchor_radius).powi(2)).sum();
        springs + anchors
    }
}

/// Point masses in R^3 under the diagonal rotation action.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloudSystem {
    masses: Vec<f64>,
    q0: DVector<f64>,
    potential: Potential,
    /// Mass-orthonormal basis of the slice, one column per shape coordinate.
    basis: DMatrix<f64>,
}

/// `so(3)` generators at `q`: column `a` is `e_a × q_i` stacked over particles.
pub fn generators(q: &DVector<f64>) -> DMatrix<f64> {
    let n = q.len() / 3;
    let mut g = DMatrix::zeros(q.len(), 3);
    for i in 0..n {
        let qi = Vector3::new(q[3 * i], q[3 * i + 1], q[3 * i + 2]);
        g.view_mut((3 * i, 0), (3, 3)).copy_from(&(-hat(&qi)));
    }
    g
}

impl PointCloudSystem {
    pub fn new(masses: Vec<f64>, q0: Vec<f64>, potential: Potential) -> Result<Self> {
        if masses.is_empty() || q0.len() != 3 * masses.len() {
            return Err(Error::InvalidConfig(format!("{} masses need {} coordinates, got {}", masses.len(), 3 * masses.len(), q0.len())));
        }
        if masses.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidConfig("masses must be positive".into()));
        }
        let q0 = DVector::from_vec(q0);
        let basis = slice_basis(&masses, &q0)?;
        Ok(PointCloudSystem { masses, q0, potential, basis })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn q0(&self) -> &DVector<f64> {
        &self.q0
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn potential_spec(&self) -> &Potential {
        &self.potential
    }

    pub fn config_dim(&self) -> usize {
        self.q0.len()
    }

    /// Shape configuration `q0 + B s`.
    pub fn shape(&self, s: &DVector<f64>) -> DVector<f64> {
        &self.q0 + &self.basis * s
    }

    pub fn mass_diagonal(&self) -> DVector<f64> {
        DVector::from_iterator(self.q0.len(), self.masses.iter().flat_map(|&m| [m; 3]))
    }

    /// Same system with the base configuration moved to `q0 + B s`.
    pub fn rebased(&self, s: &DVector<f64>) -> Result<Self> {
        Self::new(self.masses.clone(), self.shape(s).as_slice().to_vec(), self.potential)
    }

    /// Energy `1/2 p^T M^{-1} p + V(q)` on `T*R^n`.
    pub fn cotangent_hamiltonian(&self, q: &DVector<f64>, p: &DVector<f64>) -> f64 {
        let m = self.mass_diagonal();
        0.5 * p.component_div(&m).dot(p) + self.potential.value(q)
    }
}

fn slice_basis(masses: &[f64], q0: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = q0.len();
    let sqrt_m = DVector::from_iterator(n, masses.iter().flat_map(|&m| [m.sqrt(); 3]));
    let g = generators(q0);
    let gm = DMatrix::from_fn(n, 3, |r, c| sqrt_m[r] * g[(r, c)]);
    let sv = gm.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smax > 0.0) || smin < 1e-8 * smax {
        return Err(Error::NotFreeAction);
    }
    // Complement of the orbit directions in mass-weighted coordinates.
    let gram = gm.transpose() * &gm;
    let proj = DMatrix::identity(n, n) - &gm * gram.try_inverse().ok_or(Error::NotFreeAction)? * gm.transpose();
    let eig = proj.symmetric_eigen();
    let mut cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    cols.sort_by(|&a, &b| {
        let key = |i: usize| eig.eigenvectors.column(i).iamax();
        key(a).cmp(&key(b))
    });
    let mut basis = DMatrix::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).clone_owned();
        if v[v.iamax()] < 0.0 {
            v = -v;
        }
        basis.set_column(j, &v.component_div(&sqrt_m));
    }
    Ok(basis)
}

impl MechSystem for PointCloudSystem {
    fn slice_dim(&self) -> usize {
        self.basis.ncols()
    }

    fn blocks(&self, s: &DVector<f64>) -> Result<LockedBlocks> {
        let q = self.shape(s);
        let m = self.mass_diagonal();
        let g = generators(&q);
        let mg = DMatrix::from_fn(g.nrows(), 3, |r, c| m[r] * g[(r, c)]);
        let ii = g.transpose() * &mg;
        Ok(LockedBlocks {
            inertia: Matrix3::from_fn(|r, c| ii[(r, c)]),
            coupling: mg.transpose() * &self.basis,
            internal: self.basis.transpose() * DMatrix::from_diagonal(&m) * &self.basis,
        })
    }

    fn potential(&self, s: &DVector<f64>) -> f64 {
        self.potential.value(&self.shape(s))
    }
}

/// `H(mu, s, sigma)` on `so(3)* × T*S`.
pub fn hamiltonian_sms(sys: &dyn MechSystem, mu: &Vector3<f64>, s: &DVector<f64>, sigma: &DVector<f64>) -> Result<f64> {
    let red = sys.blocks(s)?.reduced()?;
    let w = sigma - red.connection.transpose() * DVector::from_column_slice(mu.as_slice());
    Ok(0.5 * mu.dot(&(red.inertia_inv * mu)) + 0.5 * w.dot(&(&red.internal_inv * &w)) + sys.potential(s))
}

/// Analytic `(dH/dmu, dH/dsigma)`.
pub fn hamiltonian_sms_momentum_gradient(
    sys: &dyn MechSystem,
    mu: &Vector3<f64>,
    s: &DVector<f64>,
    sigma: &DVector<f64>,
) -> Result<(Vector3<f64>, DVector<f64>)> {
    let red = sys.blocks(s)?.reduced()?;
    let w = sigma - red.connection.transpose() * DVector::from_column_slice(mu.as_slice());
    let d_sigma = &red.internal_inv * &w;
    let d_mu = red.inertia_inv * mu - Vector3::from_iterator((&red.connection * &d_sigma).iter().copied());
    Ok((d_mu, d_sigma))
}

/// Central-difference gradient of `f` with step `h`.
pub(crate) fn fd_gradient(f: impl Fn(&DVector<f64>) -> Result<f64>, x: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    let mut g = DVector::zeros(x.len());
    for i in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(&xp)? - f(&xm)?) / (2.0 * h);
    }
    Ok(g)
}

/// `dH/ds` by central differences at fixed `(mu, sigma)`.
pub fn hamiltonian_sms_shape_gradient(
    sys: &dyn MechSystem,
    mu: &Vector3<f64>,
    s: &DVector<f64>,
    sigma: &DVector<f64>,
    fd_step: f64,
) -> Result<DVector<f64>> {
    fd_gradient(|x| hamiltonian_sms(sys, mu, x, sigma), s, fd_step)
}

/// Which effective potential the third relative-equilibrium condition uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmendedConvention {
    /// `V + 1/2 mu^T I^{-1} mu`, the amended potential.
    Amended,
    /// `V + mu^T I^{-1} mu`, without the factor one half.
    Unhalved,
}

impl AmendedConvention {
    fn factor(self) -> f64 {
        match self {
            AmendedConvention::Amended => 0.5,
            AmendedConvention::Unhalved => 1.0,
        }
    }
}

pub fn amended_potential(sys: &dyn MechSystem, mu: &Vector3<f64>, s: &DVector<f64>, convention: AmendedConvention) -> Result<f64> {
    let red = sys.blocks(s)?.reduced()?;
    Ok(sys.potential(s) + convention.factor() * mu.dot(&(red.inertia_inv * mu)))
}

/// Residuals of the three relative-equilibrium conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct RelEqResidual {
    /// `sigma - A^T mu`.
    pub momentum: DVector<f64>,
    /// `mu × I^{-1} mu`.
    pub alignment: Vector3<f64>,
    /// `d/ds` of the effective potential.
    pub shape_gradient: DVector<f64>,
}

impl RelEqResidual {
    pub fn max_abs(&self) -> f64 {
        self.momentum.amax().max(self.alignment.amax()).max(self.shape_gradient.amax())
    }
}

pub const SHAPE_FD_STEP: f64 = 1e-5;

pub fn relative_equilibrium_residual(
    sys: &dyn MechSystem,
    mu: &Vector3<f64>,
    s: &DVector<f64>,
    sigma: &DVector<f64>,
    convention: AmendedConvention,
) -> Result<RelEqResidual> {
    let red = sys.blocks(s)?.reduced()?;
    let momentum = sigma - red.connection.transpose() * DVector::from_column_slice(mu.as_slice());
    let alignment = mu.cross(&(red.inertia_inv * mu));
    let shape_gradient = fd_gradient(|x| amended_potential(sys, mu, x, convention), s, SHAPE_FD_STEP)?;
    Ok(RelEqResidual { momentum, alignment, shape_gradient })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelativeEquilibrium {
    pub s: DVector<f64>,
    pub sigma: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Newton iteration on the shape condition with a finite-difference Hessian,
/// then `sigma = A^T mu`.
pub fn find_relative_equilibrium(
    sys: &dyn MechSystem,
    mu: &Vector3<f64>,
    s_guess: &DVector<f64>,
    convention: AmendedConvention,
    tol: f64,
) -> Result<RelativeEquilibrium> {
    const MAX_ITER: usize = 50;
    let grad = |x: &DVector<f64>| fd_gradient(|y| amended_potential(sys, mu, y, convention), x, SHAPE_FD_STEP);
    let k = sys.slice_dim();
    let mut s = s_guess.clone();
    let mut g = grad(&s)?;
    let mut iterations = 0;
    while g.amax() > tol && iterations < MAX_ITER {
        let h = 1e-4;
        let mut hess = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut sp = s.clone();
            let mut sm = s.clone();
            sp[j] += h;
            sm[j] -= h;
            hess.set_column(j, &((grad(&sp)? - grad(&sm)?) / (2.0 * h)));
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let step = hess.lu().solve(&(-&g)).ok_or_else(|| Error::SingularBlock("amended potential Hessian".into()))?;
        // Backtrack on the gradient norm to stay robust far from the root.
        let mut t = 1.0;
        loop {
            let trial = &s + &step * t;
            if let Ok(gt) = grad(&trial) {
                if gt.norm() < g.norm() || t < 1e-3 {
                    s = trial;
                    g = gt;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                return Err(Error::NonConvergence { what: "relative equilibrium Newton", iterations, residual: g.amax() });
            }
        }
        iterations += 1;
    }
    if g.amax() > tol {
        return Err(Error::NonConvergence { what: "relative equilibrium Newton", iterations, residual: g.amax() });
    }
    let red = sys.blocks(&s)?.reduced()?;
    let sigma = red.connection.transpose() * DVector::from_column_slice(mu.as_slice());
    let residual = relative_equilibrium_residual(sys, mu, &s, &sigma, convention)?.max_abs();
    Ok(RelativeEquilibrium { s, sigma, residual, iterations })
}

/// Symmetric two-particle system: equal masses `m` at `(±r, 0, z)` with
/// `r^2 + z^2 = anchor_radius^2`, spinning about `e3`. `r` is a first guess.
pub fn two_particle_system(mass: f64, r: f64, anchor_radius: f64, k: f64, rest: f64, anchor_k: f64) -> Result<PointCloudSystem> {
    let z = (anchor_radius * anchor_radius - r * r).max(0.0).sqrt();
    PointCloudSystem::new(vec![mass, mass], vec![r, 0.0, z, -r, 0.0, z], Potential::Spring { k, rest, anchor_k, anchor_radius })
}

/// State of the coupled system on the slice (the attitude is carried apart).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledState {
    pub nu: f64,
    pub eta: Vector2<f64>,
    pub s: DVector<f64>,
    pub sigma: DVector<f64>,
}

/// `h(nu, eta, s, sigma) = H(mu(nu, eta), s, sigma)` with the exact tube.
pub fn coupled_hamiltonian(cfg: &TubeConfig, sys: &dyn MechSystem, x: &CoupledState) -> Result<f64> {
    cfg.check_domain(x.nu, &x.eta)?;
    hamiltonian_sms(sys, &tube_momentum_closed_form(cfg.mu0, x.nu, &x.eta), &x.s, &x.sigma)
}

/// Vector field of an invariant Hamiltonian on the slice of `T*Q`:
/// `eta_dot = -(1/mu0) J grad_eta h`, `s_dot = dh/dsigma`,
/// `sigma_dot = -dh/ds`, body rotation rate `xi_z = dh/dnu`, `nu_dot = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledField {
    pub eta_dot: Vector2<f64>,
    pub s_dot: DVector<f64>,
    pub sigma_dot: DVector<f64>,
    pub xi_z: f64,
}

pub fn coupled_vector_field(cfg: &TubeConfig, sys: &dyn MechSystem, x: &CoupledState) -> Result<CoupledField> {
    cfg.check_domain(x.nu, &x.eta)?;
    let mu = tube_momentum_closed_form(cfg.mu0, x.nu, &x.eta);
    let (d_mu, d_sigma) = hamiltonian_sms_momentum_gradient(sys, &mu, &x.s, &x.sigma)?;
    let chain = tube_momentum_jacobian(cfg.mu0, x.nu, &x.eta).transpose() * d_mu;
    let d_s = hamiltonian_sms_shape_gradient(sys, &mu, &x.s, &x.sigma, SHAPE_FD_STEP)?;
    Ok(CoupledField {
        eta_dot: Vector2::new(-chain[2], chain[1]) / cfg.mu0,
        s_dot: d_sigma,
        sigma_dot: -d_s,
        xi_z: chain[0],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoupledSample {
    pub t: f64,
    pub state: CoupledState,
    pub r: Rotation,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoupledTrajectory {
    pub samples: Vec<CoupledSample>,
    pub exit_time: Option<f64>,
}

/// Integrates the coupled system; stops early (with `exit_time`) when the
/// state leaves the tube domain or the metric blocks become singular.
pub fn integrate_coupled(
    cfg: &TubeConfig,
    sys: &dyn MechSystem,
    r0: &Rotation,
    start: &CoupledState,
    opts: &IntegrationOptions,
) -> Result<CoupledTrajectory> {
    let k = sys.slice_dim();
    if start.s.len() != k || start.sigma.len() != k {
        return Err(Error::InvalidConfig(format!("coupled state needs {k} shape coordinates")));
    }
    coupled_hamiltonian(cfg, sys, start)?;
    let nu = start.nu;
    let unpack = |y: &DVector<f64>| CoupledState {
        nu,
        eta: Vector2::new(y[0], y[1]),
        s: y.rows(2, k).into_owned(),
        sigma: y.rows(2 + k, k).into_owned(),
    };
    let field = |y: &DVector<f64>| {
        let f = coupled_vector_field(cfg, sys, &unpack(y)).ok()?;
        let mut out = DVector::zeros(y.len());
        out[0] = f.eta_dot.x;
        out[1] = f.eta_dot.y;
        out.rows_mut(2, k).copy_from(&f.s_dot);
        out.rows_mut(2 + k, k).copy_from(&f.sigma_dot);
        out[2 + 2 * k] = f.xi_z;
        Some(out)
    };
    let inside = |y: &DVector<f64>| coupled_hamiltonian(cfg, sys, &unpack(y)).map(f64::is_finite).unwrap_or(false);
    let energy = |y: &DVector<f64>| coupled_hamiltonian(cfg, sys, &unpack(y)).unwrap_or(f64::NAN);
    let ode = Ode { field: &field, inside: &inside, energy: &energy };
    let mut y0 = DVector::zeros(3 + 2 * k);
    y0[0] = start.eta.x;
    y0[1] = start.eta.y;
    y0.rows_mut(2, k).copy_from(&start.s);
    y0.rows_mut(2 + k, k).copy_from(&start.sigma);
    let mut samples = Vec::new();
    let exit_time = ode.run(y0, opts, |t, y| {
        let state = unpack(y);
        let h = energy(y);
        samples.push(CoupledSample { t, state, r: *r0 * Rotation::about_z(y[2 + 2 * k]), h });
    })?;
    Ok(CoupledTrajectory { samples, exit_time })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PointCloudSystem {
        PointCloudSystem::new(
            vec![1.0, 2.0],
            vec![0.8, 0.1, 0.6, -0.5, 0.2, 0.7],
            Potential::Spring { k: 3.0, rest: 1.0, anchor_k: 2.0, anchor_radius: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn slice_is_mass_orthogonal_to_orbit() {
        let sys = sample();
        let m = DMatrix::from_diagonal(&sys.mass_diagonal());
        let g = generators(sys.q0());
        assert_eq!(sys.slice_dim(), 3);
        assert!((g.transpose() * &m * sys.basis()).amax() < 1e-12);
        assert!((sys.basis().transpose() * &m * sys.basis() - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn collinear_configuration_is_rejected() {
        let r = PointCloudSystem::new(vec![1.0, 1.0], vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0], Potential::Spring {
            k: 1.0,
            rest: 1.0,
            anchor_k: 0.0,
            anchor_radius: 0.0,
        });
        assert!(matches!(r, Err(Error::NotFreeAction)));
    }

    #[test]
    fn hamiltonian_is_block_inverse_quadratic_form() {
        let sys = sample();
        let s = DVector::from_vec(vec![0.05, -0.02, 0.03]);
        let sigma = DVector::from_vec(vec![0.3, -0.1, 0.2]);
        let mu = Vector3::new(0.2, -0.4, 1.1);
        let b = sys.blocks(&s).unwrap();
        let mut k = DMatrix::zeros(6, 6);
        k.view_mut((0, 0), (3, 3)).copy_from(&b.inertia);
        k.view_mut((0, 3), (3, 3)).copy_from(&b.coupling);
        k.view_mut((3, 0), (3, 3)).copy_from(&b.coupling.transpose());
        k.view_mut((3, 3), (3, 3)).copy_from(&b.internal);
        let z = DVector::from_iterator(6, mu.iter().chain(sigma.iter()).copied());
        let direct = 0.5 * z.dot(&(k.try_inverse().unwrap() * &z)) + sys.potential(&s);
        assert!((hamiltonian_sms(&sys, &mu, &s, &sigma).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn momentum_gradient_matches_differences() {
        let sys = sample();
        let s = DVector::from_vec(vec![0.05, -0.02, 0.03]);
        let sigma = DVector::from_vec(vec![0.3, -0.1, 0.2]);
        let mu = Vector3::new(0.2, -0.4, 1.1);
        let (gm, gs) = hamiltonian_sms_momentum_gradient(&sys, &mu, &s, &sigma).unwrap();
        let d = 1e-6;
        for i in 0..3 {
            let mut mp = mu;
            let mut mm = mu;
            mp[i] += d;
            mm[i] -= d;
            let num = (hamiltonian_sms(&sys, &mp, &s, &sigma).unwrap() - hamiltonian_sms(&sys, &mm, &s, &sigma).unwrap()) / (2.0 * d);
            assert!((num - gm[i]).abs() < 1e-8);
            let mut sp = sigma.clone();
            let mut sm = sigma.clone();
            sp[i] += d;
            sm[i] -= d;
            let num = (hamiltonian_sms(&sys, &mu, &s, &sp).unwrap() - hamiltonian_sms(&sys, &mu, &s, &sm).unwrap()) / (2.0 * d);
            assert!((num - gs[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn rigid_body_reduces_to_euler_poinsot() {
        let sys = RigidBodySystem { inertia: Vector3::new(1.0, 2.0, 3.0) };
        let mu = Vector3::new(0.3, -0.2, 0.9);
        let e = DVector::zeros(0);
        let expected = 0.5 * (0.09 / 1.0 + 0.04 / 2.0 + 0.81 / 3.0);
        assert!((hamiltonian_sms(&sys, &mu, &e, &e).unwrap() - expected).abs() < 1e-15);
    }
}
