//! Hamiltonian dynamics in slice coordinates.
//!
//! For a `G`-invariant Hamiltonian `h(nu, eta)` the momentum shift `nu` is
//! conserved, `eta` follows `eta_dot = -(1/mu0) J grad_eta h` and the group
//! coordinate rotates about `e3` at rate `dh/dnu`. The attitude is carried as
//! `R(t) = R0 exp(theta(t) e3)`, which is exactly the group update for an
//! algebra velocity that stays in `span(e3)`.

use nalgebra::{DVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{log_so3, Rotation};
use crate::tube::{omega_y, tube_f, SlicePoint, TubeConfig};

/// Default central-difference step for Hamiltonian gradients.
pub const GRADIENT_STEP: f64 = 1e-6;

/// A `G`-invariant Hamiltonian on the slice.
pub trait SliceHamiltonian: Sync {
    fn value(&self, nu: f64, eta: &Vector2<f64>) -> f64;

    /// `(dh/dnu, grad_eta h)`.
    fn gradient(&self, nu: f64, eta: &Vector2<f64>) -> (f64, Vector2<f64>) {
        let h = GRADIENT_STEP;
        let d_nu = (self.value(nu + h, eta) - self.value(nu - h, eta)) / (2.0 * h);
        let dx = Vector2::new(h, 0.0);
        let dy = Vector2::new(0.0, h);
        let d_eta = Vector2::new(
            (self.value(nu, &(eta + dx)) - self.value(nu, &(eta - dx))) / (2.0 * h),
            (self.value(nu, &(eta + dy)) - self.value(nu, &(eta - dy))) / (2.0 * h),
        );
        (d_nu, d_eta)
    }
}

/// Adapts a closure `(nu, eta) -> h` to [`SliceHamiltonian`].
pub struct FnHamiltonian<F>(pub F);

impl<F: Fn(f64, &Vector2<f64>) -> f64 + Sync> SliceHamiltonian for FnHamiltonian<F> {
    fn value(&self, nu: f64, eta: &Vector2<f64>) -> f64 {
        (self.0)(nu, eta)
    }
}

/// Tangent vector at a slice point: body angular velocity, `nu_dot`,
/// `eta_dot`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceTangent {
    pub xi: Vector3<f64>,
    pub nu_dot: f64,
    pub eta_dot: Vector2<f64>,
}

/// Hamiltonian vector field of a general (not necessarily invariant) `H` on
/// the slice, `X = -Omega_Y^{-1} dH`. Derivatives in `R` are left-trivialised
/// and all derivatives use central differences of step `fd_step`.
pub fn full_vector_field(
    cfg: &TubeConfig,
    h: &dyn Fn(&SlicePoint) -> f64,
    p: &SlicePoint,
    fd_step: f64,
) -> Result<SliceTangent> {
    cfg.check_domain(p.nu, &p.eta)?;
    let mut grad = [0.0; 6];
    for (i, g) in grad.iter_mut().enumerate() {
        let shifted = |t: f64| {
            let mut q = *p;
            match i {
                0..=2 => q.r = p.r * Rotation::exp(&(Vector3::ith(i, 1.0) * t)),
                3 => q.nu += t,
                _ => q.eta[i - 4] += t,
            }
            h(&q)
        };
        *g = (shifted(fd_step) - shifted(-fd_step)) / (2.0 * fd_step);
    }
    let w = omega_y(cfg, p.nu);
    let x = -w.try_inverse().ok_or_else(|| Error::SingularBlock("slice symplectic form".into()))? * nalgebra::Vector6::from(grad);
    Ok(SliceTangent { xi: Vector3::new(x[0], x[1], x[2]), nu_dot: x[3], eta_dot: Vector2::new(x[4], x[5]) })
}

/// Reduced field of an invariant Hamiltonian: `eta_dot` and the rotation rate
/// `xi_z = dh/dnu` (`nu_dot = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedField {
    pub eta_dot: Vector2<f64>,
    pub xi_z: f64,
}

pub fn reduced_vector_field(cfg: &TubeConfig, h: &dyn SliceHamiltonian, nu: f64, eta: &Vector2<f64>) -> Result<ReducedField> {
    cfg.check_domain(nu, eta)?;
    Ok(reduced_field_unchecked(cfg.mu0, h, nu, eta))
}

fn reduced_field_unchecked(mu0: f64, h: &dyn SliceHamiltonian, nu: f64, eta: &Vector2<f64>) -> ReducedField {
    let (d_nu, g) = h.gradient(nu, eta);
    ReducedField { eta_dot: Vector2::new(-g.y, g.x) / mu0, xi_z: d_nu }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Rk4,
    ImplicitMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub dt: f64,
    pub t_max: f64,
    pub integrator: Integrator,
    /// Reject a step whose energy change exceeds this fraction of `|h|`.
    pub energy_tol: Option<f64>,
    /// Keep every n-th sample (the final state is always kept).
    pub record_every: usize,
}

impl IntegrationOptions {
    pub fn new(dt: f64, t_max: f64) -> Self {
        IntegrationOptions { dt, t_max, integrator: Integrator::Rk4, energy_tol: Some(1e-6), record_every: 1 }
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_energy_tol(mut self, tol: Option<f64>) -> Self {
        self.energy_tol = tol;
        self
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite() && self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("need dt > 0 and t_max >= 0, got dt = {}, t_max = {}", self.dt, self.t_max)));
        }
        Ok(())
    }
}

/// One recorded state with the reconstructed trivialised attitude `S = R F^{-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub nu: f64,
    pub eta: Vector2<f64>,
    pub r: Rotation,
    pub s: Rotation,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Time at which the trajectory reached the edge of the tube domain.
    pub exit_time: Option<f64>,
}

/// Generic fixed-step engine over a flat state vector.
pub(crate) struct Ode<'a> {
    /// `None` when the state is outside the domain of the field.
    pub field: &'a (dyn Fn(&DVector<f64>) -> Option<DVector<f64>> + 'a),
    pub inside: &'a (dyn Fn(&DVector<f64>) -> bool + 'a),
    pub energy: &'a (dyn Fn(&DVector<f64>) -> f64 + 'a),
}

impl Ode<'_> {
    fn step(&self, y: &DVector<f64>, dt: f64, integrator: Integrator) -> Option<DVector<f64>> {
        let y1 = match integrator {
            Integrator::Rk4 => {
                let k1 = (self.field)(y)?;
                let k2 = (self.field)(&(y + &k1 * (0.5 * dt)))?;
                let k3 = (self.field)(&(y + &k2 * (0.5 * dt)))?;
                let k4 = (self.field)(&(y + &k3 * dt))?;
                y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
            }
            Integrator::ImplicitMidpoint => {
                // Fixed-point iteration on y1 = y0 + dt f((y0 + y1) / 2).
                let mut y1 = y + (self.field)(y)? * dt;
                let mut last = f64::INFINITY;
                for _ in 0..200 {
                    let next = y + (self.field)(&((y + &y1) * 0.5))? * dt;
                    let change = (&next - &y1).amax();
                    y1 = next;
                    if change <= 1e-16 * (1.0 + y1.amax()) || (change >= last && change < 1e-13 * (1.0 + y1.amax())) {
                        break;
                    }
                    last = change;
                }
                y1
            }
        };
        ((self.inside)(&y1) && y1.iter().all(|v| v.is_finite())).then_some(y1)
    }

    /// Runs to `t_max`, calling `record(t, y)` on kept samples. Returns the
    /// exit time if the state left the domain, located to `1e-9` by bisection
    /// on the length of the last step.
    pub fn run(&self, y0: DVector<f64>, opts: &IntegrationOptions, mut record: impl FnMut(f64, &DVector<f64>)) -> Result<Option<f64>> {
        opts.validate()?;
        let steps = (opts.t_max / opts.dt).round() as usize;
        let mut y = y0;
        record(0.0, &y);
        for n in 0..steps {
            let t = n as f64 * opts.dt;
            let Some(y1) = self.step(&y, opts.dt, opts.integrator) else {
                let (mut lo, mut hi) = (0.0, opts.dt);
                let mut last_ok = y.clone();
                while hi - lo > 1e-10 {
                    let mid = 0.5 * (lo + hi);
                    match self.step(&y, mid, opts.integrator) {
                        Some(ym) => {
                            lo = mid;
                            last_ok = ym;
                        }
                        None => hi = mid,
                    }
                }
                record(t + lo, &last_ok);
                return Ok(Some(t + 0.5 * (lo + hi)));
            };
            if let Some(tol) = opts.energy_tol {
                let (e0, e1) = ((self.energy)(&y), (self.energy)(&y1));
                let drift = (e1 - e0).abs();
                if drift > tol * e0.abs().max(1e-12) {
                    return Err(Error::EnergyDrift { time: t + opts.dt, drift });
                }
            }
            y = y1;
            if (n + 1) % opts.record_every == 0 || n + 1 == steps {
                record((n + 1) as f64 * opts.dt, &y);
            }
        }
        Ok(None)
    }
}

/// Integrates the reduced system from `start`; the result stops early, with
/// `exit_time` set, if the trajectory reaches the edge of the tube domain.
pub fn integrate_reduced_until_exit(
    cfg: &TubeConfig,
    h: &dyn SliceHamiltonian,
    start: &SlicePoint,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    cfg.check_domain(start.nu, &start.eta)?;
    let (mu0, nu) = (cfg.mu0, start.nu);
    let field = |y: &DVector<f64>| {
        let eta = Vector2::new(y[0], y[1]);
        if !cfg.in_domain(nu, &eta) {
            return None;
        }
        let f = reduced_field_unchecked(mu0, h, nu, &eta);
        Some(DVector::from_vec(vec![f.eta_dot.x, f.eta_dot.y, f.xi_z]))
    };
    let inside = |y: &DVector<f64>| cfg.in_domain(nu, &Vector2::new(y[0], y[1]));
    let energy = |y: &DVector<f64>| h.value(nu, &Vector2::new(y[0], y[1]));
    let ode = Ode { field: &field, inside: &inside, energy: &energy };
    let mut samples = Vec::new();
    let mut err = None;
    let exit_time = ode.run(DVector::from_vec(vec![start.eta.x, start.eta.y, 0.0]), opts, |t, y| {
        let eta = Vector2::new(y[0], y[1]);
        let r = start.r * Rotation::about_z(y[2]);
        match tube_f(cfg, nu, &eta) {
            Ok(f) => samples.push(TrajectorySample { t, nu, eta, r, s: r * f.inverse(), h: h.value(nu, &eta) }),
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Trajectory { samples, exit_time })
}

/// As [`integrate_reduced_until_exit`], but leaving the domain is an error.
pub fn integrate_reduced(cfg: &TubeConfig, h: &dyn SliceHamiltonian, start: &SlicePoint, opts: &IntegrationOptions) -> Result<Trajectory> {
    let traj = integrate_reduced_until_exit(cfg, h, start, opts)?;
    match traj.exit_time {
        Some(time) => Err(Error::LeftTubeDomain { time }),
        None => Ok(traj),
    }
}

/// Unreduced attitude `S(t)` from the slice trajectory: `S = R F(nu, eta)^{-1}`.
pub fn reconstruct(cfg: &TubeConfig, samples: &[TrajectorySample]) -> Result<Vec<Rotation>> {
    samples.iter().map(|p| Ok(p.r * tube_f(cfg, p.nu, &p.eta)?.inverse())).collect()
}

/// Relative equilibrium of an invariant Hamiltonian on the slice: a critical
/// point of `h(nu, .)` together with its body angular velocity `(0, 0, dh/dnu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRelativeEquilibrium {
    pub nu: f64,
    pub eta: Vector2<f64>,
    pub xi: Vector3<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
}

pub fn relative_equilibrium(
    cfg: &TubeConfig,
    h: &dyn SliceHamiltonian,
    nu: f64,
    eta_guess: &Vector2<f64>,
    tol: f64,
) -> Result<SliceRelativeEquilibrium> {
    const MAX_ITER: usize = 50;
    let mut eta = *eta_guess;
    cfg.check_domain(nu, &eta)?;
    let mut iterations = 0;
    loop {
        let g = h.gradient(nu, &eta).1;
        if g.norm() <= tol {
            let xi = Vector3::new(0.0, 0.0, h.gradient(nu, &eta).0);
            return Ok(SliceRelativeEquilibrium { nu, eta, xi, gradient_norm: g.norm(), iterations });
        }
        if iterations == MAX_ITER {
            return Err(Error::NonConvergence { what: "slice relative equilibrium", iterations, residual: g.norm() });
        }
        let d = 1e-4;
        let col = |e: Vector2<f64>| (h.gradient(nu, &(eta + e * d)).1 - h.gradient(nu, &(eta - e * d)).1) / (2.0 * d);
        let hess = nalgebra::Matrix2::from_columns(&[col(Vector2::x()), col(Vector2::y())]);
        let step = hess.try_inverse().ok_or_else(|| Error::SingularBlock("Hessian of h in eta".into()))? * g;
        eta -= step;
        cfg.check_domain(nu, &eta)?;
        iterations += 1;
    }
}

/// Result of following a reduced orbit once around.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstReturn {
    pub period: f64,
    pub distance: f64,
}

/// Integrates with RK4 until the orbit through `eta0` next crosses the line
/// through `eta0` normal to the flow, and reports the return time and the
/// distance to `eta0`.
pub fn first_return(cfg: &TubeConfig, h: &dyn SliceHamiltonian, nu: f64, eta0: &Vector2<f64>, dt: f64, t_max: f64) -> Result<FirstReturn> {
    let v0 = reduced_vector_field(cfg, h, nu, eta0)?.eta_dot;
    if v0.norm() == 0.0 {
        return Err(Error::InvalidConfig("first_return started at an equilibrium".into()));
    }
    let step = |eta: &Vector2<f64>, dt: f64| {
        let f = |e: &Vector2<f64>| reduced_field_unchecked(cfg.mu0, h, nu, e).eta_dot;
        let k1 = f(eta);
        let k2 = f(&(eta + k1 * (0.5 * dt)));
        let k3 = f(&(eta + k2 * (0.5 * dt)));
        let k4 = f(&(eta + k3 * dt));
        eta + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
    };
    let section = |eta: &Vector2<f64>| v0.dot(&(eta - eta0));
    let mut eta = *eta0;
    let mut t = 0.0;
    let mut left = false;
    while t < t_max {
        let next = step(&eta, dt);
        cfg.check_domain(nu, &next).map_err(|_| Error::LeftTubeDomain { time: t + dt })?;
        let (g0, g1) = (section(&eta), section(&next));
        if g1 < 0.0 {
            left = true;
        }
        if left && g0 < 0.0 && g1 >= 0.0 {
            let (mut lo, mut hi) = (0.0, dt);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if section(&step(&eta, mid)) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            return Ok(FirstReturn { period: t + tau, distance: (step(&eta, tau) - eta0).norm() });
        }
        eta = next;
        t += dt;
    }
    Err(Error::NonConvergence { what: "first return", iterations: (t_max / dt) as usize, residual: f64::NAN })
}

/// Largest geodesic distance between two attitude histories.
pub fn max_attitude_error(a: &[Rotation], b: &[Rotation]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.angle_to(y)).fold(0.0, f64::max)
}

/// Geodesic angle of `S` relative to `S0` rotated by `exp(t xi)` on the left.
pub fn relative_equilibrium_deviation(s0: &Rotation, xi_spatial: &Vector3<f64>, t: f64, s: &Rotation) -> Result<f64> {
    let predicted = Rotation::exp(&(xi_spatial * t)) * *s0;
    Ok(log_so3(&(predicted.inverse() * *s).matrix().clone_owned())?.norm())
}
