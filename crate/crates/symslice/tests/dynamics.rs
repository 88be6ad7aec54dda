use nalgebra::{Vector2, Vector3};
use symslice::dynamics::*;
use symslice::rigid_body::{euler_poinsot_h_mu, phase_portrait, distance_to_polylines, InertiaTensor, RigidBodySlice};
use symslice::contour::Grid;
use symslice::so3::Rotation;
use symslice::tube::{tube_forward, tube_inverse, SlicePoint, TrivializedPoint, TubeConfig};
use symslice::Error;

mod common;
use common::unreduced;

fn body() -> (TubeConfig, RigidBodySlice) {
    let inertia = InertiaTensor::new(1.0, 2.0, 3.0).unwrap();
    (TubeConfig::new(1.0).unwrap(), RigidBodySlice::new(inertia, 1.0))
}

#[test]
fn reduced_and_unreduced_attitudes_agree() {
    let (cfg, h) = body();
    let start = SlicePoint::new(Rotation::exp(&Vector3::new(0.3, -0.2, 0.7)), 0.1, Vector2::new(0.25, -0.3));
    let traj = integrate_reduced(&cfg, &h, &start, &IntegrationOptions::new(1e-3, 10.0)).unwrap();
    let last = traj.samples.last().unwrap();
    assert!((last.t - 10.0).abs() < 1e-12);
    let x0 = tube_forward(&cfg, &start).unwrap();
    let (s, mu) = unreduced(h.inertia.principal(), *x0.s.matrix(), x0.mu, 1e-3, 10_000);
    let s = Rotation::from_matrix_unchecked(s).renormalized();
    assert!(last.s.angle_to(&s) < 1e-6, "{}", last.s.angle_to(&s));
    // The momentum of the reduced state matches too.
    let back = tube_inverse(&cfg, &TrivializedPoint { s, mu }).unwrap();
    assert!((back.eta - last.eta).norm() < 1e-6);
}

#[test]
fn relative_equilibrium_is_a_uniform_rotation() {
    let (cfg, h) = body();
    let re = relative_equilibrium(&cfg, &h, 0.0, &Vector2::new(0.05, -0.02), 1e-12).unwrap();
    assert!(re.eta.norm() < 1e-10);
    assert!((re.xi.z - 1.0 / 3.0).abs() < 1e-10);
    let r0 = Rotation::exp(&Vector3::new(0.4, 0.1, -0.3));
    let traj = integrate_reduced(&cfg, &h, &SlicePoint::new(r0, re.nu, re.eta), &IntegrationOptions::new(1e-3, 10.0).with_record_every(100)).unwrap();
    let s0 = traj.samples[0].s;
    let xi_spatial = r0.act(&re.xi);
    for p in &traj.samples {
        assert!(relative_equilibrium_deviation(&s0, &xi_spatial, p.t, &p.s).unwrap() < 1e-8);
    }
}

#[test]
fn energy_and_spatial_momentum_are_conserved() {
    let (cfg, h) = body();
    let start = SlicePoint::new(Rotation::exp(&Vector3::new(0.1, 0.2, 0.3)), 0.05, Vector2::new(0.3, 0.2));
    let traj = integrate_reduced(&cfg, &h, &start, &IntegrationOptions::new(1e-3, 100.0).with_record_every(1000)).unwrap();
    let x0 = tube_forward(&cfg, &start).unwrap();
    let (e0, j0) = (euler_poinsot_h_mu(&h.inertia, &x0.mu), x0.s.act(&x0.mu));
    for p in &traj.samples {
        let x = tube_forward(&cfg, &SlicePoint::new(p.r, p.nu, p.eta)).unwrap();
        assert!((euler_poinsot_h_mu(&h.inertia, &x.mu) - e0).abs() < 1e-8 * e0);
        assert!((x.s.act(&x.mu) - j0).norm() < 1e-8 * j0.norm());
    }
}

#[test]
fn implicit_midpoint_preserves_quadratic_energy() {
    let cfg = TubeConfig::new(1.0).unwrap();
    let h = FnHamiltonian(|nu: f64, eta: &Vector2<f64>| 0.5 * (1.3 * eta.x * eta.x + 0.7 * eta.y * eta.y) + 0.2 * nu);
    let start = SlicePoint::at_identity(0.0, Vector2::new(0.4, 0.1));
    let opts = IntegrationOptions::new(1e-2, 1000.0).with_integrator(Integrator::ImplicitMidpoint).with_record_every(1000);
    let traj = integrate_reduced(&cfg, &h, &start, &opts).unwrap();
    assert_eq!(traj.samples.last().unwrap().t, 1000.0);
    let e0 = traj.samples[0].h;
    for p in &traj.samples {
        assert!((p.h - e0).abs() < 1e-10, "{}", (p.h - e0).abs());
    }
}

#[test]
fn implicit_midpoint_has_no_secular_drift_on_the_rigid_body() {
    let (cfg, h) = body();
    let start = SlicePoint::at_identity(0.0, Vector2::new(0.5, 0.3));
    let opts = IntegrationOptions::new(5e-3, 500.0).with_integrator(Integrator::ImplicitMidpoint).with_record_every(10);
    let traj = integrate_reduced(&cfg, &h, &start, &opts).unwrap();
    let e0 = traj.samples[0].h;
    let half = traj.samples.len() / 2;
    let band = |s: &[TrajectorySample]| s.iter().map(|p| (p.h - e0).abs()).fold(0.0, f64::max);
    let (early, late) = (band(&traj.samples[..half]), band(&traj.samples[half..]));
    assert!(late < 1.5 * early + 1e-12, "{early} vs {late}");
}

#[test]
fn domain_exit_time_is_located() {
    let cfg = TubeConfig::new(1.0).unwrap();
    // eta_y moves at unit speed: exits at |eta| = 2.
    let h = FnHamiltonian(|_nu: f64, eta: &Vector2<f64>| eta.x);
    let start = SlicePoint::at_identity(0.0, Vector2::zeros());
    let err = integrate_reduced(&cfg, &h, &start, &IntegrationOptions::new(1e-2, 5.0).with_energy_tol(None)).unwrap_err();
    let Error::LeftTubeDomain { time } = err else { panic!("{err}") };
    assert!((time - 2.0).abs() < 1e-8, "{time}");
}

#[test]
fn bounded_orbits_close() {
    let (cfg, h) = body();
    for eta0 in [Vector2::new(0.2, 0.0), Vector2::new(0.0, 0.6), Vector2::new(0.5, 0.5)] {
        let ret = first_return(&cfg, &h, 0.0, &eta0, 1e-3, 200.0).unwrap();
        assert!(ret.distance < 1e-6, "{}", ret.distance);
    }
}

#[test]
fn trajectories_follow_portrait_contours() {
    let (cfg, h) = body();
    let start = SlicePoint::at_identity(0.0, Vector2::new(0.6, 0.2));
    let traj = integrate_reduced(&cfg, &h, &start, &IntegrationOptions::new(1e-3, 30.0).with_record_every(50)).unwrap();
    let level = traj.samples[0].h;
    let grid = Grid::square(1.0, 401);
    let portrait = phase_portrait(&cfg, &h, 0.0, &grid, &[level]).unwrap();
    for p in &traj.samples {
        let d = distance_to_polylines((p.eta.x, p.eta.y), &portrait.polylines);
        assert!(d < 1e-4, "{d}");
    }
}

#[test]
fn full_field_is_the_hamiltonian_field_of_the_pulled_back_function() {
    let cfg = TubeConfig::new(1.4).unwrap();
    let inertia = Vector3::new(1.0, 2.0, 3.0);
    let a = Vector3::new(0.3, -0.2, 0.5);
    // H(S, mu) = kinetic energy plus a term that breaks the symmetry.
    let big_h = |s: &Rotation, mu: &Vector3<f64>| 0.5 * mu.component_div(&inertia).dot(mu) + a.dot(&s.act(&Vector3::z())) * mu.z;
    let slice_h = |p: &SlicePoint| {
        let x = tube_forward(&cfg, p).unwrap();
        big_h(&x.s, &x.mu)
    };
    let p = SlicePoint::new(Rotation::exp(&Vector3::new(0.2, 0.5, -0.1)), 0.3, Vector2::new(0.4, -0.2));
    let d = 1e-5;
    let x = full_vector_field(&cfg, &slice_h, &p, d).unwrap();
    // Push the slice field through the tube map.
    let flow = |t: f64| {
        let q = SlicePoint::new(p.r * Rotation::exp(&(x.xi * t)), p.nu + x.nu_dot * t, p.eta + x.eta_dot * t);
        tube_forward(&cfg, &q).unwrap()
    };
    let (fp, fm, base) = (flow(d), flow(-d), tube_forward(&cfg, &p).unwrap());
    let xi_pushed = ((base.s.inverse() * fp.s).log().unwrap() - (base.s.inverse() * fm.s).log().unwrap()) / (2.0 * d);
    let rho_pushed = (fp.mu - fm.mu) / (2.0 * d);
    // Canonical field on SO(3) × so(3)*: xi = dH/dmu, rho = mu × xi - dH/dS.
    let mut d_mu = Vector3::zeros();
    let mut d_s = Vector3::zeros();
    for i in 0..3 {
        let e = Vector3::ith(i, d);
        d_mu[i] = (big_h(&base.s, &(base.mu + e)) - big_h(&base.s, &(base.mu - e))) / (2.0 * d);
        d_s[i] = (big_h(&(base.s * Rotation::exp(&e)), &base.mu) - big_h(&(base.s * Rotation::exp(&-e)), &base.mu)) / (2.0 * d);
    }
    let rho = base.mu.cross(&d_mu) - d_s;
    assert!((xi_pushed - d_mu).norm() < 1e-7, "{}", (xi_pushed - d_mu).norm());
    assert!((rho_pushed - rho).norm() < 1e-7, "{}", (rho_pushed - rho).norm());
}

#[test]
fn energy_drift_guard_trips_on_a_coarse_step() {
    let (cfg, h) = body();
    let start = SlicePoint::at_identity(0.0, Vector2::new(0.9, 0.9));
    let r = integrate_reduced(&cfg, &h, &start, &IntegrationOptions::new(0.5, 50.0).with_energy_tol(Some(1e-9)));
    assert!(matches!(r, Err(Error::EnergyDrift { .. })));
}
