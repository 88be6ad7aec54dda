//! End-to-end acceptance checks. Runs as a plain binary (no libtest harness)
//! so every criterion prints one PASS/FAIL line; exits non-zero on any FAIL.

use std::time::Instant;

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symslice::contour::Grid;
use symslice::dynamics::{integrate_reduced, relative_equilibrium, IntegrationOptions};
use symslice::mech::two_particle_system;
use symslice::normal_form::*;
use symslice::rigid_body::{distance_to_polylines, euler_poinsot_h_mu, euler_poinsot_h_slice, phase_portrait, InertiaTensor, RigidBodySlice};
use symslice::so3::{kks_form_tangent, Rotation};
use symslice::tube::*;

mod common;
use common::{complex_oracle, gauss_legendre, unreduced};

const MU0S: [f64; 3] = [0.5, 1.0, 3.0];

/// Outcome of one criterion: whether it passed and a one-line measurement.
type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn within(label: &str, value: f64, tol: f64) -> Check {
    let line = format!("{label} = {value:.3e} (< {tol:.0e})");
    if value < tol {
        Ok(line)
    } else {
        Err(line)
    }
}

fn all(parts: Vec<Check>) -> Check {
    let ok = parts.iter().all(Result::is_ok);
    let line = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("FAILED {e}"))).collect::<Vec<_>>().join("; ");
    if ok {
        Ok(line)
    } else {
        Err(line)
    }
}

fn cfg(mu0: f64) -> TubeConfig {
    TubeConfig::new(mu0).unwrap()
}

fn tube_symplecticity() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for mu0 in MU0S {
        let report = verify_pullback_grid(&cfg(mu0), 10, 0.8, 1e-5, 1).map_err(|e| e.to_string())?;
        if report.points != 1000 || report.coverage != 0.8 {
            return Err(format!("grid had {} points at coverage {}", report.points, report.coverage));
        }
        worst = worst.max(report.max_residual);
    }
    all(vec![within("pullback residual", worst, 1e-6), within("runtime s", start.elapsed().as_secs_f64(), 10.0)])
}

fn tube_condition() -> Check {
    let mut worst: f64 = 0.0;
    for mu0 in MU0S {
        for case in DirectionCase::ALL {
            worst = worst.max(run_case_family(&cfg(mu0), case, 100, 2, 1e-5).map_err(|e| e.to_string())?.max_residual);
        }
    }
    // The parallel family holds whatever the angle function is.
    let mut perturbed: f64 = 0.0;
    for scale in [0.9, 1.01, 1.3] {
        let r = run_case_family(&cfg(1.0).with_theta_scale(scale), DirectionCase::ParallelParallel, 100, 2, 1e-5).map_err(|e| e.to_string())?;
        perturbed = perturbed.max(r.max_residual);
    }
    all(vec![within("max family residual", worst, 1e-6), within("parallel family, scaled angle", perturbed, 1e-6)])
}

fn scalar_identities() -> Check {
    let mut worst: f64 = 0.0;
    for mu0 in MU0S {
        let c = cfg(mu0);
        for i in 0..50 {
            let nu = mu0 * (-0.9 + 2.9 * i as f64 / 49.0);
            for j in 1..=50 {
                let r = 0.98 * c.eta_bound(nu) * j as f64 / 50.0;
                worst = worst.max(angle_identity_parallel_perp(&c, nu, r).abs()).max(angle_identity_nu_perp(&c, nu, r).abs());
            }
        }
    }
    within("max identity defect", worst, 1e-10)
}

fn coordinate_change() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut casimir, mut round_trip): (f64, f64) = (0.0, 0.0);
    for i in 0..10_000 {
        let c = cfg(MU0S[i % 3]);
        let nu = rng.gen_range(-0.9 * c.mu0..2.0 * c.mu0);
        let r = rng.gen_range(0.0..0.95) * c.eta_bound(nu);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let rot = Rotation::exp(&Vector3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)));
        let p = SlicePoint::new(rot, nu, Vector2::new(phi.cos(), phi.sin()) * r);
        let x = tube_forward(&c, &p).map_err(|e| e.to_string())?;
        let m = x.mu;
        let rel = (m.x * m.x + m.y * m.y + m.z * m.z - (c.mu0 + nu).powi(2)).abs() / (c.mu0 + nu).powi(2).max(1.0);
        casimir = casimir.max(rel);
        let back = tube_inverse(&c, &x).map_err(|e| e.to_string())?;
        round_trip = round_trip.max((back.nu - nu).abs()).max((back.eta - p.eta).norm()).max((back.r.matrix() - rot.matrix()).amax());
    }
    all(vec![within("Casimir defect", casimir, 1e-12), within("round trip", round_trip, 1e-10)])
}

fn rigid_slice_hamiltonian() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inertia = InertiaTensor::new(1.0, 2.0, 3.0).unwrap();
    let mut composition: f64 = 0.0;
    for i in 0..1000 {
        let c = cfg(MU0S[i % 3]);
        let nu = rng.gen_range(-0.9 * c.mu0..2.0 * c.mu0);
        let eta = Vector2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (0.95 * c.eta_bound(nu) / 2f64.sqrt());
        let p = SlicePoint::new(Rotation::exp(&Vector3::new(rng.gen(), rng.gen(), rng.gen())), nu, eta);
        let mu = tube_forward(&c, &p).map_err(|e| e.to_string())?.mu;
        let a = euler_poinsot_h_mu(&inertia, &mu);
        composition = composition.max((a - euler_poinsot_h_slice(&inertia, c.mu0, nu, &eta)).abs() / a.max(1.0));
    }
    let top = InertiaTensor::new(1.5, 1.5, 0.8).unwrap();
    let mut invariance: f64 = 0.0;
    for _ in 0..1000 {
        let nu = rng.gen_range(-0.5..1.0);
        let eta = Vector2::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let turned = Vector2::new(a.cos() * eta.x - a.sin() * eta.y, a.sin() * eta.x + a.cos() * eta.y);
        invariance = invariance.max((euler_poinsot_h_slice(&top, 1.0, nu, &eta) - euler_poinsot_h_slice(&top, 1.0, nu, &turned)).abs());
    }
    all(vec![within("composition defect", composition, 1e-12), within("symmetric-top rotation defect", invariance, 1e-12)])
}

fn dynamics() -> Check {
    let inertia = InertiaTensor::new(1.0, 2.0, 3.0).unwrap();
    let (c, h) = (cfg(1.0), RigidBodySlice::new(inertia, 1.0));
    let err = |e: symslice::Error| e.to_string();

    let re = relative_equilibrium(&c, &h, 0.0, &Vector2::new(0.05, -0.02), 1e-12).map_err(err)?;
    let r0 = Rotation::exp(&Vector3::new(0.4, 0.1, -0.3));
    let traj = integrate_reduced(&c, &h, &SlicePoint::new(r0, re.nu, re.eta), &IntegrationOptions::new(1e-3, 10.0).with_record_every(10)).map_err(err)?;
    let s0 = traj.samples[0].s;
    let xi = r0.act(&re.xi);
    let uniform = traj.samples.iter().map(|p| (Rotation::exp(&(xi * p.t)) * s0).angle_to(&p.s)).fold(0.0, f64::max);

    let start = SlicePoint::new(Rotation::exp(&Vector3::new(0.1, 0.2, 0.3)), 0.05, Vector2::new(0.3, 0.2));
    let traj = integrate_reduced(&c, &h, &start, &IntegrationOptions::new(1e-3, 100.0).with_record_every(100)).map_err(err)?;
    let x0 = tube_forward(&c, &start).map_err(err)?;
    let (e0, j0) = (euler_poinsot_h_mu(&inertia, &x0.mu), x0.s.act(&x0.mu));
    let (mut energy, mut momentum): (f64, f64) = (0.0, 0.0);
    for p in &traj.samples {
        let x = tube_forward(&c, &SlicePoint::new(p.r, p.nu, p.eta)).map_err(err)?;
        energy = energy.max((euler_poinsot_h_mu(&inertia, &x.mu) - e0).abs() / e0);
        momentum = momentum.max((x.s.act(&x.mu) - j0).norm() / j0.norm());
    }

    let start = SlicePoint::at_identity(0.0, Vector2::new(0.6, 0.2));
    let traj = integrate_reduced(&c, &h, &start, &IntegrationOptions::new(1e-3, 30.0).with_record_every(50)).map_err(err)?;
    let portrait = phase_portrait(&c, &h, 0.0, &Grid::square(1.0, 401), &[traj.samples[0].h]).map_err(err)?;
    let level = traj.samples.iter().map(|p| distance_to_polylines((p.eta.x, p.eta.y), &portrait.polylines)).fold(0.0, f64::max);

    all(vec![
        within("relative equilibrium attitude error", uniform, 1e-8),
        within("energy drift", energy, 1e-8),
        within("momentum drift", momentum, 1e-8),
        within("distance to level set", level, 1e-4),
    ])
}

fn reduced_vs_unreduced() -> Check {
    let inertia = InertiaTensor::new(1.0, 2.0, 3.0).unwrap();
    let (c, h) = (cfg(1.0), RigidBodySlice::new(inertia, 1.0));
    let start = SlicePoint::new(Rotation::exp(&Vector3::new(0.3, -0.2, 0.7)), 0.1, Vector2::new(0.25, -0.3));
    let traj = integrate_reduced(&c, &h, &start, &IntegrationOptions::new(1e-3, 10.0)).map_err(|e| e.to_string())?;
    let x0 = tube_forward(&c, &start).map_err(|e| e.to_string())?;
    let (s, _) = unreduced(inertia.principal(), *x0.s.matrix(), x0.mu, 1e-3, 10_000);
    let s = Rotation::from_matrix_unchecked(s).renormalized();
    within("attitude angle at t = 10", traj.samples.last().unwrap().s.angle_to(&s), 1e-6)
}

fn normal_forms() -> Check {
    let start = Instant::now();
    let inertia = InertiaTensor::new(1.0, 2.0, 3.0).unwrap();
    let (_, rigid) = rigid_body_normal_form(&inertia, 1.0, 4).map_err(|e| e.to_string())?;
    let sys = two_particle_system(1.0, 0.6, 1.0, 4.0, 1.0, 3.0).unwrap();
    let two = mech_normal_form(&sys, 1.5, 4).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    if two.structure.dim() != 8 {
        return Err(format!("two-particle system has {} variables", two.structure.dim()));
    }

    let ss = SymplecticStructure::canonical(1);
    let h = GradedPolynomial::from_terms(2, 4, [(vec![2, 0], 0.5), (vec![0, 2], 0.5), (vec![3, 0], 1.0), (vec![4, 0], 1.0)]);
    let single = birkhoff_normal_form(&ss, &h, 4).map_err(|e| e.to_string())?;
    // (q^2 + p^2)^2 / 4 has q^4 coefficient 1/4.
    let c = 4.0 * single.normal_form.coefficient(&[4, 0]);
    let oracle = complex_oracle::quartic_coefficient(&[(3, 1.0), (4, 1.0)]);

    all(vec![
        within("rigid-body bracket residual", rigid.max_commutator_residual(), 1e-9),
        within("two-particle bracket residual", two.result.max_commutator_residual(), 1e-9),
        within("single oscillator vs oracle", (c - oracle).abs(), 1e-8),
        within("runtime s", elapsed, 30.0),
    ])
}

fn jet_scheme() -> Check {
    let mut jet_err: f64 = 0.0;
    for mu0 in MU0S {
        let jets = tube_jet_solve(&LieAlgebraSpec::so3(&Vector3::new(0.0, 0.0, mu0)).unwrap(), 3).map_err(|e| e.to_string())?;
        let c = cfg(mu0);
        for i in 0..3 {
            let f = |z: &[f64]| tube_log(&c, z[0], &Vector2::new(z[1], z[2]))[i];
            let fd = taylor_coefficients(&f, &[0.0; 3], 3, 1.0);
            for d in 0..=3 {
                for m in Monomial::all_of_degree(3, d) {
                    jet_err = jet_err.max((jets.log[i].coefficient(m.exps()) - fd.coefficient(m.exps())).abs());
                }
            }
        }
    }
    let inertia = InertiaTensor::new(1.0, 2.0, 3.0).unwrap();
    let h = |m: &[f64]| euler_poinsot_h_mu(&inertia, &Vector3::from_column_slice(m));
    let mut nf_err: f64 = 0.0;
    for mu0 in MU0S {
        let via = normal_form_via_jets(&LieAlgebraSpec::so3(&Vector3::new(0.0, 0.0, mu0)).unwrap(), &h, 4).map_err(|e| e.to_string())?;
        let (_, explicit) = normal_form_explicit_so3(mu0, &h, 4).map_err(|e| e.to_string())?;
        nf_err = nf_err.max((&via.result.normal_form - &explicit.normal_form).max_abs_coefficient());
    }
    all(vec![within("jets vs explicit tube", jet_err, 1e-7), within("normal form via jets vs explicit", nf_err, 1e-6)])
}

fn kks_area() -> Check {
    let mu0 = 1.7;
    let rule = gauss_legendre(24);
    let mut worst: f64 = 0.0;
    for radius in [0.5, 1.0, 1.5] {
        let mut area = 0.0;
        for &(xr, wr) in &rule {
            let r = 0.5 * radius * (xr + 1.0);
            for &(xt, wt) in &rule {
                let t = std::f64::consts::PI * (xt + 1.0);
                let eta = Vector2::new(t.cos(), t.sin()) * r;
                let d = 1e-5;
                let map = |e: Vector2<f64>| kks_area_map(mu0, &e);
                let dx = (map(eta + Vector2::x() * d) - map(eta - Vector2::x() * d)) / (2.0 * d);
                let dy = (map(eta + Vector2::y() * d) - map(eta - Vector2::y() * d)) / (2.0 * d);
                let density = kks_form_tangent(&map(eta), &dx, &dy, 1.0).map_err(|e| e.to_string())?;
                area += wr * wt * density * r * 0.5 * radius * std::f64::consts::PI;
            }
        }
        // Spherical cap cut off by the image of the boundary circle, in KKS units.
        let edge = kks_area_map(mu0, &Vector2::new(radius, 0.0));
        let cap = 2.0 * std::f64::consts::PI * mu0 * (1.0 - edge.z / mu0);
        worst = worst.max((area.abs() - cap).abs() / cap);
    }
    within("relative area error", worst, 1e-6)
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 tube symplecticity", tube_symplecticity),
        ("2 tube condition", tube_condition),
        ("3 scalar angle identities", scalar_identities),
        ("4 coordinate change", coordinate_change),
        ("5 rigid-body slice Hamiltonian", rigid_slice_hamiltonian),
        ("6 reduced dynamics", dynamics),
        ("7 reduced vs unreduced attitude", reduced_vs_unreduced),
        ("8 Birkhoff normal form", normal_forms),
        ("9 jet scheme", jet_scheme),
        ("10 KKS area", kks_area),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
