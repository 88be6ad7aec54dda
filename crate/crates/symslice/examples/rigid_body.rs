//! Free rigid body in slice coordinates: integrate the reduced system,
//! reconstruct the attitude and watch the conserved quantities.

use nalgebra::{Vector2, Vector3};
use symslice::dynamics::{integrate_reduced, IntegrationOptions};
use symslice::rigid_body::{euler_poinsot_h_mu, InertiaTensor, RigidBodySlice};
use symslice::so3::Rotation;
use symslice::tube::{tube_forward, SlicePoint, TubeConfig};

fn main() -> symslice::Result<()> {
    let inertia = InertiaTensor::new(1.0, 2.0, 3.0)?;
    let cfg = TubeConfig::new(1.0)?;
    let h = RigidBodySlice::new(inertia, cfg.mu0);
    let start = SlicePoint::new(Rotation::exp(&Vector3::new(0.1, 0.2, 0.3)), 0.05, Vector2::new(0.3, 0.2));
    let traj = integrate_reduced(&cfg, &h, &start, &IntegrationOptions::new(1e-3, 20.0).with_record_every(2000))?;

    let x0 = tube_forward(&cfg, &start)?;
    let j0 = x0.s.act(&x0.mu);
    println!("{:>6} {:>10} {:>10} {:>12} {:>12}", "t", "eta_x", "eta_y", "energy", "|J - J0|");
    for p in &traj.samples {
        let x = tube_forward(&cfg, &SlicePoint::new(p.r, p.nu, p.eta))?;
        let j = x.s.act(&x.mu);
        println!("{:>6.1} {:>10.6} {:>10.6} {:>12.9} {:>12.2e}", p.t, p.eta.x, p.eta.y, euler_poinsot_h_mu(&inertia, &x.mu), (j - j0).norm());
    }
    Ok(())
}
