//! Birkhoff normal forms: the free rigid body near its major axis and a
//! two-particle system near a relative equilibrium.

use symslice::mech::two_particle_system;
use symslice::normal_form::birkhoff::NormalFormReport;
use symslice::normal_form::{mech_normal_form, rigid_body_normal_form};
use symslice::rigid_body::InertiaTensor;

fn main() -> symslice::Result<()> {
    let inertia = InertiaTensor::new(1.0, 2.0, 3.0)?;
    let (ss, result) = rigid_body_normal_form(&inertia, 1.0, 4)?;
    println!("rigid body, degree 4:\n  {}", result.normal_form);
    let report = NormalFormReport::new(&ss, &result, 4);
    println!("  eigenvalues {:?}", report.eigenvalues);

    let sys = two_particle_system(1.0, 0.6, 1.0, 4.0, 1.0, 3.0)?;
    let nf = mech_normal_form(&sys, 1.5, 4)?;
    let report = NormalFormReport::new(&nf.structure, &nf.result, 4);
    println!("two particles: {} variables, {} normal-form terms", nf.structure.dim(), nf.result.normal_form.len());
    for (degree, residual) in &report.bracket_residuals {
        println!("  degree {degree}: {{H2, H}} residual {residual:.2e}, kernel dim {}", report.kernel_dims[degree]);
    }
    println!("  resonances: {}", report.resonances.len());
    Ok(())
}
