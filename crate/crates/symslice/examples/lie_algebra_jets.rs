//! Tube jets for a general Lie algebra: u(2), whose isotropy algebra at a
//! generic momentum is two-dimensional, and the SO(3) case compared against
//! the explicit tube.

use nalgebra::{DMatrix, DVector, Vector3};
use symslice::normal_form::{normal_form_explicit_so3, normal_form_via_jets, tube_jet_solve, LieAlgebraSpec};
use symslice::rigid_body::{euler_poinsot_h_mu, InertiaTensor};

fn main() -> symslice::Result<()> {
    let rot = |i: usize, j: usize| {
        let mut m = DMatrix::zeros(4, 4);
        m[(i, j)] = 1.0;
        m[(j, i)] = -1.0;
        m
    };
    let centre = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]));
    let basis = vec![rot(2, 1), rot(0, 2), rot(1, 0), centre];
    let spec = LieAlgebraSpec::from_matrix_basis(&basis, DVector::from_vec(vec![0.2, 0.1, 1.0, 0.7]), DMatrix::identity(4, 4))?;
    let jets = tube_jet_solve(&spec, 3)?;
    println!("u(2): isotropy dim {}, complement dim {}", jets.kappa.len(), jets.zeta.len());
    for (degree, r) in jets.residuals.iter().enumerate() {
        println!("  degree {degree}: Tube Condition residual {r:.1e}");
    }
    println!("  closures for orders 2..=3: {:?}", jets.closures);

    let inertia = InertiaTensor::new(1.0, 2.0, 3.0)?;
    let h = |m: &[f64]| euler_poinsot_h_mu(&inertia, &Vector3::from_column_slice(m));
    let via = normal_form_via_jets(&LieAlgebraSpec::so3(&Vector3::new(0.0, 0.0, 1.0))?, &h, 4)?;
    let (_, explicit) = normal_form_explicit_so3(1.0, &h, 4)?;
    let diff = (&via.result.normal_form - &explicit.normal_form).max_abs_coefficient();
    println!("so(3): normal form from jets differs from the explicit tube by {diff:.1e}");
    Ok(())
}
