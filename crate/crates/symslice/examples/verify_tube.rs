//! Checks that the SO(3) tube is symplectic and satisfies the Tube Condition,
//! then shows the check failing once the tube angle is perturbed.

use symslice::tube::{run_case_family, verify_pullback_grid, DirectionCase, TubeConfig};

fn main() -> symslice::Result<()> {
    for mu0 in [0.5, 1.0, 3.0] {
        let cfg = TubeConfig::new(mu0)?;
        let grid = verify_pullback_grid(&cfg, 10, 0.8, 1e-5, 0)?;
        println!("mu0 = {mu0}: {} grid points, max pullback residual {:.2e}", grid.points, grid.max_residual);
        for case in DirectionCase::ALL {
            let r = run_case_family(&cfg, case, 100, 0, 1e-5)?;
            println!("  {:<20} {:.2e}", case.name(), r.max_residual);
        }
    }
    let bent = TubeConfig::new(1.0)?.with_theta_scale(1.01);
    let grid = verify_pullback_grid(&bent, 10, 0.8, 1e-5, 0)?;
    println!("angle scaled by 1.01: max pullback residual {:.2e}", grid.max_residual);
    Ok(())
}
