//! Level sets of the reduced rigid-body energy. Pass a path to write the SVG.

use symslice::contour::Grid;
use symslice::io::portrait_svg;
use symslice::rigid_body::{classify_proper_rotation, default_levels, phase_portrait, InertiaTensor, RigidBodySlice};
use symslice::tube::TubeConfig;

fn main() -> symslice::Result<()> {
    let cfg = TubeConfig::new(1.0)?;
    for inertia in [InertiaTensor::new(1.0, 2.0, 3.0)?, InertiaTensor::new(1.0, 3.0, 2.0)?] {
        let h = RigidBodySlice::new(inertia, cfg.mu0);
        let bound = cfg.eta_bound(0.0);
        let grid = Grid::square(1.02 * bound, 241);
        let levels = default_levels(&phase_portrait(&cfg, &h, 0.0, &grid, &[])?.values, 12);
        let portrait = phase_portrait(&cfg, &h, 0.0, &grid, &levels)?;
        let class = classify_proper_rotation(&inertia, cfg.mu0);
        println!("I = {:?}: {:?} at eta = 0, {} polylines", inertia.principal().as_slice(), class.stability, portrait.polylines.len());
        if let Some(path) = std::env::args().nth(1) {
            let path = format!("{path}-{}.svg", inertia.principal().iter().map(|i| i.to_string()).collect::<Vec<_>>().join("_"));
            std::fs::write(&path, portrait_svg(&portrait, bound))?;
            println!("  wrote {path}");
        }
    }
    Ok(())
}
