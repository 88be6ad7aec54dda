//! Composition of the explicit tube with a Palais slice for point clouds.

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::{tube_forward, SlicePoint, TubeConfig};
use crate::error::{Error, Result};
use crate::mech::{generators, PointCloudSystem};
use crate::so3::Rotation;

/// Slice coordinates `(R, nu, eta, s, sigma)` of a point cloud phase space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechSlicePoint {
    pub r: Rotation,
    pub nu: f64,
    pub eta: Vector2<f64>,
    pub s: DVector<f64>,
    pub sigma: DVector<f64>,
}

/// Maps slice coordinates to `(q, p)` in `T*R^{3N}`: the tube gives
/// `(S, mu)`, then `q = S (q0 + B s)` and `p` is fixed by
/// `<p, S (xi q + B s_dot)> = <mu, xi> + <sigma, s_dot>`.
pub fn general_tube_compose(cfg: &TubeConfig, sys: &PointCloudSystem, x: &MechSlicePoint) -> Result<(DVector<f64>, DVector<f64>)> {
    let k = sys.basis().ncols();
    if x.s.len() != k || x.sigma.len() != k {
        return Err(Error::InvalidConfig(format!("slice point needs {k} shape coordinates")));
    }
    let t = tube_forward(cfg, &SlicePoint::new(x.r, x.nu, x.eta))?;
    let shape = sys.shape(&x.s);
    let n = shape.len();
    let mut g = DMatrix::zeros(n, n);
    g.view_mut((0, 0), (n, 3)).copy_from(&generators(&shape));
    g.view_mut((0, 3), (n, k)).copy_from(sys.basis());
    let rhs = DVector::from_iterator(n, t.mu.iter().chain(x.sigma.iter()).copied());
    let body = g.transpose().lu().solve(&rhs).ok_or(Error::NotFreeAction)?;
    let rot = t.s.matrix();
    let mut q = DVector::zeros(n);
    let mut p = DVector::zeros(n);
    for i in 0..n / 3 {
        q.fixed_rows_mut::<3>(3 * i).copy_from(&(rot * shape.fixed_rows::<3>(3 * i)));
        p.fixed_rows_mut::<3>(3 * i).copy_from(&(rot * body.fixed_rows::<3>(3 * i)));
    }
    Ok((q, p))
}
