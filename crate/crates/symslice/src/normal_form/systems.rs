//! Normal forms of the built-in systems at their relative equilibria.

use nalgebra::{DVector, Vector2, Vector3};

use crate::error::Result;
use crate::mech::{coupled_hamiltonian, find_relative_equilibrium, AmendedConvention, CoupledState, PointCloudSystem, RelativeEquilibrium};
use crate::rigid_body::InertiaTensor;
use crate::tube::TubeConfig;

use super::birkhoff::{birkhoff_normal_form, BirkhoffResult};
use super::poly::{GradedPolynomial, SymplecticStructure};
use super::taylor::taylor_expand;
use super::via_jets::slice_structure;

/// Rigid-body slice energy at fixed `nu` as an exact polynomial in `eta`
/// (degree 4), including the constant term.
pub fn rigid_body_slice_polynomial(inertia: &InertiaTensor, mu0: f64, nu: f64) -> GradedPolynomial {
    let i = inertia.principal();
    let x = GradedPolynomial::variable(2, 4, 0);
    let y = GradedPolynomial::variable(2, 4, 1);
    let one = GradedPolynomial::constant(2, 4, 1.0);
    let r2 = &(&x * &x) + &(&y * &y);
    let w = &one.scale(mu0 + nu) - &r2.scale(0.25 * mu0);
    let u = &one.scale(mu0 + nu) - &r2.scale(0.5 * mu0);
    let a = &(&x * &x).scale(0.5 / i.y) + &(&y * &y).scale(0.5 / i.x);
    &(&w * &a).scale(mu0) + &(&u * &u).scale(0.5 / i.z)
}

/// Normal form of the reduced rigid body at `eta = 0`, `nu = 0`.
pub fn rigid_body_normal_form(inertia: &InertiaTensor, mu0: f64, k: usize) -> Result<(SymplecticStructure, BirkhoffResult)> {
    let h = rigid_body_slice_polynomial(inertia, mu0, 0.0).with_max_degree(k.max(2)).degree_range(2, k);
    let ss = slice_structure(mu0);
    let r = birkhoff_normal_form(&ss, &h, k)?;
    Ok((ss, r))
}

#[derive(Clone, Debug)]
pub struct MechNormalForm {
    pub equilibrium: RelativeEquilibrium,
    pub structure: SymplecticStructure,
    /// Taylor expansion in `(eta, s - s*, sigma - sigma*)`.
    pub expansion: GradedPolynomial,
    pub result: BirkhoffResult,
}

/// Finds the relative equilibrium spinning about `e3` with momentum `mu0`
/// and normalises the reduced Hamiltonian there.
pub fn mech_normal_form(sys: &PointCloudSystem, mu0: f64, k: usize) -> Result<MechNormalForm> {
    let cfg = TubeConfig::new(mu0)?;
    let dim = crate::mech::MechSystem::slice_dim(sys);
    let mu = Vector3::new(0.0, 0.0, mu0);
    let equilibrium = find_relative_equilibrium(sys, &mu, &DVector::zeros(dim), AmendedConvention::Amended, 1e-11)?;
    let (s0, sigma0) = (equilibrium.s.clone(), equilibrium.sigma.clone());
    let f = |z: &[f64]| {
        let state = CoupledState {
            nu: 0.0,
            eta: Vector2::new(z[0], z[1]),
            s: &s0 + DVector::from_column_slice(&z[2..2 + dim]),
            sigma: &sigma0 + DVector::from_column_slice(&z[2 + dim..]),
        };
        coupled_hamiltonian(&cfg, sys, &state).unwrap_or(f64::NAN)
    };
    let expansion = taylor_expand(&f, &vec![0.0; 2 + 2 * dim], k)?;
    let structure = slice_structure(mu0).direct_sum(&SymplecticStructure::canonical(dim));
    let result = birkhoff_normal_form(&structure, &expansion, k)?;
    Ok(MechNormalForm { equilibrium, structure, expansion, result })
}
