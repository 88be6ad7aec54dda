//! Normal forms of invariant Hamiltonians from the tube jets alone, and the
//! same computation through the explicit SO(3) tube for comparison.

use nalgebra::{DMatrix, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::so3::Rotation;
use crate::tube::tube_momentum_closed_form;

use super::birkhoff::{birkhoff_normal_form, BirkhoffResult};
use super::jets::{momentum_polynomial, tube_jet_solve, LieAlgebraSpec, TubeJets};
use super::poly::{GradedPolynomial, SymplecticStructure};
use super::taylor::{taylor_coefficients, taylor_expand, EQUILIBRIUM_TOL};

/// Reduced-space structure for the `eta` block of the SO(3) slice at
/// `nu = 0`: the form `-mu0 J`.
pub fn slice_structure(mu0: f64) -> SymplecticStructure {
    let w = DMatrix::from_row_slice(2, 2, &[0.0, -mu0, mu0, 0.0]);
    SymplecticStructure::from_form(&w).expect("nonzero mu0")
}

#[derive(Clone, Debug)]
pub struct ViaJets {
    pub jets: TubeJets,
    pub structure: SymplecticStructure,
    /// Reduced Hamiltonian in the complement coordinates, degrees 2..k.
    pub expansion: GradedPolynomial,
    pub result: BirkhoffResult,
}

/// Normal form of `h` (a function on the dual of the algebra, the
/// left-trivialised form of an invariant Hamiltonian on `T*G`) at the
/// relative equilibrium through `spec.mu`, using only the tube jets.
pub fn normal_form_via_jets(spec: &LieAlgebraSpec, h: &dyn Fn(&[f64]) -> f64, k: usize) -> Result<ViaJets> {
    let jets = tube_jet_solve(spec, k)?;
    let pk = jets.kappa.len();
    let mu = spec.mu();
    let delta: Vec<GradedPolynomial> = momentum_polynomial(spec, &jets)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let r = p.restrict_leading_zero(pk);
            &r - &GradedPolynomial::constant(r.n_vars(), k, mu[i])
        })
        .collect();
    let taylor = taylor_coefficients(h, mu.as_slice(), k, 1.0);
    let full = taylor.compose(&delta);
    let q = jets.zeta.len();
    let h0 = full.coefficient(&vec![0; q]);
    let grad = full.homogeneous(1).max_abs_coefficient();
    if grad > EQUILIBRIUM_TOL * h0.abs().max(1.0) {
        return Err(Error::NotAnEquilibrium(grad));
    }
    let expansion = full.degree_range(2, k);
    let w = DMatrix::from_fn(q, q, |i, j| -mu.dot(&spec.bracket(&jets.zeta[i], &jets.zeta[j])));
    let structure = SymplecticStructure::from_form(&w)?;
    let result = birkhoff_normal_form(&structure, &expansion, k)?;
    Ok(ViaJets { jets, structure, expansion, result })
}

/// The same normal form for SO(3) with `mu = mu0 e3`, expanding
/// `h(mu(0, eta))` through the closed-form tube.
pub fn normal_form_explicit_so3(mu0: f64, h: &dyn Fn(&[f64]) -> f64, k: usize) -> Result<(GradedPolynomial, BirkhoffResult)> {
    let f = |z: &[f64]| {
        let mu = tube_momentum_closed_form(mu0, 0.0, &Vector2::new(z[0], z[1]));
        h(mu.as_slice())
    };
    let expansion = taylor_expand(&f, &[0.0, 0.0], k)?;
    let ss = slice_structure(mu0);
    let result = birkhoff_normal_form(&ss, &expansion, k)?;
    Ok((expansion, result))
}

/// Largest variation of `h(g, mu)` under the left action
/// `(g, mu) -> (a g, mu)` over `samples` random pairs.
pub fn invariance_defect_so3(h: &dyn Fn(&Rotation, &Vector3<f64>) -> f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rot = |rng: &mut ChaCha8Rng| Rotation::exp(&Vector3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let g = rot(&mut rng);
        let a = rot(&mut rng);
        let mu = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        worst = worst.max((h(&(a * g), &mu) - h(&g, &mu)).abs());
    }
    worst
}

/// Checks invariance, then runs [`normal_form_via_jets`] on `h(e, .)`.
pub fn normal_form_via_jets_so3(
    mu: &Vector3<f64>,
    h: &dyn Fn(&Rotation, &Vector3<f64>) -> f64,
    k: usize,
    seed: u64,
) -> Result<ViaJets> {
    let defect = invariance_defect_so3(h, 64, seed);
    if defect > 1e-9 {
        return Err(Error::NonInvariantHamiltonian(defect));
    }
    let spec = LieAlgebraSpec::so3(mu)?;
    let id = Rotation::identity();
    normal_form_via_jets(&spec, &|m: &[f64]| h(&id, &Vector3::from_column_slice(m)), k)
}

