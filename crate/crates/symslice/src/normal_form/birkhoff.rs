//! Birkhoff normal form by successive Lie-series transforms.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::homological::{homological_solve, split};
use super::poly::{poisson_bracket, GradedPolynomial, Monomial, SymplecticStructure};

/// Relative threshold on `|sum alpha_i lambda_i|` for a resonance.
pub const RESONANCE_TOL: f64 = 1e-8;

/// `H o phi` where `phi` is the time-one flow of `X_F`, truncated at the
/// degree bound of `h`: `sum_n L_F^n H / n!` with `L_F g = {g, F}`.
pub fn lie_transform(ss: &SymplecticStructure, h: &GradedPolynomial, f: &GradedPolynomial) -> GradedPolynomial {
    let mut out = h.clone();
    let mut term = h.clone();
    for n in 1..=h.max_degree() + 1 {
        term = poisson_bracket(ss, &term, f).scale(1.0 / n as f64);
        if term.is_zero() {
            break;
        }
        out = &out + &term;
    }
    out
}

#[derive(Clone, Debug)]
pub struct BirkhoffResult {
    /// Normal form, degrees 2 through `k`.
    pub normal_form: GradedPolynomial,
    /// Generators `F_3, ..., F_k`, applied in that order.
    pub generators: Vec<GradedPolynomial>,
    /// Dimension of the kernel of `{H2, .}` per degree.
    pub kernel_dims: BTreeMap<usize, usize>,
    /// `max |{H2, NF_i}|` coefficient per degree.
    pub commutator_residuals: BTreeMap<usize, f64>,
}

impl BirkhoffResult {
    pub fn max_commutator_residual(&self) -> f64 {
        self.commutator_residuals.values().fold(0.0, |a, &b| a.max(b))
    }
}

/// Normalises `h` (degrees 2..k; constant and linear terms are dropped, so
/// the caller is responsible for the equilibrium check) so that every
/// homogeneous part Poisson-commutes with the quadratic part.
pub fn birkhoff_normal_form(ss: &SymplecticStructure, h: &GradedPolynomial, k: usize) -> Result<BirkhoffResult> {
    if h.n_vars() != ss.dim() {
        return Err(Error::InvalidConfig(format!("polynomial has {} variables, structure has {}", h.n_vars(), ss.dim())));
    }
    let mut nf = h.clone().with_max_degree(k).degree_range(2, k);
    let h2 = nf.homogeneous(2);
    let mut kernel_dims = BTreeMap::new();
    for d in 1..=2.min(k) {
        kernel_dims.insert(d, split(ss, &h2, d)?.kernel.ncols());
    }
    let mut generators = Vec::new();
    for d in 3..=k {
        let sol = homological_solve(ss, &h2, &nf.homogeneous(d), d)?;
        kernel_dims.insert(d, sol.kernel_dim);
        if !sol.generator.is_zero() {
            nf = lie_transform(ss, &nf, &sol.generator.clone().with_max_degree(k));
        }
        generators.push(sol.generator);
    }
    let commutator_residuals = (2..=k).map(|d| (d, poisson_bracket(ss, &h2, &nf.homogeneous(d)).max_abs_coefficient())).collect();
    Ok(BirkhoffResult { normal_form: nf, generators, kernel_dims, commutator_residuals })
}

/// Time-one flow of `X_F = P grad F` from `z`, by RK4 with `steps` steps.
pub fn hamiltonian_flow(ss: &SymplecticStructure, f: &GradedPolynomial, z: &[f64], steps: usize) -> Vec<f64> {
    let n = ss.dim();
    let grad: Vec<GradedPolynomial> = (0..n).map(|i| f.derivative(i)).collect();
    let field = |x: &DVector<f64>| {
        let g = DVector::from_iterator(n, grad.iter().map(|p| p.eval(x.as_slice())));
        ss.poisson() * g
    };
    let dt = 1.0 / steps as f64;
    let mut x = DVector::from_column_slice(z);
    for _ in 0..steps {
        let k1 = field(&x);
        let k2 = field(&(&x + &k1 * (0.5 * dt)));
        let k3 = field(&(&x + &k2 * (0.5 * dt)));
        let k4 = field(&(&x + &k3 * dt));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    x.as_slice().to_vec()
}

/// The point `phi(z)` with `NF = H o phi`: the flows of the generators,
/// last one first.
pub fn normalising_map(ss: &SymplecticStructure, generators: &[GradedPolynomial], z: &[f64]) -> Vec<f64> {
    generators.iter().rev().fold(z.to_vec(), |x, f| if f.is_zero() { x } else { hamiltonian_flow(ss, f, &x, 200) })
}

/// Hessian of the quadratic part, `H2 = 1/2 z^T S z`.
pub fn quadratic_hessian(h: &GradedPolynomial) -> DMatrix<f64> {
    let n = h.n_vars();
    let mut s = DMatrix::zeros(n, n);
    for (m, c) in h.homogeneous(2).terms() {
        let idx: Vec<usize> = m.exps().iter().enumerate().flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize)).collect();
        if idx[0] == idx[1] {
            s[(idx[0], idx[0])] = 2.0 * c;
        } else {
            s[(idx[0], idx[1])] = c;
            s[(idx[1], idx[0])] = c;
        }
    }
    s
}

/// Eigenvalues of the linearisation `P S`, sorted by imaginary then real part.
pub fn linear_eigenvalues(ss: &SymplecticStructure, h: &GradedPolynomial) -> Vec<Complex<f64>> {
    let a = ss.poisson() * quadratic_hessian(h);
    let mut ev: Vec<Complex<f64>> = a.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap().then(x.re.partial_cmp(&y.re).unwrap()));
    ev
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub degree: usize,
    /// Exponents on the eigenvalues in the order they are reported.
    pub exponents: Vec<u32>,
    /// `|sum alpha_i lambda_i|`.
    pub defect: f64,
}

/// Nontrivial resonances `sum alpha_i lambda_i = 0` with `|alpha| <= k`.
/// Combinations where each eigenvalue appears as often as its partner
/// `-lambda` are always resonant and are omitted.
pub fn resonances(eigenvalues: &[Complex<f64>], k: usize, tol: f64) -> Vec<Resonance> {
    let n = eigenvalues.len();
    let scale = eigenvalues.iter().map(|l| l.norm()).fold(1.0, f64::max);
    let mut partner = vec![usize::MAX; n];
    for i in 0..n {
        if partner[i] != usize::MAX {
            continue;
        }
        let best = (0..n)
            .filter(|&j| j != i && partner[j] == usize::MAX)
            .min_by(|&a, &b| (eigenvalues[a] + eigenvalues[i]).norm().partial_cmp(&(eigenvalues[b] + eigenvalues[i]).norm()).unwrap());
        if let Some(j) = best {
            partner[i] = j;
            partner[j] = i;
        }
    }
    let mut out = Vec::new();
    for d in 1..=k {
        for m in Monomial::all_of_degree(n, d) {
            let a = m.exps();
            let trivial = (0..n).all(|i| partner[i] == usize::MAX || a[i] == a[partner[i]]);
            if trivial {
                continue;
            }
            let sum: Complex<f64> = a.iter().zip(eigenvalues).map(|(&e, l)| l * e as f64).sum();
            if sum.norm() < tol * scale {
                out.push(Resonance { degree: d, exponents: a.to_vec(), defect: sum.norm() });
            }
        }
    }
    out
}

/// Serialisable summary of a normal-form computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub degree: usize,
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub resonances: Vec<Resonance>,
    /// Keyed by comma-separated exponents.
    pub coefficients: BTreeMap<String, f64>,
    /// `max |{H2, NF_i}|` keyed by degree.
    pub bracket_residuals: BTreeMap<String, f64>,
    pub kernel_dims: BTreeMap<String, usize>,
}

impl NormalFormReport {
    pub fn new(ss: &SymplecticStructure, result: &BirkhoffResult, k: usize) -> Self {
        let ev = linear_eigenvalues(ss, &result.normal_form);
        NormalFormReport {
            degree: k,
            eigenvalues: ev.iter().map(|c| [c.re, c.im]).collect(),
            resonances: resonances(&ev, k, RESONANCE_TOL),
            coefficients: result.normal_form.terms().map(|(m, c)| (m.key(), c)).collect(),
            bracket_residuals: result.commutator_residuals.iter().map(|(d, r)| (d.to_string(), *r)).collect(),
            kernel_dims: result.kernel_dims.iter().map(|(d, r)| (d.to_string(), *r)).collect(),
        }
    }
}
