//! The homological equation `{H2, F} + H_d = R_d` with `R_d` in the kernel
//! of `{H2, .}`, solved on the monomial basis of one degree.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::poly::{poisson_bracket, GradedPolynomial, Monomial, SymplecticStructure};

/// Singular values below this fraction of the largest span the kernel.
pub const KERNEL_TOL: f64 = 1e-8;
/// Largest acceptable condition number of the kernel-plus-image basis.
pub const MAX_CONDITION: f64 = 1e8;

/// Matrix of `g -> {H2, g}` on the degree-`d` monomials.
pub fn bracket_matrix(ss: &SymplecticStructure, h2: &GradedPolynomial, d: usize) -> (Vec<Monomial>, DMatrix<f64>) {
    let n = ss.dim();
    let basis = Monomial::all_of_degree(n, d);
    let index: HashMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut l = DMatrix::zeros(basis.len(), basis.len());
    let h2 = h2.homogeneous(2).with_max_degree(d.max(2));
    for (j, m) in basis.iter().enumerate() {
        let mut g = GradedPolynomial::zero(n, d.max(2));
        g.add_term(m.clone(), 1.0);
        for (mm, c) in poisson_bracket(ss, &h2, &g).terms() {
            l[(index[mm], j)] = c;
        }
    }
    (basis, l)
}

/// Kernel/image splitting of `{H2, .}` on one degree.
pub struct Splitting {
    pub basis: Vec<Monomial>,
    /// Right singular vectors spanning the kernel.
    pub kernel: DMatrix<f64>,
    /// Left singular vectors spanning the image, with their singular values
    /// and right partners.
    pub image_u: DMatrix<f64>,
    pub image_v: DMatrix<f64>,
    pub image_sigma: DVector<f64>,
    pub condition: f64,
}

/// Splits the degree-`d` polynomials into kernel and image of `{H2, .}`.
/// Fails if they do not span (the quadratic part is not semisimple) or
/// the combined basis is too ill-conditioned to use.
pub fn split(ss: &SymplecticStructure, h2: &GradedPolynomial, d: usize) -> Result<Splitting> {
    let (basis, l) = bracket_matrix(ss, h2, d);
    let n = basis.len();
    let svd = l.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let thr = KERNEL_TOL * smax.max(1.0);
    let img: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] > thr).collect();
    let ker: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= thr).collect();
    let kernel = DMatrix::from_fn(n, ker.len(), |r, c| vt[(ker[c], r)]);
    let image_u = DMatrix::from_fn(n, img.len(), |r, c| u[(r, img[c])]);
    let image_v = DMatrix::from_fn(n, img.len(), |r, c| vt[(img[c], r)]);
    let image_sigma = DVector::from_iterator(img.len(), img.iter().map(|&i| svd.singular_values[i]));
    let mut combined = DMatrix::zeros(n, n);
    combined.view_mut((0, 0), (n, ker.len())).copy_from(&kernel);
    combined.view_mut((0, ker.len()), (n, img.len())).copy_from(&image_u);
    let sv = combined.singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if lo <= 1e-12 * hi {
        return Err(Error::NonDiagonalizableQuadraticPart(d));
    }
    let condition = hi / lo;
    if condition > MAX_CONDITION {
        return Err(Error::IllConditionedEigenbasis(condition));
    }
    Ok(Splitting { basis, kernel, image_u, image_v, image_sigma, condition })
}

#[derive(Clone, Debug)]
pub struct HomologicalSolution {
    /// Generator `F` of degree `d`.
    pub generator: GradedPolynomial,
    /// Resonant remainder `R_d`, in the kernel of `{H2, .}`.
    pub remainder: GradedPolynomial,
    pub kernel_dim: usize,
    pub condition: f64,
}

/// Solves `{H2, F} + H_d = R_d` for homogeneous `H_d` of degree `d`.
pub fn homological_solve(ss: &SymplecticStructure, h2: &GradedPolynomial, hd: &GradedPolynomial, d: usize) -> Result<HomologicalSolution> {
    let sp = split(ss, h2, d)?;
    let n = sp.basis.len();
    let nv = ss.dim();
    let rhs = DVector::from_iterator(n, sp.basis.iter().map(|m| hd.coefficient(m.exps())));
    let (nk, ni) = (sp.kernel.ncols(), sp.image_u.ncols());
    let mut combined = DMatrix::zeros(n, n);
    combined.view_mut((0, 0), (n, nk)).copy_from(&sp.kernel);
    combined.view_mut((0, nk), (n, ni)).copy_from(&sp.image_u);
    let c = combined.lu().solve(&rhs).ok_or(Error::NonDiagonalizableQuadraticPart(d))?;
    let r = &sp.kernel * c.rows(0, nk);
    // L F = -(image part): F = -V Sigma^{-1} c_img.
    let f = -(&sp.image_v * c.rows(nk, ni).component_div(&sp.image_sigma));
    let to_poly = |v: &DVector<f64>| {
        let mut p = GradedPolynomial::zero(nv, d.max(hd.max_degree()));
        for (m, &x) in sp.basis.iter().zip(v.iter()) {
            p.add_term(m.clone(), x);
        }
        p.prune()
    };
    Ok(HomologicalSolution { generator: to_poly(&f), remainder: to_poly(&r), kernel_dim: nk, condition: sp.condition })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nilpotent_quadratic_part_is_rejected() {
        let ss = SymplecticStructure::canonical(1);
        let h2 = GradedPolynomial::from_terms(2, 4, [(vec![0, 2], 0.5)]);
        assert!(matches!(split(&ss, &h2, 3), Err(Error::NonDiagonalizableQuadraticPart(3))));
    }

    #[test]
    fn harmonic_oscillator_cubic_has_no_remainder() {
        let ss = SymplecticStructure::canonical(1);
        let h2 = GradedPolynomial::from_terms(2, 4, [(vec![2, 0], 0.5), (vec![0, 2], 0.5)]);
        let h3 = GradedPolynomial::from_terms(2, 4, [(vec![3, 0], 1.0), (vec![1, 2], -0.3)]);
        let sol = homological_solve(&ss, &h2, &h3, 3).unwrap();
        assert_eq!(sol.kernel_dim, 0);
        assert!(sol.remainder.is_zero());
        let check = &(&poisson_bracket(&ss, &h2, &sol.generator) + &h3) - &sol.remainder;
        assert!(check.max_abs_coefficient() < 1e-12);
    }
}
