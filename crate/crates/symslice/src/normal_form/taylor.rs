//! Taylor coefficients of a black-box function by tensor-product central
//! differences with one Richardson step.

use crate::error::{Error, Result};

use super::poly::{GradedPolynomial, Monomial};

/// Gradient magnitude (relative to `max(1, |f|)`) above which a point is not
/// treated as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

/// One-dimensional central stencil for the `a`-th derivative at unit step,
/// as `(offset, weight)` pairs. Even orders are powers of the second
/// difference; odd orders add one first difference.
fn stencil(a: u32) -> Vec<(i32, f64)> {
    let mut s: Vec<(i32, f64)> = vec![(0, 1.0)];
    let conv = |s: &[(i32, f64)], t: &[(i32, f64)]| {
        let mut out: Vec<(i32, f64)> = Vec::new();
        for &(o1, w1) in s {
            for &(o2, w2) in t {
                match out.iter_mut().find(|(o, _)| *o == o1 + o2) {
                    Some(e) => e.1 += w1 * w2,
                    None => out.push((o1 + o2, w1 * w2)),
                }
            }
        }
        out.retain(|&(_, w)| w != 0.0);
        out
    };
    for _ in 0..a / 2 {
        s = conv(&s, &[(-1, 1.0), (0, -2.0), (1, 1.0)]);
    }
    if a % 2 == 1 {
        s = conv(&s, &[(-1, -0.5), (1, 0.5)]);
    }
    s
}

fn derivative(f: &dyn Fn(&[f64]) -> f64, z0: &[f64], alpha: &[u32], h: f64) -> f64 {
    let stencils: Vec<Vec<(i32, f64)>> = alpha.iter().map(|&a| stencil(a)).collect();
    let mut idx = vec![0usize; alpha.len()];
    let mut z = z0.to_vec();
    let mut sum = 0.0;
    loop {
        let mut w = 1.0;
        for (k, s) in stencils.iter().enumerate() {
            let (o, wk) = s[idx[k]];
            w *= wk;
            z[k] = z0[k] + h * o as f64;
        }
        sum += w * f(&z);
        let mut k = 0;
        loop {
            if k == idx.len() {
                let order: u32 = alpha.iter().sum();
                return sum / h.powi(order as i32);
            }
            idx[k] += 1;
            if idx[k] < stencils[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Step used for derivatives of total order `j`, balancing the O(h^4)
/// truncation left after extrapolation against rounding.
pub fn default_step(j: usize) -> f64 {
    f64::EPSILON.powf(1.0 / (j as f64 + 4.0))
}

/// Degree-`k` Taylor polynomial of `f` at `z0` in the displacement
/// `z - z0`, including constant and linear terms. `scale` multiplies the
/// default steps for functions varying on a scale other than 1.
pub fn taylor_coefficients(f: &dyn Fn(&[f64]) -> f64, z0: &[f64], k: usize, scale: f64) -> GradedPolynomial {
    let n = z0.len();
    let mut p = GradedPolynomial::zero(n, k);
    p.add_term(Monomial::one(n), f(z0));
    for j in 1..=k {
        let h = scale * default_step(j);
        for m in Monomial::all_of_degree(n, j) {
            let d1 = derivative(f, z0, m.exps(), h);
            let d2 = derivative(f, z0, m.exps(), 0.5 * h);
            let d = (4.0 * d2 - d1) / 3.0;
            let norm: f64 = m.exps().iter().map(|&e| factorial(e)).product();
            p.add_term(m, d / norm);
        }
    }
    p.prune()
}

/// Taylor expansion about an equilibrium `z0`, degrees 2 through `k`.
pub fn taylor_expand(f: &dyn Fn(&[f64]) -> f64, z0: &[f64], k: usize) -> Result<GradedPolynomial> {
    let full = taylor_coefficients(f, z0, k, 1.0);
    let f0 = full.coefficient(&vec![0; z0.len()]);
    let grad = full.homogeneous(1).max_abs_coefficient();
    if grad > EQUILIBRIUM_TOL * f0.abs().max(1.0) {
        return Err(Error::NotAnEquilibrium(grad));
    }
    Ok(full.degree_range(2, k))
}
