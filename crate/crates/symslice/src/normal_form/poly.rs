//! Sparse multivariate polynomials truncated at a maximum degree, and the
//! Poisson bracket of a constant Poisson tensor.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped.
pub const PRUNE: f64 = 1e-14;

/// Exponent vector, ordered by total degree and then lexicographically with
/// higher powers of earlier variables first.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Comma-separated exponents, the key used in JSON reports.
    pub fn key(&self) -> String {
        self.0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
    }

    /// All monomials of total degree `d` in `n` variables, in order.
    pub fn all_of_degree(n: usize, d: usize) -> Vec<Monomial> {
        fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if prefix.len() + 1 == n {
                prefix.push(left);
                out.push(Monomial(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=left).rev() {
                prefix.push(e);
                rec(n, left - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            if d == 0 {
                out.push(Monomial(Vec::new()));
            }
            return out;
        }
        rec(n, d as u32, &mut Vec::with_capacity(n), &mut out);
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct GradedPolynomial {
    n_vars: usize,
    max_degree: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl GradedPolynomial {
    pub fn zero(n_vars: usize, max_degree: usize) -> Self {
        GradedPolynomial { n_vars, max_degree, terms: BTreeMap::new() }
    }

    pub fn constant(n_vars: usize, max_degree: usize, c: f64) -> Self {
        let mut p = Self::zero(n_vars, max_degree);
        p.add_term(Monomial::one(n_vars), c);
        p
    }

    pub fn variable(n_vars: usize, max_degree: usize, i: usize) -> Self {
        let mut p = Self::zero(n_vars, max_degree);
        p.add_term(Monomial::var(n_vars, i), 1.0);
        p
    }

    pub fn from_terms(n_vars: usize, max_degree: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Self::zero(n_vars, max_degree);
        for (e, c) in terms {
            assert_eq!(e.len(), n_vars, "exponent vector length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn with_max_degree(mut self, d: usize) -> Self {
        self.max_degree = d;
        self.terms.retain(|m, _| m.degree() <= d);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c x^m`, dropping terms above the truncation degree.
    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if m.degree() > self.max_degree || c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0.0);
        *entry += c;
    }

    pub fn prune(mut self) -> Self {
        self.terms.retain(|_, c| c.abs() >= PRUNE);
        self
    }

    pub fn coefficient(&self, exps: &[u32]) -> f64 {
        self.terms.get(&Monomial(exps.to_vec())).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Highest degree with a nonzero term (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn homogeneous(&self, d: usize) -> Self {
        let mut p = Self::zero(self.n_vars, self.max_degree);
        p.terms = self.terms.iter().filter(|(m, _)| m.degree() == d).map(|(m, &c)| (m.clone(), c)).collect();
        p
    }

    /// Part with degree in `lo..=hi`.
    pub fn degree_range(&self, lo: usize, hi: usize) -> Self {
        let mut p = Self::zero(self.n_vars, self.max_degree);
        p.terms = self.terms.iter().filter(|(m, _)| (lo..=hi).contains(&m.degree())).map(|(m, &c)| (m.clone(), c)).collect();
        p
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = self.clone();
        for c in p.terms.values_mut() {
            *c *= s;
        }
        p
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.n_vars, self.max_degree);
        for (m, &c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut d = m.0.clone();
                d[i] -= 1;
                p.add_term(Monomial(d), c * e as f64);
            }
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &c)| c * m.eval(x)).sum()
    }

    /// Substitutes `subs[i]` for variable `i`, truncating at the degree
    /// bound of the substituted polynomials.
    pub fn compose(&self, subs: &[GradedPolynomial]) -> Self {
        assert_eq!(subs.len(), self.n_vars);
        let n = subs.first().map(|s| s.n_vars).unwrap_or(0);
        let max_degree = subs.iter().map(|s| s.max_degree).min().unwrap_or(self.max_degree);
        let mut out = Self::zero(n, max_degree);
        // Cache powers of each substitution.
        let mut powers: Vec<Vec<GradedPolynomial>> = subs.iter().map(|s| vec![Self::constant(n, max_degree, 1.0), s.clone()]).collect();
        for (m, &c) in &self.terms {
            let mut term = Self::constant(n, max_degree, c);
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &subs[i];
                    powers[i].push(next);
                }
                if e > 0 {
                    term = &term * &powers[i][e as usize];
                }
            }
            out = &out + &term;
        }
        out.prune()
    }

    /// Keeps monomials free of the first `p` variables and drops those
    /// variables: restriction to `x_0 = ... = x_{p-1} = 0`.
    pub fn restrict_leading_zero(&self, p: usize) -> Self {
        let mut out = Self::zero(self.n_vars - p, self.max_degree);
        for (m, &c) in &self.terms {
            if m.0[..p].iter().all(|&e| e == 0) {
                out.add_term(Monomial(m.0[p..].to_vec()), c);
            }
        }
        out
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.n_vars, other.n_vars, "variable count mismatch");
        let mut p = self.clone();
        p.max_degree = self.max_degree.min(other.max_degree);
        p.terms.retain(|m, _| m.degree() <= p.max_degree);
        for (m, &c) in &other.terms {
            p.add_term(m.clone(), sign * c);
        }
        p.prune()
    }
}

impl Add for &GradedPolynomial {
    type Output = GradedPolynomial;
    fn add(self, rhs: &GradedPolynomial) -> GradedPolynomial {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &GradedPolynomial {
    type Output = GradedPolynomial;
    fn sub(self, rhs: &GradedPolynomial) -> GradedPolynomial {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &GradedPolynomial {
    type Output = GradedPolynomial;
    fn neg(self) -> GradedPolynomial {
        self.scale(-1.0)
    }
}

impl Mul for &GradedPolynomial {
    type Output = GradedPolynomial;
    fn mul(self, rhs: &GradedPolynomial) -> GradedPolynomial {
        assert_eq!(self.n_vars, rhs.n_vars, "variable count mismatch");
        let mut p = GradedPolynomial::zero(self.n_vars, self.max_degree.min(rhs.max_degree));
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                if a.degree() + b.degree() <= p.max_degree {
                    p.add_term(a.times(b), ca * cb);
                }
            }
        }
        p.prune()
    }
}

impl fmt::Display for GradedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let vars: Vec<String> = m
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
                    .collect();
                if vars.is_empty() {
                    format!("{c:+.6e}")
                } else {
                    format!("{c:+.6e}*{}", vars.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Constant Poisson tensor `P`, with `{f, g} = grad f^T P grad g`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticStructure {
    poisson: DMatrix<f64>,
}

impl SymplecticStructure {
    /// From a symplectic form `W` (so that `W(X_H, .) = dH`): `P = -W^{-1}`.
    pub fn from_form(w: &DMatrix<f64>) -> Result<Self> {
        if !w.is_square() || (w + w.transpose()).amax() > 1e-12 * w.amax().max(1.0) {
            return Err(Error::InvalidConfig("symplectic form must be square and antisymmetric".into()));
        }
        let inv = w.clone().try_inverse().ok_or_else(|| Error::SingularBlock("symplectic form".into()))?;
        Ok(SymplecticStructure { poisson: -inv })
    }

    /// Canonical structure on `(q_1..q_n, p_1..p_n)` with `{q_i, p_j} = delta_ij`.
    pub fn canonical(n_dof: usize) -> Self {
        let mut p = DMatrix::zeros(2 * n_dof, 2 * n_dof);
        for i in 0..n_dof {
            p[(i, n_dof + i)] = 1.0;
            p[(n_dof + i, i)] = -1.0;
        }
        SymplecticStructure { poisson: p }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.dim(), other.dim());
        let mut p = DMatrix::zeros(a + b, a + b);
        p.view_mut((0, 0), (a, a)).copy_from(&self.poisson);
        p.view_mut((a, a), (b, b)).copy_from(&other.poisson);
        SymplecticStructure { poisson: p }
    }

    pub fn dim(&self) -> usize {
        self.poisson.nrows()
    }

    pub fn poisson(&self) -> &DMatrix<f64> {
        &self.poisson
    }
}

/// `{f, g}`, truncated at the smaller degree bound.
pub fn poisson_bracket(ss: &SymplecticStructure, f: &GradedPolynomial, g: &GradedPolynomial) -> GradedPolynomial {
    let n = ss.dim();
    assert_eq!(f.n_vars(), n);
    assert_eq!(g.n_vars(), n);
    let df: Vec<GradedPolynomial> = (0..n).map(|i| f.derivative(i)).collect();
    let dg: Vec<GradedPolynomial> = (0..n).map(|j| g.derivative(j)).collect();
    let mut out = GradedPolynomial::zero(n, f.max_degree().min(g.max_degree()));
    for i in 0..n {
        if df[i].is_zero() {
            continue;
        }
        let mut row = GradedPolynomial::zero(n, out.max_degree());
        for j in 0..n {
            let pij = ss.poisson[(i, j)];
            if pij != 0.0 && !dg[j].is_zero() {
                row = &row + &dg[j].scale(pij);
            }
        }
        out = &out + &(&df[i] * &row);
    }
    out.prune()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomials_of_degree() {
        assert_eq!(Monomial::all_of_degree(3, 2).len(), 6);
        assert_eq!(Monomial::all_of_degree(8, 4).len(), 330);
        assert_eq!(Monomial::all_of_degree(2, 0), vec![Monomial::one(2)]);
        let ms = Monomial::all_of_degree(2, 2);
        assert_eq!(ms[0].exps(), &[2, 0]);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn canonical_bracket_of_coordinates() {
        let ss = SymplecticStructure::canonical(1);
        let q = GradedPolynomial::variable(2, 4, 0);
        let p = GradedPolynomial::variable(2, 4, 1);
        assert_eq!(poisson_bracket(&ss, &q, &p).coefficient(&[0, 0]), 1.0);
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(SymplecticStructure::from_form(&w).unwrap(), ss);
    }

    #[test]
    fn product_truncates() {
        let x = GradedPolynomial::variable(1, 3, 0);
        let one = GradedPolynomial::constant(1, 3, 1.0);
        let p = &x + &one;
        let cube = &(&p * &p) * &p;
        assert_eq!(cube.coefficient(&[3]), 1.0);
        let sq = &cube * &p;
        assert_eq!(sq.coefficient(&[3]), 4.0);
        assert_eq!(sq.degree(), 3);
    }

    #[test]
    fn compose_and_restrict() {
        // f(u, v) = u^2 v with u = x + y, v = y.
        let f = GradedPolynomial::from_terms(2, 4, [(vec![2, 1], 1.0)]);
        let x = GradedPolynomial::variable(2, 4, 0);
        let y = GradedPolynomial::variable(2, 4, 1);
        let g = f.compose(&[&x + &y, y.clone()]);
        assert_eq!(g.coefficient(&[2, 1]), 1.0);
        assert_eq!(g.coefficient(&[1, 2]), 2.0);
        assert_eq!(g.coefficient(&[0, 3]), 1.0);
        let r = g.restrict_leading_zero(1);
        assert_eq!(r.coefficient(&[3]), 1.0);
        assert_eq!(r.len(), 1);
    }
}
