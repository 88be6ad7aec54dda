//! Jets of the tube map `F(nu, eta) = exp(P(nu, eta))` for a general Lie
//! algebra, solved order by order from the differentiated Tube Condition.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::poly::{GradedPolynomial, Monomial};

/// Polynomial with values in the Lie algebra, one component per basis vector.
pub type AlgebraPolynomial = Vec<GradedPolynomial>;

/// Lie algebra with structure constants `[e_i, e_j] = sum_k c_ijk e_k`, a
/// momentum value `mu` in the dual, and an inner product used to split off
/// the complement of the isotropy algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebraSpec {
    dim: usize,
    structure: Vec<f64>,
    mu: DVector<f64>,
    inner: DMatrix<f64>,
}

impl LieAlgebraSpec {
    pub fn new(dim: usize, structure: Vec<f64>, mu: DVector<f64>, inner: DMatrix<f64>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidLieAlgebra(m.into()));
        if structure.len() != dim * dim * dim || mu.len() != dim || inner.shape() != (dim, dim) {
            return bad("dimension mismatch");
        }
        let spec = LieAlgebraSpec { dim, structure, mu, inner };
        let scale = spec.structure.iter().fold(1.0, |a: f64, c| a.max(c.abs()));
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    if (spec.c(i, j, k) + spec.c(j, i, k)).abs() > 1e-14 * scale {
                        return bad("structure constants are not antisymmetric");
                    }
                }
            }
        }
        let jacobi = spec.jacobi_defect();
        if jacobi > 1e-12 * scale * scale {
            return Err(Error::InvalidLieAlgebra(format!("Jacobi identity fails by {jacobi:.3e}")));
        }
        if (&spec.inner - spec.inner.transpose()).amax() > 1e-14 * spec.inner.amax() || spec.inner.clone().cholesky().is_none() {
            return bad("inner product must be symmetric positive definite");
        }
        if spec.mu.amax() == 0.0 {
            return bad("mu must be nonzero");
        }
        Ok(spec)
    }

    /// `so(3)` with `[e_i, e_j] = eps_ijk e_k`, the Euclidean inner product
    /// and momentum `mu`.
    pub fn so3(mu: &Vector3<f64>) -> Result<Self> {
        let mut c = vec![0.0; 27];
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[(i * 3 + j) * 3 + k] = 1.0;
            c[(j * 3 + i) * 3 + k] = -1.0;
        }
        Self::new(3, c, DVector::from_column_slice(mu.as_slice()), DMatrix::identity(3, 3))
    }

    pub fn abelian(mu: DVector<f64>) -> Result<Self> {
        let n = mu.len();
        Self::new(n, vec![0.0; n * n * n], mu, DMatrix::identity(n, n))
    }

    /// Structure constants of the span of `basis` (closed under the matrix
    /// commutator), found by least squares.
    pub fn from_matrix_basis(basis: &[DMatrix<f64>], mu: DVector<f64>, inner: DMatrix<f64>) -> Result<Self> {
        let n = basis.len();
        let flat = DMatrix::from_fn(basis[0].len(), n, |r, c| basis[c].as_slice()[r]);
        let svd = flat.clone().svd(true, true);
        let mut c = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let comm = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let rhs = DVector::from_column_slice(comm.as_slice());
                let x = svd.solve(&rhs, 1e-12).map_err(|e| Error::InvalidLieAlgebra(e.into()))?;
                if (&flat * &x - &rhs).amax() > 1e-10 * rhs.amax().max(1.0) {
                    return Err(Error::InvalidLieAlgebra("basis is not closed under the commutator".into()));
                }
                for k in 0..n {
                    c[(i * n + j) * n + k] = x[k];
                }
            }
        }
        Self::new(n, c, mu, inner)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |k, _| (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| self.c(i, j, k) * x[i] * y[j]).sum())
    }

    /// `ad*_x nu`, with `(ad*_x nu)(y) = nu([x, y])`.
    pub fn coad(&self, x: &DVector<f64>, nu: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |j, _| (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| x[i] * self.c(i, j, k) * nu[k]).sum())
    }

    /// Largest Jacobi-identity defect over basis triples.
    pub fn jacobi_defect(&self) -> f64 {
        let n = self.dim;
        let e = |i: usize| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b, c) = (e(i), e(j), e(k));
                    let s = self.bracket(&a, &self.bracket(&b, &c)) + self.bracket(&b, &self.bracket(&c, &a)) + self.bracket(&c, &self.bracket(&a, &b));
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }

    /// Orthonormal bases (for the inner product) of the isotropy algebra
    /// `g_mu = {x : ad*_x mu = 0}` and of its orthogonal complement.
    pub fn isotropy_split(&self) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let n = self.dim;
        let b = DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.c(i, j, k) * self.mu[k]).sum::<f64>());
        let svd = b.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let thr = 1e-10 * svd.singular_values.max().max(1.0);
        let ker: Vec<DVector<f64>> = (0..n).filter(|&i| svd.singular_values[i] <= thr).map(|i| vt.row(i).transpose()).collect();
        let ker = orthonormalize(&self.inner, ker);
        let project = |v: DVector<f64>| -> DVector<f64> {
            let mut p = v.clone();
            for k in &ker {
                p -= k * (k.dot(&(&self.inner * &v)));
            }
            p
        };
        let std: Vec<DVector<f64>> = (0..n).map(|i| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
        let kappa = orthonormalize(&self.inner, std.iter().map(|e| e - project(e.clone())).collect());
        let zeta = orthonormalize(&self.inner, std.into_iter().map(project).collect());
        (kappa, zeta)
    }
}

/// Pivoted Gram-Schmidt in the inner product `m`: repeatedly takes the
/// candidate with the largest remaining norm (earliest on ties).
fn orthonormalize(m: &DMatrix<f64>, mut cands: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let norm = |v: &DVector<f64>| v.dot(&(m * v)).max(0.0).sqrt();
    let mut out: Vec<DVector<f64>> = Vec::new();
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in cands.iter().enumerate() {
            let nv = norm(v);
            if nv > 1e-8 && best.is_none_or(|(_, b)| nv > b * (1.0 + 1e-12)) {
                best = Some((i, nv));
            }
        }
        let Some((i, nv)) = best else { return out };
        let q = cands.remove(i) / nv;
        for v in cands.iter_mut() {
            let proj = q.dot(&(m * &*v));
            *v -= &q * proj;
        }
        out.push(q);
    }
}

/// How the solve picked among non-unique solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JetClosure {
    /// Minimum-norm solution subject to equivariance under the isotropy group.
    Equivariant,
    /// Plain minimum-norm solution.
    MinimumNorm,
}

#[derive(Clone, Debug)]
pub struct TubeJets {
    pub order: usize,
    /// Basis of `g_mu`; coordinates `a` with `nu = sum a_i M kappa_i`.
    pub kappa: Vec<DVector<f64>>,
    /// Basis of the complement; coordinates `b` with `eta = sum b_j zeta_j`.
    pub zeta: Vec<DVector<f64>>,
    /// `log F` in the variables `(a, b)`, truncated at `order`.
    pub log: AlgebraPolynomial,
    /// Closure used at each order `2..=order`.
    pub closures: Vec<JetClosure>,
    /// Sup-norm of the Tube Condition at each matched degree `0..order`.
    pub residuals: Vec<f64>,
}

impl TubeJets {
    pub fn n_vars(&self) -> usize {
        self.kappa.len() + self.zeta.len()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// Workspace for one Lie algebra: bases, variable layout and the pieces of
/// the Tube Condition that do not depend on `P`.
struct JetProblem<'a> {
    spec: &'a LieAlgebraSpec,
    kappa: Vec<DVector<f64>>,
    zeta: Vec<DVector<f64>>,
    n: usize,
    /// Covector paired with `Theta v_p` through `nu_dot`: `M kappa_p` or 0.
    nu_dot: Vec<DVector<f64>>,
    /// `zeta(v_p)`: the complement part of direction `p`.
    zeta_dir: Vec<DVector<f64>>,
}

impl<'a> JetProblem<'a> {
    fn new(spec: &'a LieAlgebraSpec) -> Self {
        let (kappa, zeta) = spec.isotropy_split();
        let d = spec.dim;
        let n = kappa.len() + zeta.len();
        let p = kappa.len();
        let nu_dot = (0..n).map(|i| if i < p { &spec.inner * &kappa[i] } else { DVector::zeros(d) }).collect();
        let zeta_dir = (0..n).map(|i| if i < p { DVector::zeros(d) } else { zeta[i - p].clone() }).collect();
        JetProblem { spec, kappa, zeta, n, nu_dot, zeta_dir }
    }

    fn zero_poly(&self, deg: usize) -> AlgebraPolynomial {
        vec![GradedPolynomial::zero(self.n, deg); self.spec.dim]
    }

    fn bracket(&self, a: &AlgebraPolynomial, b: &AlgebraPolynomial, deg: usize) -> AlgebraPolynomial {
        let d = self.spec.dim;
        let mut out = self.zero_poly(deg);
        for i in 0..d {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if b[j].is_zero() || (0..d).all(|k| self.spec.c(i, j, k) == 0.0) {
                    continue;
                }
                let prod = &a[i] * &b[j];
                for k in 0..d {
                    let c = self.spec.c(i, j, k);
                    if c != 0.0 {
                        out[k] = &out[k] + &prod.scale(c);
                    }
                }
            }
        }
        out
    }

    fn pair(w: &DVector<f64>, a: &AlgebraPolynomial) -> GradedPolynomial {
        let mut out = GradedPolynomial::zero(a[0].n_vars(), a[0].max_degree());
        for (wk, ak) in w.iter().zip(a) {
            if *wk != 0.0 {
                out = &out + &ak.scale(*wk);
            }
        }
        out
    }

    /// `Theta(x) v_i = sum_m (-1)^m / (m+1)! ad_P^m (d_i P)`, truncated at `deg`.
    fn theta(&self, p: &AlgebraPolynomial, i: usize, deg: usize) -> AlgebraPolynomial {
        let y: AlgebraPolynomial = p.iter().map(|c| c.derivative(i).with_max_degree(deg)).collect();
        let mut total = y.clone();
        let mut term = y;
        let mut fact = 1.0;
        for m in 1..=deg {
            term = self.bracket(p, &term, deg);
            fact *= (m + 1) as f64;
            let s = if m % 2 == 1 { -1.0 / fact } else { 1.0 / fact };
            for (t, x) in total.iter_mut().zip(&term) {
                *t = &*t + &x.scale(s);
            }
        }
        total
    }

    /// Degree-`deg` part of the Tube Condition residual for every pair of
    /// directions `p < q`.
    fn tube_condition(&self, p: &AlgebraPolynomial, deg: usize) -> Vec<GradedPolynomial> {
        let n = self.n;
        let th: Vec<AlgebraPolynomial> = (0..n).map(|i| self.theta(p, i, deg)).collect();
        let pk = self.kappa.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let br = self.bracket(&th[i], &th[j], deg);
                let mut s = Self::pair(&self.spec.mu, &br);
                for (l, k) in self.kappa.iter().enumerate() {
                    let a = GradedPolynomial::variable(n, deg, l);
                    let mk = &self.spec.inner * k;
                    s = &s + &(&a * &Self::pair(&mk, &br));
                }
                if i < pk || j < pk {
                    s = &s + &Self::pair(&self.nu_dot[j], &th[i]);
                    s = &s - &Self::pair(&self.nu_dot[i], &th[j]);
                }
                let c = self.spec.mu.dot(&self.spec.bracket(&self.zeta_dir[i], &self.zeta_dir[j]));
                s = &s - &GradedPolynomial::constant(n, deg, c);
                out.push(s.homogeneous(deg));
            }
        }
        out
    }

    /// Matrix of `x -> kappa_l . x` for the isotropy action on `(a, b)`.
    fn action_matrix(&self, l: usize) -> DMatrix<f64> {
        let n = self.n;
        let pk = self.kappa.len();
        let m = &self.spec.inner;
        let k = &self.kappa[l];
        let mut c = DMatrix::zeros(n, n);
        for col in 0..n {
            if col < pk {
                let nu = m * &self.kappa[col];
                let img = -self.spec.coad(k, &nu);
                for row in 0..pk {
                    c[(row, col)] = self.kappa[row].dot(&img);
                }
            } else {
                let img = self.spec.bracket(k, &self.zeta[col - pk]);
                for row in pk..n {
                    c[(row, col)] = self.zeta[row - pk].dot(&(m * &img));
                }
            }
        }
        c
    }

    /// `DP(x) (kappa_l . x) - [kappa_l, P(x)]`.
    fn equivariance(&self, p: &AlgebraPolynomial, l: usize, cmat: &DMatrix<f64>) -> AlgebraPolynomial {
        let d = self.spec.dim;
        let deg = p[0].max_degree();
        let n = self.n;
        let k = &self.kappa[l];
        let lin: Vec<GradedPolynomial> = (0..n)
            .map(|r| {
                let mut g = GradedPolynomial::zero(n, deg);
                for c in 0..n {
                    g.add_term(Monomial::var(n, c), cmat[(r, c)]);
                }
                g
            })
            .collect();
        (0..d)
            .map(|comp| {
                let mut out = GradedPolynomial::zero(n, deg);
                for r in 0..n {
                    out = &out + &(&p[comp].derivative(r) * &lin[r]);
                }
                for i in 0..d {
                    for j in 0..d {
                        let c = self.spec.c(i, j, comp) * k[i];
                        if c != 0.0 {
                            out = &out - &p[j].scale(c);
                        }
                    }
                }
                out
            })
            .collect()
    }
}

/// Largest acceptable Tube Condition residual at a solved order.
pub const JET_TOL: f64 = 1e-9;

/// Jets of `log F` up to `order`, starting from `P_1 = eta`.
pub fn tube_jet_solve(spec: &LieAlgebraSpec, order: usize) -> Result<TubeJets> {
    let prob = JetProblem::new(spec);
    let (d, n, pk) = (spec.dim, prob.n, prob.kappa.len());
    let mut log = prob.zero_poly(order.max(1));
    for (j, z) in prob.zeta.iter().enumerate() {
        for comp in 0..d {
            log[comp].add_term(Monomial::var(n, pk + j), z[comp]);
        }
    }
    let mut residuals = vec![prob.tube_condition(&log, 0).iter().map(|p| p.max_abs_coefficient()).fold(0.0, f64::max)];
    let mut closures = Vec::new();
    let cmats: Vec<DMatrix<f64>> = (0..pk).map(|l| prob.action_matrix(l)).collect();
    for j in 2..=order {
        let deg = j - 1;
        let low: AlgebraPolynomial = log.iter().map(|c| c.clone().with_max_degree(j)).collect();
        let base = prob.tube_condition(&low, deg);
        let rows_t = Monomial::all_of_degree(n, deg);
        let unknowns = Monomial::all_of_degree(n, j);
        let flatten_t = |t: &[GradedPolynomial]| -> Vec<f64> { t.iter().flat_map(|p| rows_t.iter().map(move |m| p.coefficient(m.exps()))).collect() };
        let flatten_e = |e: &[AlgebraPolynomial]| -> Vec<f64> {
            e.iter().flat_map(|a| a.iter().flat_map(|p| unknowns.iter().map(move |m| p.coefficient(m.exps())))).collect()
        };
        let b_t = DVector::from_vec(flatten_t(&base));
        let mut cols_t = Vec::new();
        let mut cols_e = Vec::new();
        for m in &unknowns {
            for comp in 0..d {
                let mut q = low.clone();
                q[comp].add_term(m.clone(), 1.0);
                let t = prob.tube_condition(&q, deg);
                cols_t.push(DVector::from_vec(flatten_t(&t)) - &b_t);
                let mut unit_p = prob.zero_poly(j);
                unit_p[comp].add_term(m.clone(), 1.0);
                let e: Vec<AlgebraPolynomial> = (0..pk).map(|l| prob.equivariance(&unit_p, l, &cmats[l])).collect();
                cols_e.push(DVector::from_vec(flatten_e(&e)));
            }
        }
        let a_t = DMatrix::from_columns(&cols_t);
        let a_e = if pk > 0 { DMatrix::from_columns(&cols_e) } else { DMatrix::zeros(0, cols_t.len()) };
        let solve = |a: &DMatrix<f64>, rhs: &DVector<f64>| -> DVector<f64> {
            let svd = a.clone().svd(true, true);
            let tol = 1e-10 * svd.singular_values.max().max(1.0);
            svd.solve(&(-rhs), tol).expect("U and V were computed")
        };
        let stacked = {
            let mut a = DMatrix::zeros(a_t.nrows() + a_e.nrows(), a_t.ncols());
            a.view_mut((0, 0), a_t.shape()).copy_from(&a_t);
            a.view_mut((a_t.nrows(), 0), a_e.shape()).copy_from(&a_e);
            let mut rhs = DVector::zeros(a.nrows());
            rhs.rows_mut(0, b_t.len()).copy_from(&b_t);
            (a, rhs)
        };
        let mut x = solve(&stacked.0, &stacked.1);
        let mut closure = JetClosure::Equivariant;
        let resid = |x: &DVector<f64>| (&a_t * x + &b_t).amax();
        if resid(&x) > JET_TOL || (&a_e * &x).amax() > JET_TOL {
            x = solve(&a_t, &b_t);
            closure = JetClosure::MinimumNorm;
        }
        let r = resid(&x);
        if r > JET_TOL {
            return Err(Error::InconsistentJetSystem { order: j, residual: r });
        }
        for (idx, m) in unknowns.iter().enumerate() {
            for comp in 0..d {
                log[comp].add_term(m.clone(), x[idx * d + comp]);
            }
        }
        log = log.into_iter().map(GradedPolynomial::prune).collect();
        let check = prob.tube_condition(&log.iter().map(|c| c.clone().with_max_degree(j)).collect::<Vec<_>>(), deg);
        residuals.push(check.iter().map(|p| p.max_abs_coefficient()).fold(0.0, f64::max));
        closures.push(closure);
    }
    Ok(TubeJets { order, kappa: prob.kappa, zeta: prob.zeta, log, closures, residuals })
}

/// Momentum `exp(-ad*_P)(mu + nu(a))` as a polynomial in `(a, b)`,
/// truncated at the jet order.
pub fn momentum_polynomial(spec: &LieAlgebraSpec, jets: &TubeJets) -> AlgebraPolynomial {
    let d = spec.dim();
    let n = jets.n_vars();
    let deg = jets.order;
    let mut w: AlgebraPolynomial = (0..d).map(|k| GradedPolynomial::constant(n, deg, spec.mu()[k])).collect();
    for (l, kappa) in jets.kappa.iter().enumerate() {
        let mk = spec.inner() * kappa;
        for k in 0..d {
            w[k].add_term(Monomial::var(n, l), mk[k]);
        }
    }
    let mut total = w.clone();
    let mut term = w;
    for m in 1..=deg {
        // (-ad*_P w)_j = -sum_{i,k} P_i c_ijk w_k
        let mut next: AlgebraPolynomial = vec![GradedPolynomial::zero(n, deg); d];
        for i in 0..d {
            for k in 0..d {
                if jets.log[i].is_zero() || term[k].is_zero() {
                    continue;
                }
                let prod = &jets.log[i] * &term[k];
                for j in 0..d {
                    let c = spec.c(i, j, k);
                    if c != 0.0 {
                        next[j] = &next[j] - &prod.scale(c / m as f64);
                    }
                }
            }
        }
        for (t, x) in total.iter_mut().zip(&next) {
            *t = &*t + x;
        }
        term = next;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn so3_split_is_axis_and_plane() {
        let spec = LieAlgebraSpec::so3(&Vector3::new(0.0, 0.0, 2.0)).unwrap();
        let (k, z) = spec.isotropy_split();
        assert_eq!(k.len(), 1);
        assert_eq!(z.len(), 2);
        assert!((k[0][2].abs() - 1.0).abs() < 1e-14);
        assert!((&z[0] - unit(3, 0)).amax() < 1e-14 && (&z[1] - unit(3, 1)).amax() < 1e-14);
    }

    #[test]
    fn structure_constants_are_validated() {
        let mut c = vec![0.0; 27];
        c[5] = 1.0; // [e0, e1] = e2 without the antisymmetric partner
        let err = LieAlgebraSpec::new(3, c, DVector::from_element(3, 1.0), DMatrix::identity(3, 3));
        assert!(matches!(err, Err(Error::InvalidLieAlgebra(_))));
    }

    #[test]
    fn abelian_tube_is_trivial() {
        let spec = LieAlgebraSpec::abelian(DVector::from_vec(vec![1.0, 0.5])).unwrap();
        let jets = tube_jet_solve(&spec, 3).unwrap();
        assert!(jets.zeta.is_empty());
        assert!(jets.log.iter().all(GradedPolynomial::is_zero));
        assert_eq!(jets.max_residual(), 0.0);
    }
}
