//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Matrix3, Vector3};
use symslice::so3::hat;

/// Euler equations `mu_dot = mu × I^{-1} mu`, `S_dot = S hat(I^{-1} mu)` by RK4.
pub fn unreduced(inertia: &Vector3<f64>, s0: Matrix3<f64>, mu0: Vector3<f64>, dt: f64, steps: usize) -> (Matrix3<f64>, Vector3<f64>) {
    let f = |s: &Matrix3<f64>, m: &Vector3<f64>| {
        let w = m.component_div(inertia);
        (s * hat(&w), m.cross(&w))
    };
    let (mut s, mut m) = (s0, mu0);
    for _ in 0..steps {
        let (a1, b1) = f(&s, &m);
        let (a2, b2) = f(&(s + a1 * (dt / 2.0)), &(m + b1 * (dt / 2.0)));
        let (a3, b3) = f(&(s + a2 * (dt / 2.0)), &(m + b2 * (dt / 2.0)));
        let (a4, b4) = f(&(s + a3 * dt), &(m + b3 * dt));
        s += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (dt / 6.0);
        m += (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (dt / 6.0);
    }
    (s, m)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
        })
        .collect()
}

/// Independent normal form of a one-degree-of-freedom Hamiltonian in
/// complex coordinates `z = (q + ip)/sqrt2`, `w = conj z`, where `{z, w} = -i`
/// and `{zw, z^a w^b} = -i (b - a) z^a w^b` is diagonal.
pub mod complex_oracle {
    use std::collections::HashMap;

    use nalgebra::Complex;

    pub type CPoly = HashMap<(u32, u32), Complex<f64>>;

    fn add(p: &mut CPoly, k: (u32, u32), c: Complex<f64>) {
        *p.entry(k).or_insert(Complex::new(0.0, 0.0)) += c;
    }

    fn mul(a: &CPoly, b: &CPoly, k: u32) -> CPoly {
        let mut out = CPoly::new();
        for (&(i, j), &x) in a {
            for (&(m, n), &y) in b {
                if i + j + m + n <= k {
                    add(&mut out, (i + m, j + n), x * y);
                }
            }
        }
        out
    }

    fn bracket(f: &CPoly, g: &CPoly, k: u32) -> CPoly {
        let mut out = CPoly::new();
        let mi = Complex::new(0.0, -1.0);
        for (&(i, j), &x) in f {
            for (&(m, n), &y) in g {
                let deg = i + j + m + n;
                if deg < 2 || deg - 2 > k {
                    continue;
                }
                // f_z g_w - f_w g_z
                if i > 0 && n > 0 {
                    add(&mut out, (i - 1 + m, j + n - 1), mi * x * y * (i * n) as f64);
                }
                if j > 0 && m > 0 {
                    add(&mut out, (i + m - 1, j - 1 + n), -mi * x * y * (j * m) as f64);
                }
            }
        }
        out
    }

    /// `q^a` in complex coordinates.
    pub fn q_power(a: u32, k: u32) -> CPoly {
        let s = 1.0 / 2f64.sqrt();
        let q: CPoly = [((1, 0), Complex::new(s, 0.0)), ((0, 1), Complex::new(s, 0.0))].into_iter().collect();
        let mut out: CPoly = [((0, 0), Complex::new(1.0, 0.0))].into_iter().collect();
        for _ in 0..a {
            out = mul(&out, &q, k);
        }
        out
    }

    /// Coefficient of `(zw)^2` after normalising `zw + sum c_a q^a` to degree 4.
    pub fn quartic_coefficient(perturbation: &[(u32, f64)]) -> f64 {
        let k = 4;
        let mut h: CPoly = [((1, 1), Complex::new(1.0, 0.0))].into_iter().collect();
        for &(a, c) in perturbation {
            for (key, v) in q_power(a, k) {
                add(&mut h, key, v * c);
            }
        }
        for d in 3..=k {
            let mut f = CPoly::new();
            for (&(i, j), &c) in h.iter().filter(|((i, j), _)| i + j == d && i != j) {
                f.insert((i, j), -c / Complex::new(0.0, -(j as f64 - i as f64)));
            }
            let mut term = h.clone();
            for n in 1..=k {
                term = bracket(&term, &f, k);
                for v in term.values_mut() {
                    *v /= n as f64;
                }
                for (&key, &v) in &term {
                    add(&mut h, key, v);
                }
            }
        }
        h.get(&(2, 2)).map(|c| c.re).unwrap_or(0.0)
    }
}

