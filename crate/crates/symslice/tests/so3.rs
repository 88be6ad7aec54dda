use nalgebra::Vector3;
use proptest::prelude::*;
use symslice::so3::*;

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

proptest! {
    #[test]
    fn conjugation_of_hat(v in vec3(3.0), w in vec3(2.0)) {
        let r = exp_so3(&v);
        let lhs = r * hat(&w) * r.transpose();
        prop_assert!((lhs - hat(&(r * w))).amax() < 1e-11);
    }

    #[test]
    fn exp_log_round_trip(v in vec3(1.7)) {
        prop_assume!(v.norm() < 3.0);
        let back = log_so3(&exp_so3(&v)).unwrap();
        prop_assert!((back - v).norm() < 1e-10 * v.norm().max(1.0));
    }

    #[test]
    fn jacobi_identity(x in vec3(2.0), y in vec3(2.0), z in vec3(2.0)) {
        let j = ad(&x, &ad(&y, &z)) + ad(&y, &ad(&z, &x)) + ad(&z, &ad(&x, &y));
        prop_assert!(j.amax() < 1e-12);
    }

    #[test]
    fn coadjoint_action_preserves_the_norm(v in vec3(3.0), mu in vec3(5.0)) {
        let g = Rotation::exp(&v);
        prop_assert!((big_coad(&g, &mu).norm() - mu.norm()).abs() < 1e-12 * mu.norm().max(1.0));
    }

    #[test]
    fn coad_is_dual_to_ad(x in vec3(2.0), y in vec3(2.0), mu in vec3(2.0)) {
        prop_assert!((coad(&x, &mu).dot(&y) - mu.dot(&ad(&x, &y))).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_exp_across_directions(v in vec3(2.0), w in vec3(1.0)) {
        let n = v.norm();
        prop_assume!(n > 1e-2 && n < 3.0);
        // Orthogonal direction, as in the closed form below.
        let w = w - v * (w.dot(&v) / (n * n));
        prop_assume!(w.norm() > 1e-2);
        let d = 1e-5;
        let fd = (exp_so3(&(v + w * d)) - exp_so3(&(v - w * d))) / (2.0 * d);
        let left = exp_so3(&v).transpose() * fd;
        let want = hat(&w) * (n.sin() / n) - hat(&v.cross(&w)) * (2.0 * (0.5 * n).sin().powi(2) / (n * n));
        prop_assert!((left - want).amax() < 1e-6);
    }
}
