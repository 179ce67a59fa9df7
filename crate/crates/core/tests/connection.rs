mod common;

use calabi::immersion::sphere_transport_oracle;
use calabi::{
    covariant_derivative, curvature_operator, curvature_tensor, geodesic_cauchy,
    parallel_transport, sectional_curvature, ConformalFactor, QuadratureDomain, SampledCurve,
    TangentVector,
};
use common::*;
use proptest::prelude::*;
use std::sync::Arc;

#[test]
fn closed_curvature_matches_connection_oracle() {
    let mut r = rng(11);
    for &n in &[3usize, 5, 16] {
        let d = random_domain(&mut r, n);
        let u = random_point(&mut r, &d, 0.5);
        let a = random_tangent(&mut r, &u, 1.0);
        let b = random_tangent(&mut r, &u, 1.0);
        let c = random_tangent(&mut r, &u, 1.0);
        let closed = curvature_operator(&u, &a, &b, &c).unwrap();
        let fd = fd_curvature_operator(&u, &a, &b, &c, 1e-2);
        let scale = sup(closed.values()).max(1e-3);
        assert!(
            sup_diff(closed.values(), &fd) <= 1e-3 * scale.max(1.0),
            "n = {n}"
        );
    }
}

#[test]
fn curvature_tensor_symmetries() {
    let mut r = rng(12);
    let d = random_domain(&mut r, 7);
    let u = random_point(&mut r, &d, 0.7);
    let v: Vec<TangentVector> = (0..4).map(|_| random_tangent(&mut r, &u, 1.0)).collect();
    let rt = |i: usize, j: usize, k: usize, l: usize| {
        curvature_tensor(&u, &v[i], &v[j], &v[k], &v[l]).unwrap()
    };
    let tol = 1e-13;
    assert!((rt(0, 1, 2, 3) + rt(1, 0, 2, 3)).abs() < tol);
    assert!((rt(0, 1, 2, 3) + rt(0, 1, 3, 2)).abs() < tol);
    assert!((rt(0, 1, 2, 3) - rt(2, 3, 0, 1)).abs() < tol);
    let bianchi = rt(0, 1, 2, 3) + rt(1, 2, 0, 3) + rt(2, 0, 1, 3);
    assert!(bianchi.abs() < tol);
    let k = sectional_curvature(&u, &v[0], &v[1]).unwrap();
    assert!((k - 1.0 / (4.0 * d.vol())).abs() < 1e-12 * k);
}

#[test]
fn connection_is_torsion_free() {
    // D_q d_r u = D_r d_q u for the family project(u + q a + r b), since the
    // mixed partials of u commute.
    let mut r = rng(13);
    let d = random_domain(&mut r, 6);
    let u = random_point(&mut r, &d, 0.4);
    let a = random_tangent(&mut r, &u, 1.0);
    let b = random_tangent(&mut r, &u, 1.0);
    let h = 1e-4;
    let point = |q: f64, s: f64| {
        let raw: Vec<f64> = (0..d.len())
            .map(|i| {
                u.values()[i]
                    + q * a.values()[i]
                    + s * b.values()[i]
                    + q * s * a.values()[i] * b.values()[i]
            })
            .collect();
        ConformalFactor::project(d.clone(), &raw).unwrap()
    };
    let diff = |f: &dyn Fn(f64) -> Vec<f64>| -> Vec<f64> {
        f(h).iter()
            .zip(f(-h))
            .map(|(x, y)| (x - y) / (2.0 * h))
            .collect()
    };
    let d_q = |q: f64, s: f64| diff(&|e| point(q + e, s).values().to_vec());
    let d_r = |q: f64, s: f64| diff(&|e| point(q, s + e).values().to_vec());
    let dq_dr = covariant_derivative(&u, &d_q(0.0, 0.0), &d_r(0.0, 0.0), &diff(&|e| d_r(e, 0.0)));
    let dr_dq = covariant_derivative(&u, &d_r(0.0, 0.0), &d_q(0.0, 0.0), &diff(&|e| d_q(0.0, e)));
    assert!(sup_diff(&dq_dr, &dr_dq) < 1e-5);
}

#[test]
fn connection_is_metric_compatible() {
    let mut r = rng(14);
    let d = random_domain(&mut r, 8);
    let u0 = random_point(&mut r, &d, 0.5);
    let v0 = random_tangent(&mut r, &u0, 0.8);
    let seg = geodesic_cauchy(&u0, &v0).unwrap();
    let dt = 1e-4;
    let times = SampledCurve::centered_times(0.2 * seg.t_max(), dt, 1);
    let curve = SampledCurve::from_geodesic(&seg, times.clone()).unwrap();
    let field = |t: f64, k: f64| -> Vec<f64> {
        let p = seg.evaluate(t).unwrap();
        let raw: Vec<f64> = (0..d.len())
            .map(|i| ((i as f64 + k) * (1.0 + t)).sin())
            .collect();
        TangentVector::project(&p, &raw).unwrap().into_values()
    };
    let x: Vec<Vec<f64>> = times.iter().map(|&t| field(t, 0.3)).collect();
    let y: Vec<Vec<f64>> = times.iter().map(|&t| field(t, 1.7)).collect();
    let pts = curve.points();
    let pair = |i: usize| {
        let p = &pts[i];
        let xv = TangentVector::new(p, x[i].clone()).unwrap();
        let yv = TangentVector::new(p, y[i].clone()).unwrap();
        p.inner(&xv, &yv).unwrap()
    };
    let lhs = (pair(2) - pair(0)) / (2.0 * dt);
    let p = &pts[1];
    let dx = TangentVector::with_tolerance(p, curve.cov_deriv(&x, 1).unwrap(), 1e-6).unwrap();
    let dy = TangentVector::with_tolerance(p, curve.cov_deriv(&y, 1).unwrap(), 1e-6).unwrap();
    let xv = TangentVector::new(p, x[1].clone()).unwrap();
    let yv = TangentVector::new(p, y[1].clone()).unwrap();
    let rhs = p.inner(&dx, &yv).unwrap() + p.inner(&xv, &dy).unwrap();
    assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
}

#[test]
fn curvature_is_parallel_along_geodesics() {
    // Locally symmetric: transporting a, b, c, d along a geodesic keeps
    // R(a, b, c, d) fixed.
    let mut r = rng(15);
    let d = random_domain(&mut r, 6);
    let u0 = random_point(&mut r, &d, 0.5);
    let v0 = random_tangent(&mut r, &u0, 1.0);
    let seg = geodesic_cauchy(&u0, &v0).unwrap();
    let frame: Vec<TangentVector> = (0..4).map(|_| random_tangent(&mut r, &u0, 1.0)).collect();
    let r0 = curvature_tensor(&u0, &frame[0], &frame[1], &frame[2], &frame[3]).unwrap();
    let t = 0.6 * seg.t_max();
    let moved: Vec<TangentVector> = frame
        .iter()
        .map(|f| parallel_transport(&seg, f, t, 1e-3).unwrap())
        .collect();
    let ut = seg.evaluate(t).unwrap();
    let rt = curvature_tensor(&ut, &moved[0], &moved[1], &moved[2], &moved[3]).unwrap();
    assert!((r0 - rt).abs() < 1e-9, "{r0} vs {rt}");
}

#[test]
fn transport_matches_sphere_rotation() {
    let mut r = rng(16);
    for _ in 0..10 {
        let d = random_domain(&mut r, 12);
        let u0 = random_point(&mut r, &d, 0.6);
        let speed = r_speed(&mut r);
        let v0 = random_tangent(&mut r, &u0, speed);
        let w = random_tangent(&mut r, &u0, 1.0);
        let seg = geodesic_cauchy(&u0, &v0).unwrap();
        let t = 0.7 * seg.t_max();
        let ode = parallel_transport(&seg, &w, t, 1e-3).unwrap();
        let exact = sphere_transport_oracle(&seg, &w, t).unwrap();
        assert!(sup_diff(ode.values(), exact.values()) < 1e-7);
        assert!((ode.norm() - w.norm()).abs() < 1e-10);
    }
}

fn r_speed(r: &mut rand_chacha::ChaCha8Rng) -> f64 {
    use rand::Rng;
    r.gen_range(0.2..2.0)
}

#[test]
fn sectional_curvature_on_normalized_domains_is_one() {
    for n in [3usize, 16, 256] {
        let d = Arc::new(QuadratureDomain::normalized(n).unwrap());
        let mut r = rng(n as u64);
        let u = random_point(&mut r, &d, 1.0);
        let a = random_tangent(&mut r, &u, 1.0);
        let b = random_tangent(&mut r, &u, 0.3);
        assert_eq!(sectional_curvature(&u, &a, &b).unwrap(), 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sectional_curvature_is_inverse_four_vol(seed in any::<u64>(), n in 3usize..20) {
        let mut r = rng(seed);
        let d = random_domain(&mut r, n);
        let u = random_point(&mut r, &d, 1.0);
        let a = random_tangent(&mut r, &u, 1.0);
        let b = random_tangent(&mut r, &u, 1.0);
        if let Ok(k) = sectional_curvature(&u, &a, &b) {
            prop_assert!((k - 1.0 / (4.0 * d.vol())).abs() <= 1e-10 * k);
        }
    }

    #[test]
    fn curvature_operator_is_tangent(seed in any::<u64>(), n in 3usize..20) {
        let mut r = rng(seed);
        let d = random_domain(&mut r, n);
        let u = random_point(&mut r, &d, 1.0);
        let a = random_tangent(&mut r, &u, 1.0);
        let b = random_tangent(&mut r, &u, 1.0);
        let c = random_tangent(&mut r, &u, 1.0);
        let rc = curvature_operator(&u, &a, &b, &c).unwrap();
        prop_assert!(u.weighted_integral(rc.values()).unwrap().abs() < 1e-12 * d.vol().max(1.0) * 10.0);
    }
}
