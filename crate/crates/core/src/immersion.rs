//! The isometric immersion `A(u) = 2 e^{u/2}` into the sphere of radius
//! `rho = 2 sqrt(vol)` in `L^2(mu)`.
//!
//! `dA_u(v) = e^{u/2} v`, so the Euclidean pairing of immersed tangent vectors
//! is exactly the Calabi inner product. Geodesics map to great circles, which
//! makes this module the exact reference for transport and distances.

use crate::error::{Error, Result};
use crate::geodesic::{distance, GeodesicSegment};
use crate::space::{ConformalFactor, TangentVector};

/// A strictly positive field `f` with `integrate(f^2) = rho^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    values: Vec<f64>,
    radius: f64,
}

impl SpherePoint {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Inverse of [`immerse`]: `u = 2 log(f / 2)`.
    pub fn pull_back(&self, like: &ConformalFactor) -> Result<ConformalFactor> {
        like.domain().check_len(&self.values)?;
        if self.values.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::domain("sphere point must be strictly positive"));
        }
        let u = self.values.iter().map(|f| 2.0 * (f / 2.0).ln()).collect();
        ConformalFactor::new(like.domain_arc().clone(), u)
    }
}

pub fn immerse(u: &ConformalFactor) -> SpherePoint {
    SpherePoint {
        values: u.values().iter().map(|x| 2.0 * (x / 2.0).exp()).collect(),
        radius: u.domain().radius(),
    }
}

/// Differential `dA_u(v) = e^{u/2} v`.
pub fn differential(v: &TangentVector) -> Vec<f64> {
    v.base()
        .values()
        .iter()
        .zip(v.values())
        .map(|(u, x)| (u / 2.0).exp() * x)
        .collect()
}

/// Euclidean pairing of `dA(v)` and `dA(w)`.
pub fn pullback_inner(v: &TangentVector, w: &TangentVector) -> Result<f64> {
    let u = v.base();
    w.check_base(u)?;
    let dv = differential(v);
    let dw = differential(w);
    Ok(u.domain().integrate_product(&dv, &dw))
}

/// Chord length between the immersed points and the geodesic distance.
/// They satisfy `chord = 2 rho sin(arc / (2 rho))`.
pub fn chordal_vs_geodesic(u0: &ConformalFactor, u1: &ConformalFactor) -> Result<(f64, f64)> {
    let arc = distance(u0, u1)?.d;
    let f0 = immerse(u0);
    let f1 = immerse(u1);
    let diff: Vec<f64> = f0
        .values
        .iter()
        .zip(&f1.values)
        .map(|(a, b)| a - b)
        .collect();
    let chord = u0.domain().integrate_product(&diff, &diff).sqrt();
    Ok((chord, arc))
}

/// Orthonormal basis `(e1, e2)` of the plane of the great circle traced by
/// `seg`, in the weighted `L^2` product.
fn great_circle_frame(seg: &GeodesicSegment) -> (Vec<f64>, Vec<f64>) {
    let dom = seg.domain();
    let rho = seg.radius();
    let e1: Vec<f64> = immerse(seg.start())
        .values
        .iter()
        .map(|f| f / rho)
        .collect();
    let mut e2 = differential(seg.velocity());
    let c = dom.integrate_product(&e1, &e2);
    for (x, y) in e2.iter_mut().zip(&e1) {
        *x -= c * y;
    }
    let n = dom.integrate_product(&e2, &e2).sqrt();
    for x in e2.iter_mut() {
        *x /= n;
    }
    (e1, e2)
}

/// `L^2` norm of the component of `A(u(t))` orthogonal to the plane spanned by
/// `A(u0)` and `dA(v0)`.
pub fn off_plane_residual(seg: &GeodesicSegment, t: f64) -> Result<f64> {
    let f = immerse(&seg.evaluate(t)?).values;
    if seg.is_constant() {
        return Ok(0.0);
    }
    let dom = seg.domain();
    let (e1, e2) = great_circle_frame(seg);
    let a = dom.integrate_product(&f, &e1);
    let b = dom.integrate_product(&f, &e2);
    let r: Vec<f64> = f
        .iter()
        .zip(e1.iter().zip(&e2))
        .map(|(x, (p, q))| x - a * p - b * q)
        .collect();
    Ok(dom.integrate_product(&r, &r).sqrt())
}

/// Exact parallel transport of `v0` along `seg` to time `t`: the immersed
/// vector is rotated within the great-circle plane and pulled back.
pub fn sphere_transport_oracle(
    seg: &GeodesicSegment,
    v0: &TangentVector,
    t: f64,
) -> Result<TangentVector> {
    v0.check_base(seg.start())?;
    let point = seg.evaluate(t)?;
    if seg.is_constant() {
        return Ok(TangentVector::from_parts(&point, v0.values().to_vec()));
    }
    let dom = seg.domain();
    let (e1, e2) = great_circle_frame(seg);
    let x = differential(v0);
    let along = dom.integrate_product(&x, &e2);
    let (sn, cs) = (seg.angular_rate() * t).sin_cos();
    let values = x
        .iter()
        .zip(e1.iter().zip(&e2))
        .zip(point.values())
        .map(|((xi, (p, q)), u)| {
            let rotated = xi - along * q + along * (cs * q - sn * p);
            rotated / (u / 2.0).exp()
        })
        .collect();
    Ok(TangentVector::from_parts(&point, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::geodesic_cauchy;
    use crate::quadrature::QuadratureDomain;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn immerse_reference_point() {
        let d = Arc::new(QuadratureDomain::normalized(2).unwrap());
        let u = ConformalFactor::zero(d.clone());
        let f = immerse(&u);
        assert_eq!(f.values(), &[2.0, 2.0]);
        assert_eq!(d.integrate_product(f.values(), f.values()), 1.0);
        assert_eq!(f.radius(), 1.0);
    }

    #[test]
    fn immerse_then_pull_back_is_identity() {
        let d = Arc::new(QuadratureDomain::new(vec![0.3, 0.1, 0.6]).unwrap());
        let u = ConformalFactor::project(d, &[1.0, -2.0, 0.5]).unwrap();
        let back = immerse(&u).pull_back(&u).unwrap();
        for (a, b) in back.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn pullback_matches_calabi_inner() {
        let d = Arc::new(QuadratureDomain::normalized(5).unwrap());
        let u = ConformalFactor::project(d, &[0.1, -0.3, 0.7, 0.0, -1.0]).unwrap();
        let v = TangentVector::project(&u, &[1.0, 2.0, -1.0, 0.0, 0.3]).unwrap();
        let w = TangentVector::project(&u, &[0.0, -1.0, 1.0, 2.0, 0.0]).unwrap();
        let a = pullback_inner(&v, &w).unwrap();
        let b = u.inner(&v, &w).unwrap();
        assert!((a - b).abs() <= 1e-13 * b.abs().max(1e-300));
    }

    #[test]
    fn chord_and_arc() {
        let d = Arc::new(QuadratureDomain::normalized(2).unwrap());
        let u0 = ConformalFactor::zero(d.clone());
        assert_eq!(chordal_vs_geodesic(&u0, &u0).unwrap(), (0.0, 0.0));
        let u1 = ConformalFactor::new(d, vec![1.5f64.ln(), 0.5f64.ln()]).unwrap();
        let (chord, arc) = chordal_vs_geodesic(&u0, &u1).unwrap();
        assert!((arc - PI / 12.0).abs() < 1e-15);
        assert!((chord - 2.0 * (PI / 24.0).sin()).abs() < 1e-14);
        assert!((chord - 0.261052).abs() < 1e-6);
        assert!(chord <= arc);
    }

    #[test]
    fn transport_oracle_trivial_cases() {
        let d = Arc::new(QuadratureDomain::normalized(4).unwrap());
        let u0 = ConformalFactor::project(d, &[0.1, -0.3, 0.7, 0.0]).unwrap();
        let v0 = TangentVector::project(&u0, &[1.0, 0.5, -1.0, 0.0]).unwrap();
        let w = TangentVector::project(&u0, &[0.0, 1.0, 0.0, -1.0]).unwrap();
        let seg = geodesic_cauchy(&u0, &v0).unwrap();
        let same = sphere_transport_oracle(&seg, &w, 0.0).unwrap();
        for (a, b) in same.values().iter().zip(w.values()) {
            assert!((a - b).abs() < 1e-15);
        }
        let t = 0.7 * seg.t_max();
        let vt = sphere_transport_oracle(&seg, &v0, t).unwrap();
        let exact = seg.velocity_at(t).unwrap();
        for (a, b) in vt.values().iter().zip(exact.values()) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
        assert!(off_plane_residual(&seg, t).unwrap() < 1e-12);
        assert!(sphere_transport_oracle(&seg, &w, seg.t_max() + 1.0).is_err());
    }
}
