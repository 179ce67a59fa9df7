//! Closed-form geodesics.
//!
//! Under the immersion `u -> 2 e^{u/2}` the space sits inside the round sphere
//! of radius `rho = 2 sqrt(vol)`, and geodesics are great-circle arcs pulled
//! back. For initial data `(u0, v0)` with speed `s = |v0|_{u0}` this gives
//!
//! ```text
//! e^{u(t)/2} = e^{u0/2} (cos(s t / rho) + (rho v0 / (2 s)) sin(s t / rho))
//! ```
//!
//! which is defined while the bracket stays positive at every node. With
//! `vol = 1/4` we have `rho = 1` and every formula here is evaluated in an
//! order that reproduces the unit-radius expressions bit for bit.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureDomain;
use crate::space::{project_raw, ConformalFactor, TangentVector};

/// Cosines this close to 1 are treated as coincident points.
pub const COINCIDENCE_TOL: f64 = 1e-14;

/// Inverse cotangent with values in `(0, pi)`.
#[inline]
pub fn arccot(x: f64) -> f64 {
    f64::atan2(1.0, x)
}

/// A geodesic with its maximal open existence interval `(t_min, t_max)`.
#[derive(Debug, Clone)]
pub struct GeodesicSegment {
    start: ConformalFactor,
    velocity: TangentVector,
    speed: f64,
    t_min: f64,
    t_max: f64,
}

impl GeodesicSegment {
    pub fn start(&self) -> &ConformalFactor {
        &self.start
    }

    pub fn velocity(&self) -> &TangentVector {
        &self.velocity
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn domain(&self) -> &QuadratureDomain {
        self.start.domain()
    }

    pub fn radius(&self) -> f64 {
        self.start.domain().radius()
    }

    /// Angular rate `s / rho` of the great circle.
    pub fn angular_rate(&self) -> f64 {
        self.speed / self.radius()
    }

    pub fn is_constant(&self) -> bool {
        self.speed == 0.0
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t_min < t && t < self.t_max
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if !(t > self.t_min) {
            return Err(Error::domain(format!(
                "t = {t} is not above the lower existence bound t_min = {}",
                self.t_min
            )));
        }
        if !(t < self.t_max) {
            return Err(Error::domain(format!(
                "t = {t} is not below the upper existence bound t_max = {}",
                self.t_max
            )));
        }
        Ok(())
    }

    /// The positive factor `e^{(u(t) - u0)/2}` at every node.
    pub fn factor(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        Ok(self.factor_unchecked(t))
    }

    pub(crate) fn factor_unchecked(&self, t: f64) -> Vec<f64> {
        if self.is_constant() {
            return vec![1.0; self.start.len()];
        }
        let rho = self.radius();
        let s = self.speed;
        let phase = (s / rho) * t;
        let (sn, cs) = phase.sin_cos();
        self.velocity
            .values()
            .iter()
            .map(|v| cs + (rho * v / (2.0 * s)) * sn)
            .collect()
    }

    /// Point `u(t)` on the geodesic.
    pub fn evaluate(&self, t: f64) -> Result<ConformalFactor> {
        self.check_time(t)?;
        Ok(self.evaluate_unchecked(t))
    }

    pub(crate) fn evaluate_unchecked(&self, t: f64) -> ConformalFactor {
        let values = self
            .start
            .values()
            .iter()
            .zip(self.factor_unchecked(t))
            .map(|(u0, f)| u0 + 2.0 * f.ln())
            .collect();
        ConformalFactor::from_parts(self.start.domain_arc().clone(), values)
    }

    /// Raw velocity field `u'(t) = 2 f'(t) / f(t)`.
    pub(crate) fn velocity_field(&self, t: f64) -> Vec<f64> {
        if self.is_constant() {
            return vec![0.0; self.start.len()];
        }
        let rho = self.radius();
        let s = self.speed;
        let w = s / rho;
        let (sn, cs) = (w * t).sin_cos();
        self.velocity
            .values()
            .iter()
            .map(|v| {
                let k = rho * v / (2.0 * s);
                let f = cs + k * sn;
                let df = w * (k * cs - sn);
                2.0 * df / f
            })
            .collect()
    }

    /// Velocity `u'(t)` as a tangent vector at `u(t)`.
    pub fn velocity_at(&self, t: f64) -> Result<TangentVector> {
        self.check_time(t)?;
        let point = self.evaluate_unchecked(t);
        let v = self.velocity_field(t);
        Ok(TangentVector::from_parts(&point, v))
    }

    /// Point and velocity in one call.
    pub fn state(&self, t: f64) -> Result<(ConformalFactor, TangentVector)> {
        self.check_time(t)?;
        let point = self.evaluate_unchecked(t);
        let v = TangentVector::from_parts(&point, self.velocity_field(t));
        Ok((point, v))
    }

    /// The same geodesic traversed at `a` times the speed (`a > 0`), or
    /// backwards for `a < 0`.
    pub fn rescaled(&self, a: f64) -> Result<Self> {
        geodesic_cauchy(&self.start, &self.velocity.scaled(a))
    }
}

/// Geodesic with initial point `u0` and initial velocity `v0`.
pub fn geodesic_cauchy(u0: &ConformalFactor, v0: &TangentVector) -> Result<GeodesicSegment> {
    v0.check_base(u0)?;
    let speed = v0.norm();
    let (t_min, t_max) = if speed == 0.0 {
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let rho = u0.domain().radius();
        let hi = (rho / speed) * arccot((-v0.min() * rho) / (2.0 * speed));
        let lo = -(rho / speed) * arccot((v0.max() * rho) / (2.0 * speed));
        (lo, hi)
    };
    Ok(GeodesicSegment {
        start: u0.clone(),
        velocity: v0.clone(),
        speed,
        t_min,
        t_max,
    })
}

/// Largest admissible norm for an initial velocity pointing along `v`:
/// `rho * arccot(-rho min v / (2 |v|))`.
pub fn exp_domain_bound(v: &TangentVector) -> f64 {
    let s = v.norm();
    if s == 0.0 {
        return f64::INFINITY;
    }
    let rho = v.base().domain().radius();
    rho * arccot((-v.min() * rho) / (2.0 * s))
}

/// Time-one point of the geodesic with initial data `(u0, v0)`.
pub fn exp_map(u0: &ConformalFactor, v0: &TangentVector) -> Result<ConformalFactor> {
    let seg = geodesic_cauchy(u0, v0)?;
    if seg.is_constant() {
        return Ok(u0.clone());
    }
    if !(seg.t_max > 1.0) {
        return Err(Error::OutOfExpDomain {
            norm: seg.speed,
            bound: exp_domain_bound(v0),
        });
    }
    Ok(seg.evaluate_unchecked(1.0))
}

/// `(1/vol) integrate(e^{(u0 + u1)/2})`, the cosine of the angle between the
/// immersed points.
pub fn cosine(u0: &ConformalFactor, u1: &ConformalFactor) -> Result<f64> {
    u0.check_same_domain(u1)?;
    let d = u0.domain();
    let integral: f64 = u0
        .values()
        .iter()
        .zip(u1.values())
        .zip(d.weights())
        .map(|((a, b), w)| ((a + b) / 2.0).exp() * w)
        .sum();
    Ok(integral / d.vol())
}

/// Inverse of [`exp_map`]: the unique admissible `v` with `exp_map(u0, v) = w`.
pub fn log_map(u0: &ConformalFactor, w: &ConformalFactor) -> Result<TangentVector> {
    let c = cosine(u0, w)?;
    if c >= 1.0 - COINCIDENCE_TOL {
        return Ok(TangentVector::zero(u0));
    }
    let theta = c.clamp(-1.0, 1.0).acos();
    let scale = 2.0 * theta / theta.sin();
    let values = u0
        .values()
        .iter()
        .zip(w.values())
        .map(|(a, b)| (((b - a) / 2.0).exp() - c) * scale)
        .collect();
    Ok(TangentVector::from_parts(u0, values))
}

/// Geodesic distance together with the Dirichlet parameter and the cosine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub d: f64,
    pub t0: f64,
    pub cosine: f64,
}

pub fn distance(u0: &ConformalFactor, u1: &ConformalFactor) -> Result<DistanceReport> {
    let c = cosine(u0, u1)?;
    let t0 = if c >= 1.0 - COINCIDENCE_TOL {
        0.0
    } else {
        c.clamp(-1.0, 1.0).acos()
    };
    Ok(DistanceReport {
        d: u0.domain().radius() * t0,
        t0,
        cosine: c,
    })
}

/// Geodesic from `u0` reaching `u1` at parameter `t0`, where `t0` is the
/// angle between the immersed points. The returned segment has speed `rho`,
/// so `speed * t0` is the distance.
pub fn geodesic_dirichlet(
    u0: &ConformalFactor,
    u1: &ConformalFactor,
) -> Result<(GeodesicSegment, f64)> {
    let c = cosine(u0, u1)?;
    if c >= 1.0 - COINCIDENCE_TOL {
        return Err(Error::DegenerateEndpoints);
    }
    let t0 = c.clamp(-1.0, 1.0).acos();
    let (sn, cs) = t0.sin_cos();
    let v0: Vec<f64> = u0
        .values()
        .iter()
        .zip(u1.values())
        .map(|(a, b)| (2.0 / sn) * (((b - a) / 2.0).exp() - cs))
        .collect();
    let v0 = TangentVector::from_parts(u0, v0);
    Ok((geodesic_cauchy(u0, &v0)?, t0))
}

const MIN_SEQUENCE_NODES: usize = 16;

fn check_sequence_domain(domain: &QuadratureDomain) -> Result<()> {
    if domain.len() < MIN_SEQUENCE_NODES {
        return Err(Error::domain(format!(
            "bump constructions need at least {MIN_SEQUENCE_NODES} nodes, got {}",
            domain.len()
        )));
    }
    Ok(())
}

/// Discrete bump `f_k` in `[0, 1]`: one on the first `n 4^-k` nodes, zero
/// beyond the first `n 3^-k` nodes, and one ring-averaging pass of the inner
/// indicator in between.
pub fn bump(node_count: usize, k: u32) -> Vec<f64> {
    let n = node_count;
    let inner = ((n as f64) * 0.25f64.powi(k as i32)).floor().max(1.0) as usize;
    let inner = inner.min(n);
    let outer = ((n as f64) / 3f64.powi(k as i32)).floor() as usize;
    let outer = outer.clamp(inner, n);
    let indicator = |i: usize| if i < inner { 1.0 } else { 0.0 };
    (0..n)
        .map(|i| {
            if i < inner {
                1.0
            } else if i < outer {
                let prev = indicator((i + n - 1) % n);
                let next = indicator((i + 1) % n);
                (prev + indicator(i) + next) / 3.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Member `u_k` of the concentrating family with
/// `e^{u_k} = (f_k vol / alpha_k + eps_k) / (1 + eps_k)`, `eps_k = 4^-k`.
pub fn diameter_point(domain: Arc<QuadratureDomain>, k: u32) -> Result<ConformalFactor> {
    check_sequence_domain(&domain)?;
    let f = bump(domain.len(), k);
    let alpha = domain.integrate(&f)?;
    let eps = 0.25f64.powi(k as i32);
    let vol = domain.vol();
    let raw: Vec<f64> = f
        .iter()
        .map(|fi| ((fi * vol / alpha + eps) / (1.0 + eps)).ln())
        .collect();
    ConformalFactor::project(domain, &raw)
}

/// Distances `d(u, u_k)` for `k = 1..=k_max`; they increase toward the
/// diameter `(pi/2) rho`.
pub fn diameter_sequence(u: &ConformalFactor, k_max: u32) -> Result<Vec<(u32, f64)>> {
    check_sequence_domain(u.domain())?;
    (1..=k_max)
        .map(|k| {
            let uk = diameter_point(u.domain_arc().clone(), k)?;
            Ok((k, distance(u, &uk)?.d))
        })
        .collect()
}

/// Unit tangent vector at `u0` built from `-f_k`; its minimum tends to
/// `-infinity` as `k` grows.
pub fn boundary_direction(u0: &ConformalFactor, k: u32) -> Result<TangentVector> {
    check_sequence_domain(u0.domain())?;
    let raw: Vec<f64> = bump(u0.len(), k).into_iter().map(|f| -f).collect();
    let v = project_raw(u0, &raw);
    let v = TangentVector::from_parts(u0, v);
    let norm = v.norm();
    if !(norm > 0.0) {
        return Err(Error::domain("bump direction projects to zero"));
    }
    Ok(v.scaled(1.0 / norm))
}

/// Distances from `u0` to the boundary point reached by the unit geodesic
/// along [`boundary_direction`], for `k = 1..=k_max`.
pub fn boundary_sequence(u0: &ConformalFactor, k_max: u32) -> Result<Vec<(u32, f64)>> {
    check_sequence_domain(u0.domain())?;
    (1..=k_max)
        .map(|k| {
            let v = boundary_direction(u0, k)?;
            let seg = geodesic_cauchy(u0, &v)?;
            Ok((k, seg.speed() * seg.t_max()))
        })
        .collect()
}

/// Upper bound `(pi/2) rho` on all distances.
pub fn diameter(domain: &QuadratureDomain) -> f64 {
    FRAC_PI_2 * domain.radius()
}
