//! Levi-Civita covariant derivative along curves, parallel transport and the
//! curvature tensor.
//!
//! Along a curve `u(t)` and a section `v(t)` the covariant derivative is
//!
//! ```text
//! D_t v = v' + (1/2) v u' + (1/(2 vol)) <v, u'>_u
//! ```
//!
//! and the curvature tensor has the closed form
//! `R(a, b, c, d) = (1/(4 vol)) (<b,c><a,d> - <a,c><b,d>)`, so every
//! sectional curvature equals `1/(4 vol)`.

use crate::error::{Error, Result};
use crate::geodesic::GeodesicSegment;
use crate::space::{project_raw, ConformalFactor, TangentVector};

/// Default time step for curve finite differences.
pub const DEFAULT_FD_STEP: f64 = 1e-3;
/// Default step of the fixed-step integrators.
pub const DEFAULT_ODE_STEP: f64 = 1e-4;

const SECTION_TANGENCY_TOL: f64 = 1e-6;

/// Covariant derivative of a section with value `v` and time derivative
/// `v_dot` along a curve at `u` moving with velocity `u_dot`.
pub fn covariant_derivative(
    u: &ConformalFactor,
    u_dot: &[f64],
    v: &[f64],
    v_dot: &[f64],
) -> Vec<f64> {
    let corr = u.pair(v, u_dot) / (2.0 * u.domain().vol());
    v.iter()
        .zip(v_dot)
        .zip(u_dot)
        .map(|((vi, dvi), dui)| dvi + 0.5 * vi * dui + corr)
        .collect()
}

/// A curve sampled on a strictly increasing time grid.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    times: Vec<f64>,
    points: Vec<ConformalFactor>,
    velocities: Option<Vec<Vec<f64>>>,
}

impl SampledCurve {
    pub fn new(times: Vec<f64>, points: Vec<ConformalFactor>) -> Result<Self> {
        if times.len() < 3 {
            return Err(Error::domain(format!(
                "a sampled curve needs at least 3 samples, got {}",
                times.len()
            )));
        }
        if times.len() != points.len() {
            return Err(Error::Dimension {
                expected: times.len(),
                found: points.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("sample times must be strictly increasing"));
        }
        if points.iter().any(|p| !p.same_domain(&points[0])) {
            return Err(Error::domain("curve samples live on different domains"));
        }
        Ok(Self {
            times,
            points,
            velocities: None,
        })
    }

    /// Samples a geodesic and attaches its analytic velocity.
    pub fn from_geodesic(seg: &GeodesicSegment, times: Vec<f64>) -> Result<Self> {
        let mut points = Vec::with_capacity(times.len());
        let mut vels = Vec::with_capacity(times.len());
        for &t in &times {
            let (p, v) = seg.state(t)?;
            points.push(p);
            vels.push(v.into_values());
        }
        let mut curve = Self::new(times, points)?;
        curve.velocities = Some(vels);
        Ok(curve)
    }

    /// Evenly spaced samples `t_c + k dt` for `k = -half..=half`.
    pub fn centered_times(t_c: f64, dt: f64, half: usize) -> Vec<f64> {
        let h = half as isize;
        (-h..=h).map(|k| t_c + k as f64 * dt).collect()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[ConformalFactor] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn check_interior(&self, idx: usize) -> Result<()> {
        if idx == 0 || idx + 1 >= self.len() {
            return Err(Error::Index {
                index: idx,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Whether `idx` has two evenly spaced samples on each side.
    fn has_wide_stencil(&self, idx: usize) -> bool {
        if idx < 2 || idx + 2 >= self.len() {
            return false;
        }
        let t = &self.times[idx - 2..=idx + 2];
        let h = t[2] - t[1];
        t.windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(t[2].abs() * 1e-6))
    }

    /// Central difference at `idx`: fourth order on a uniform five-point
    /// neighborhood, second order otherwise.
    fn central<'a>(&self, f: impl Fn(usize) -> &'a [f64], idx: usize) -> Vec<f64> {
        if self.has_wide_stencil(idx) {
            let h = (self.times[idx + 2] - self.times[idx - 2]) / 4.0;
            let (m2, m1, p1, p2) = (f(idx - 2), f(idx - 1), f(idx + 1), f(idx + 2));
            return (0..m1.len())
                .map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h))
                .collect();
        }
        let dt = self.times[idx + 1] - self.times[idx - 1];
        f(idx + 1)
            .iter()
            .zip(f(idx - 1))
            .map(|(a, b)| (a - b) / dt)
            .collect()
    }

    /// Velocity at an interior sample: analytic when attached, otherwise a
    /// central difference.
    pub fn velocity(&self, idx: usize) -> Result<Vec<f64>> {
        if let Some(v) = &self.velocities {
            if idx >= self.len() {
                return Err(Error::Index {
                    index: idx,
                    len: self.len(),
                });
            }
            return Ok(v[idx].clone());
        }
        self.check_interior(idx)?;
        Ok(self.central(|i| self.points[i].values(), idx))
    }

    /// `D_t` of `section` at sample `idx`, with the section's time derivative
    /// taken by central differences (fourth order when five evenly spaced
    /// samples surround `idx`).
    pub fn cov_deriv(&self, section: &[Vec<f64>], idx: usize) -> Result<Vec<f64>> {
        self.check_interior(idx)?;
        if section.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: section.len(),
            });
        }
        let u = &self.points[idx];
        let (lo, hi) = if self.has_wide_stencil(idx) {
            (idx - 2, idx + 2)
        } else {
            (idx - 1, idx + 1)
        };
        for s in &section[lo..=hi] {
            u.domain().check_len(s)?;
        }
        let v = &section[idx];
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let violation = u.weighted_integral_unchecked(v).abs() / (u.domain().vol() * scale);
        if !(violation <= SECTION_TANGENCY_TOL) {
            return Err(Error::Constraint {
                what: "section is tangent to the curve",
                violation,
                tolerance: SECTION_TANGENCY_TOL,
            });
        }
        let v_dot = self.central(|i| &section[i], idx);
        let u_dot = self.velocity(idx)?;
        Ok(covariant_derivative(u, &u_dot, v, &v_dot))
    }
}

/// Right-hand side of the transport equation `V' = -V u'/2 - <V, u'>/(2 vol)`.
fn transport_rhs(u: &ConformalFactor, u_dot: &[f64], v: &[f64]) -> Vec<f64> {
    let corr = u.pair(v, u_dot) / (2.0 * u.domain().vol());
    v.iter()
        .zip(u_dot)
        .map(|(vi, di)| -0.5 * vi * di - corr)
        .collect()
}

fn axpy(x: &[f64], a: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(p, q)| p + a * q).collect()
}

/// Parallel transport of `v0` along `seg` from `0` to `t` with a classical
/// fourth-order Runge-Kutta scheme of step at most `step`. The state is
/// re-projected to the tangent space after each step.
pub fn parallel_transport(
    seg: &GeodesicSegment,
    v0: &TangentVector,
    t: f64,
    step: f64,
) -> Result<TangentVector> {
    v0.check_base(seg.start())?;
    seg.check_time(t)?;
    if !(step > 0.0) {
        return Err(Error::domain(format!("step must be positive, got {step}")));
    }
    let n = (t.abs() / step).ceil().max(1.0) as usize;
    let h = t / n as f64;
    let state_at = |tau: f64| (seg.evaluate_unchecked(tau), seg.velocity_field(tau));
    let mut v = v0.values().to_vec();
    let (mut p0, mut d0) = state_at(0.0);
    for k in 0..n {
        let tau = k as f64 * h;
        let (pm, dm) = state_at(tau + 0.5 * h);
        let (p1, d1) = state_at(tau + h);
        let k1 = transport_rhs(&p0, &d0, &v);
        let k2 = transport_rhs(&pm, &dm, &axpy(&v, 0.5 * h, &k1));
        let k3 = transport_rhs(&pm, &dm, &axpy(&v, 0.5 * h, &k2));
        let k4 = transport_rhs(&p1, &d1, &axpy(&v, h, &k3));
        for i in 0..v.len() {
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        v = project_raw(&p1, &v);
        p0 = p1;
        d0 = d1;
    }
    Ok(TangentVector::from_parts(&p0, v))
}

fn curvature_scale(u: &ConformalFactor) -> f64 {
    1.0 / (4.0 * u.domain().vol())
}

/// `R(a, b, c, d) = (1/(4 vol)) (<b,c><a,d> - <a,c><b,d>)`.
pub fn curvature_tensor(
    u: &ConformalFactor,
    a: &TangentVector,
    b: &TangentVector,
    c: &TangentVector,
    d: &TangentVector,
) -> Result<f64> {
    let bc = u.inner(b, c)?;
    let ad = u.inner(a, d)?;
    let ac = u.inner(a, c)?;
    let bd = u.inner(b, d)?;
    Ok(curvature_scale(u) * (bc * ad - ac * bd))
}

/// The curvature operator `R(a, b) c = (1/(4 vol)) (<b,c> a - <a,c> b)`.
pub fn curvature_operator(
    u: &ConformalFactor,
    a: &TangentVector,
    b: &TangentVector,
    c: &TangentVector,
) -> Result<TangentVector> {
    let k = curvature_scale(u);
    let bc = u.inner(b, c)?;
    let ac = u.inner(a, c)?;
    let values = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| k * (bc * x - ac * y))
        .collect();
    Ok(TangentVector::from_parts(u, values))
}

/// Sectional curvature of the plane spanned by `a` and `b`.
pub fn sectional_curvature(
    u: &ConformalFactor,
    a: &TangentVector,
    b: &TangentVector,
) -> Result<f64> {
    let aa = u.inner(a, a)?;
    let bb = u.inner(b, b)?;
    let ab = u.inner(a, b)?;
    let gram = aa * bb - ab * ab;
    if !(gram > 1e-12 * aa * bb) || gram == 0.0 {
        return Err(Error::domain(format!(
            "degenerate plane: Gram determinant {gram:e}"
        )));
    }
    Ok(-curvature_tensor(u, a, b, a, b)? / gram)
}

/// Sectional curvature of the plane spanned by `a` and `b`, computed from the
/// connection alone: `R(a, b) b = D_q D_r b - D_r D_q b` for the family
/// `project(u + q a + r b)` and the section `project_tangent(., b)`, by
/// nested central differences of step `delta`.
pub fn sectional_curvature_fd(
    u: &ConformalFactor,
    a: &TangentVector,
    b: &TangentVector,
    delta: f64,
) -> Result<f64> {
    a.check_base(u)?;
    b.check_base(u)?;
    if !(delta > 0.0) {
        return Err(Error::domain(format!(
            "difference step must be positive, got {delta}"
        )));
    }
    let dom = u.domain_arc().clone();
    let point = |q: f64, r: f64| -> Result<ConformalFactor> {
        let raw: Vec<f64> = (0..u.len())
            .map(|i| u.values()[i] + q * a.values()[i] + r * b.values()[i])
            .collect();
        ConformalFactor::project(dom.clone(), &raw)
    };
    let section = |q: f64, r: f64| -> Result<Vec<f64>> {
        Ok(crate::space::project_raw(&point(q, r)?, b.values()))
    };
    let central = |f: &dyn Fn(f64) -> Result<Vec<f64>>| -> Result<Vec<f64>> {
        let p = f(delta)?;
        let m = f(-delta)?;
        Ok(p.iter()
            .zip(&m)
            .map(|(x, y)| (x - y) / (2.0 * delta))
            .collect())
    };
    let first = |q: f64, r: f64, along_q: bool| -> Result<Vec<f64>> {
        let (du, dc) = if along_q {
            (
                central(&|h| Ok(point(q + h, r)?.values().to_vec()))?,
                central(&|h| section(q + h, r))?,
            )
        } else {
            (
                central(&|h| Ok(point(q, r + h)?.values().to_vec()))?,
                central(&|h| section(q, r + h))?,
            )
        };
        Ok(covariant_derivative(
            &point(q, r)?,
            &du,
            &section(q, r)?,
            &dc,
        ))
    };
    let second = |outer_q: bool| -> Result<Vec<f64>> {
        let inner_q = !outer_q;
        let (du, dx) = if outer_q {
            (
                central(&|h| Ok(point(h, 0.0)?.values().to_vec()))?,
                central(&|h| first(h, 0.0, inner_q))?,
            )
        } else {
            (
                central(&|h| Ok(point(0.0, h)?.values().to_vec()))?,
                central(&|h| first(0.0, h, inner_q))?,
            )
        };
        Ok(covariant_derivative(
            u,
            &du,
            &first(0.0, 0.0, inner_q)?,
            &dx,
        ))
    };
    let qr = second(true)?;
    let rq = second(false)?;
    let rab: Vec<f64> = qr.iter().zip(&rq).map(|(x, y)| x - y).collect();
    let aa = u.inner(a, a)?;
    let bb = u.inner(b, b)?;
    let ab = u.inner(a, b)?;
    let gram = aa * bb - ab * ab;
    if !(gram > 1e-12 * aa * bb) {
        return Err(Error::domain(format!(
            "degenerate plane: Gram determinant {gram:e}"
        )));
    }
    Ok(u.pair(&rab, a.values()) / gram)
}
