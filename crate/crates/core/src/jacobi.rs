//! Jacobi fields along geodesics.
//!
//! A Jacobi field satisfies `D_t^2 J = R(u', J) u'`. Along a geodesic with
//! initial velocity `v0` the pairings `<u', D_t J>` and `d/dt <u', J>` are
//! constant, and expanding the covariant derivatives turns the equation into
//! the decoupled nodewise ODE
//!
//! ```text
//! J'' + u' J' + (1/vol) <v0, D_t J(0)> = 0
//! ```
//!
//! Fields decompose into a part along the geodesic, `(a + b t) u'(t)`, and a
//! normal part with `e^{u/2} J = A cos(w t) + B sin(w t)`, `w = |v0| / rho`.
//! The first zero of a normal field vanishing at `t = 0` is at `pi / w`, past
//! the end of every geodesic, so there are no conjugate points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::connection::covariant_derivative;
use crate::error::{Error, Result};
use crate::geodesic::GeodesicSegment;
use crate::space::{ConformalFactor, TangentVector};

/// Closed-form Jacobi field.
#[derive(Debug, Clone)]
pub struct JacobiClosedForm {
    geodesic: GeodesicSegment,
    along0: f64,
    along1: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    /// Only used on constant geodesics, where `J(t) = J0 + t W0`.
    constant: Option<(Vec<f64>, Vec<f64>)>,
}

impl JacobiClosedForm {
    /// Field with `J(0) = j0` and `D_t J(0) = dtj0`.
    pub fn new(seg: &GeodesicSegment, j0: &TangentVector, dtj0: &TangentVector) -> Result<Self> {
        let u0 = seg.start();
        j0.check_base(u0)?;
        dtj0.check_base(u0)?;
        let n = u0.len();
        if seg.is_constant() {
            return Ok(Self {
                geodesic: seg.clone(),
                along0: 0.0,
                along1: 0.0,
                a: vec![0.0; n],
                b: vec![0.0; n],
                constant: Some((j0.values().to_vec(), dtj0.values().to_vec())),
            });
        }
        let v0 = seg.velocity();
        let s2 = seg.speed() * seg.speed();
        let along0 = u0.inner(j0, v0)? / s2;
        let along1 = u0.inner(dtj0, v0)? / s2;
        let w = seg.angular_rate();
        let half: Vec<f64> = u0.values().iter().map(|u| (u / 2.0).exp()).collect();
        let a = j0
            .values()
            .iter()
            .zip(v0.values())
            .zip(&half)
            .map(|((j, v), e)| e * (j - along0 * v))
            .collect();
        let b = dtj0
            .values()
            .iter()
            .zip(v0.values())
            .zip(&half)
            .map(|((d, v), e)| e * (d - along1 * v) / w)
            .collect();
        Ok(Self {
            geodesic: seg.clone(),
            along0,
            along1,
            a,
            b,
            constant: None,
        })
    }

    pub fn geodesic(&self) -> &GeodesicSegment {
        &self.geodesic
    }

    /// Coefficient field `A` of the normal part.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Coefficient field `B` of the normal part.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Coefficients `(a, b)` of the tangential part `(a + b t) u'(t)`.
    pub fn tangential(&self) -> (f64, f64) {
        (self.along0, self.along1)
    }

    /// Scalar factor `sin(w t)` governing zeros of normal fields with
    /// `J(0) = 0`.
    pub fn zero_factor(&self, t: f64) -> f64 {
        (self.geodesic.angular_rate() * t).sin()
    }

    /// `J(t)` and `J'(t)`.
    pub fn eval_with_derivative(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let seg = &self.geodesic;
        seg.check_time(t)?;
        if let Some((j0, w0)) = &self.constant {
            let j = j0.iter().zip(w0).map(|(a, b)| a + t * b).collect();
            return Ok((j, w0.clone()));
        }
        let point = seg.evaluate_unchecked(t);
        let du = seg.velocity_field(t);
        let s = seg.speed();
        let vol = seg.domain().vol();
        let w = seg.angular_rate();
        let (sn, cs) = (w * t).sin_cos();
        let lin = self.along0 + self.along1 * t;
        let mut j = Vec::with_capacity(du.len());
        let mut dj = Vec::with_capacity(du.len());
        for (i, (&d, &u)) in du.iter().zip(point.values()).enumerate() {
            let ddu = -0.5 * d * d - s * s / (2.0 * vol);
            let g = self.a[i] * cs + self.b[i] * sn;
            let dg = w * (self.b[i] * cs - self.a[i] * sn);
            let inv = (-u / 2.0).exp();
            j.push(lin * d + inv * g);
            dj.push(self.along1 * d + lin * ddu + inv * (dg - 0.5 * d * g));
        }
        Ok((j, dj))
    }

    pub fn eval(&self, t: f64) -> Result<TangentVector> {
        let (j, _) = self.eval_with_derivative(t)?;
        let point = self.geodesic.evaluate_unchecked(t);
        Ok(TangentVector::from_parts(&point, j))
    }

    /// `D_t J` at time `t`, computed from the analytic derivative.
    pub fn cov_derivative(&self, t: f64) -> Result<TangentVector> {
        let (j, dj) = self.eval_with_derivative(t)?;
        let point = self.geodesic.evaluate_unchecked(t);
        let du = self.geodesic.velocity_field(t);
        let d = covariant_derivative(&point, &du, &j, &dj);
        Ok(TangentVector::from_parts(&point, d))
    }
}

/// Conserved pairings of a Jacobi field with the geodesic velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialPairings {
    /// `<v0, D_t J(0)>`, constant in `t`.
    pub v0_dtj0: f64,
    /// `<v0, J(0)>`.
    pub v0_j0: f64,
}

impl InitialPairings {
    pub fn new(seg: &GeodesicSegment, j0: &TangentVector, dtj0: &TangentVector) -> Result<Self> {
        let u0 = seg.start();
        Ok(Self {
            v0_dtj0: u0.inner(seg.velocity(), dtj0)?,
            v0_j0: u0.inner(seg.velocity(), j0)?,
        })
    }

    /// `<u', J>(t)`, affine in `t`.
    pub fn velocity_pairing(&self, t: f64) -> f64 {
        self.v0_dtj0 * t + self.v0_j0
    }
}

/// `J''` from the Jacobi equation given `J` and `J'` at time `t`.
pub fn jacobi_ode_rhs(
    seg: &GeodesicSegment,
    t: f64,
    j: &[f64],
    dj: &[f64],
    pairings: &InitialPairings,
) -> Result<Vec<f64>> {
    seg.check_time(t)?;
    seg.domain().check_len(j)?;
    seg.domain().check_len(dj)?;
    let du = seg.velocity_field(t);
    Ok(rhs(&du, dj, pairings.v0_dtj0 / seg.domain().vol()))
}

fn rhs(du: &[f64], dj: &[f64], forcing: f64) -> Vec<f64> {
    du.iter().zip(dj).map(|(a, b)| -a * b - forcing).collect()
}

/// Jacobi field with `J(0) = j0`, `D_t J(0) = dtj0`, evaluated in closed form.
pub fn jacobi_solve(
    seg: &GeodesicSegment,
    j0: &TangentVector,
    dtj0: &TangentVector,
    t: f64,
) -> Result<TangentVector> {
    JacobiClosedForm::new(seg, j0, dtj0)?.eval(t)
}

/// `J(t)` and `J'(t)` by fixed-step fourth-order Runge-Kutta integration of
/// the nodewise Jacobi ODE.
pub fn jacobi_integrate(
    seg: &GeodesicSegment,
    j0: &TangentVector,
    dtj0: &TangentVector,
    t: f64,
    step: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let u0: &ConformalFactor = seg.start();
    j0.check_base(u0)?;
    dtj0.check_base(u0)?;
    seg.check_time(t)?;
    if !(step > 0.0) {
        return Err(Error::domain(format!("step must be positive, got {step}")));
    }
    let pairings = InitialPairings::new(seg, j0, dtj0)?;
    let vol = seg.domain().vol();
    let forcing = pairings.v0_dtj0 / vol;
    let v0 = seg.velocity().values();
    let corr = pairings.v0_j0 / (2.0 * vol);
    let mut j = j0.values().to_vec();
    let mut dj: Vec<f64> = dtj0
        .values()
        .iter()
        .zip(v0)
        .zip(j0.values())
        .map(|((w, v), x)| w - 0.5 * v * x - corr)
        .collect();
    let n = (t.abs() / step).ceil().max(1.0) as usize;
    let h = t / n as f64;
    let len = j.len();
    let mut du0 = seg.velocity_field(0.0);
    let mut tmp_j = vec![0.0; len];
    let mut tmp_dj = vec![0.0; len];
    for k in 0..n {
        let tau = k as f64 * h;
        let dum = seg.velocity_field(tau + 0.5 * h);
        let du1 = seg.velocity_field(tau + h);
        let k1j = dj.clone();
        let k1d = rhs(&du0, &dj, forcing);
        for i in 0..len {
            tmp_j[i] = j[i] + 0.5 * h * k1j[i];
            tmp_dj[i] = dj[i] + 0.5 * h * k1d[i];
        }
        let k2j = tmp_dj.clone();
        let k2d = rhs(&dum, &tmp_dj, forcing);
        for i in 0..len {
            tmp_j[i] = j[i] + 0.5 * h * k2j[i];
            tmp_dj[i] = dj[i] + 0.5 * h * k2d[i];
        }
        let k3j = tmp_dj.clone();
        let k3d = rhs(&dum, &tmp_dj, forcing);
        for i in 0..len {
            tmp_j[i] = j[i] + h * k3j[i];
            tmp_dj[i] = dj[i] + h * k3d[i];
        }
        let k4j = tmp_dj.clone();
        let k4d = rhs(&du1, &tmp_dj, forcing);
        for i in 0..len {
            j[i] += h / 6.0 * (k1j[i] + 2.0 * k2j[i] + 2.0 * k3j[i] + k4j[i]);
            dj[i] += h / 6.0 * (k1d[i] + 2.0 * k2d[i] + 2.0 * k3d[i] + k4d[i]);
        }
        du0 = du1;
    }
    Ok((j, dj))
}

/// Outcome of scanning a geodesic for conjugate points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateReport {
    pub t_min: f64,
    pub t_max: f64,
    /// First positive zero `pi / w` of the scalar factor `sin(w t)`.
    pub first_zero: f64,
    pub conjugate_found: bool,
    /// Distance from the farther end of the existence interval to the
    /// nearest zero of the factor.
    pub margin: f64,
}

const SCAN_SAMPLES: usize = 10_000;

/// Scans `sin(w t)` over the existence interval for zeros other than `t = 0`.
pub fn conjugate_point_scan(seg: &GeodesicSegment) -> Result<ConjugateReport> {
    if seg.is_constant() {
        return Err(Error::domain(
            "conjugate point scan needs a nonconstant geodesic",
        ));
    }
    let w = seg.angular_rate();
    let factor = |t: f64| (w * t).sin();
    let scan = |end: f64| -> bool {
        // Open interval (0, end): look for sign changes or exact zeros.
        let mut prev = factor(end / SCAN_SAMPLES as f64);
        for k in 2..SCAN_SAMPLES {
            let cur = factor(end * k as f64 / SCAN_SAMPLES as f64);
            if cur == 0.0 || cur.signum() != prev.signum() {
                return true;
            }
            prev = cur;
        }
        false
    };
    let found = scan(seg.t_max()) || scan(seg.t_min());
    let first_zero = PI / w;
    let reach = seg.t_max().max(-seg.t_min());
    Ok(ConjugateReport {
        t_min: seg.t_min(),
        t_max: seg.t_max(),
        first_zero,
        conjugate_found: found || first_zero <= reach,
        margin: first_zero - reach,
    })
}
