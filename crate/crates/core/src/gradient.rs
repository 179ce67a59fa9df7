//! The gradient metric on normalized potentials of a closed surface, realized
//! on a uniform periodic grid.
//!
//! The discrete gradient is the forward difference with periodic wrap and the
//! Laplacian is the 5-point stencil, which is exactly minus the adjoint of the
//! gradient under uniform weights. So the two forms of the metric,
//! `sum grad psi . grad chi w` and `-sum psi (lap chi) w`, agree identically.
//!
//! On a surface `lap_phi dmu_phi = lap dmu`, so the metric does not depend on
//! the base potential, the covariant derivative is
//! `D_t psi = psi' - (1/vol) <<psi, phi'>>`, curvature vanishes and geodesics
//! are `phi(t) = phi0 + t psi0 + (1/(2 vol)) <<psi0, psi0>> t^2`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{GridShape, QuadratureDomain};

const NORMALIZATION_TOL: f64 = 1e-10;
const TANGENCY_TOL: f64 = 1e-10;
const GAUSS_POINTS: usize = 16;

fn grid_of(domain: &QuadratureDomain) -> Result<GridShape> {
    domain
        .grid()
        .copied()
        .ok_or_else(|| Error::domain("the gradient metric needs a periodic surface grid"))
}

/// 5-point periodic Laplacian.
pub fn laplacian(domain: &QuadratureDomain, f: &[f64]) -> Result<Vec<f64>> {
    let g = grid_of(domain)?;
    domain.check_len(f)?;
    let (ix2, iy2) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let mut out = vec![0.0; f.len()];
    for j in 0..g.ny {
        let jp = (j + 1) % g.ny;
        let jm = (j + g.ny - 1) % g.ny;
        for i in 0..g.nx {
            let ip = (i + 1) % g.nx;
            let im = (i + g.nx - 1) % g.nx;
            let c = f[g.index(i, j)];
            out[g.index(i, j)] = (f[g.index(ip, j)] - 2.0 * c + f[g.index(im, j)]) * ix2
                + (f[g.index(i, jp)] - 2.0 * c + f[g.index(i, jm)]) * iy2;
        }
    }
    Ok(out)
}

/// Forward-difference periodic gradient `(d_x f, d_y f)`.
pub fn forward_gradient(domain: &QuadratureDomain, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = grid_of(domain)?;
    domain.check_len(f)?;
    let mut gx = vec![0.0; f.len()];
    let mut gy = vec![0.0; f.len()];
    for j in 0..g.ny {
        let jp = (j + 1) % g.ny;
        for i in 0..g.nx {
            let ip = (i + 1) % g.nx;
            let c = f[g.index(i, j)];
            gx[g.index(i, j)] = (f[g.index(ip, j)] - c) / g.hx;
            gy[g.index(i, j)] = (f[g.index(i, jp)] - c) / g.hy;
        }
    }
    Ok((gx, gy))
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // Chebyshev guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Discrete normalization functional
/// `L(0, phi) = (1/vol) int_0^1 sum phi (1 + s lap phi) w ds`,
/// whose time derivative along a curve is `(1/vol) sum phi' (1 + lap phi) w`.
pub fn normalization_functional(domain: &QuadratureDomain, phi: &[f64]) -> Result<f64> {
    let lap = laplacian(domain, phi)?;
    let total: f64 = gauss_legendre_unit(GAUSS_POINTS)
        .iter()
        .map(|(s, ws)| {
            let inner: f64 = phi
                .iter()
                .zip(&lap)
                .zip(domain.weights())
                .map(|((p, l), w)| p * (1.0 + s * l) * w)
                .sum();
            ws * inner
        })
        .sum();
    Ok(total / domain.vol())
}

/// A normalized potential `phi` on a surface grid with `1 + lap phi > 0`.
#[derive(Debug, Clone)]
pub struct GridPotential {
    domain: Arc<QuadratureDomain>,
    values: Vec<f64>,
    offset: f64,
}

impl GridPotential {
    /// Validates positivity and subtracts `L(0, raw)` so that the result is
    /// normalized; the subtracted constant is kept as [`Self::offset`].
    pub fn new(domain: Arc<QuadratureDomain>, raw: Vec<f64>) -> Result<Self> {
        check_positive(&domain, &raw)?;
        let offset = normalization_functional(&domain, &raw)?;
        let values = raw.iter().map(|p| p - offset).collect();
        Ok(Self {
            domain,
            values,
            offset,
        })
    }

    /// Wraps an already normalized potential.
    pub fn normalized(domain: Arc<QuadratureDomain>, values: Vec<f64>) -> Result<Self> {
        check_positive(&domain, &values)?;
        let l = normalization_functional(&domain, &values)?;
        let scale = values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if !(l.abs() <= NORMALIZATION_TOL * scale) {
            return Err(Error::Constraint {
                what: "normalization functional vanishes",
                violation: l.abs(),
                tolerance: NORMALIZATION_TOL,
            });
        }
        Ok(Self {
            domain,
            values,
            offset: 0.0,
        })
    }

    pub fn zero(domain: Arc<QuadratureDomain>) -> Result<Self> {
        let n = domain.len();
        Self::normalized(domain, vec![0.0; n])
    }

    pub fn domain(&self) -> &QuadratureDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Density factor `1 + lap phi` of the measure `dmu_phi`.
    pub fn density(&self) -> Vec<f64> {
        laplacian(&self.domain, &self.values)
            .expect("grid checked at construction")
            .into_iter()
            .map(|l| 1.0 + l)
            .collect()
    }

    /// `sum f (1 + lap phi) w`.
    pub fn measure_integral(&self, f: &[f64]) -> Result<f64> {
        self.domain.check_len(f)?;
        Ok(f.iter()
            .zip(self.density())
            .zip(self.domain.weights())
            .map(|((a, b), w)| a * b * w)
            .sum())
    }

    pub fn to_file(&self) -> GridPotentialFile {
        let g = self.domain.grid().expect("grid checked at construction");
        GridPotentialFile {
            nx: g.nx,
            ny: g.ny,
            vol: Some(self.domain.vol()),
            phi: self.values.clone(),
        }
    }
}

fn check_positive(domain: &QuadratureDomain, phi: &[f64]) -> Result<()> {
    let lap = laplacian(domain, phi)?;
    if let Some((i, l)) = lap.iter().enumerate().find(|(_, l)| !(1.0 + **l > 0.0)) {
        return Err(Error::domain(format!(
            "1 + lap(phi) must be positive, node {i} has {}",
            1.0 + l
        )));
    }
    Ok(())
}

/// A tangent field `psi` at a grid potential: `sum psi (1 + lap phi) w = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTangent {
    values: Vec<f64>,
}

impl GridTangent {
    pub fn new(phi: &GridPotential, values: Vec<f64>) -> Result<Self> {
        let m = phi.measure_integral(&values)?;
        let scale = values.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let violation = m.abs() / (phi.domain.vol() * scale);
        if !(violation <= TANGENCY_TOL) {
            return Err(Error::Constraint {
                what: "integral of psi against dmu_phi vanishes",
                violation,
                tolerance: TANGENCY_TOL,
            });
        }
        Ok(Self { values })
    }

    /// Subtracts the `dmu_phi`-mean.
    pub fn project(phi: &GridPotential, raw: &[f64]) -> Result<Self> {
        let mean = phi.measure_integral(raw)? / phi.domain.vol();
        Ok(Self {
            values: raw.iter().map(|x| x - mean).collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `<<psi, chi>> = -sum psi (lap chi) w`; independent of `phi` on a surface.
pub fn gradient_inner(phi: &GridPotential, psi: &[f64], chi: &[f64]) -> Result<f64> {
    let d = &phi.domain;
    d.check_len(psi)?;
    let lap = laplacian(d, chi)?;
    Ok(-d.integrate_product(psi, &lap))
}

/// Same pairing computed as `sum grad psi . grad chi w`.
pub fn gradient_inner_dual(phi: &GridPotential, psi: &[f64], chi: &[f64]) -> Result<f64> {
    let d = &phi.domain;
    let (px, py) = forward_gradient(d, psi)?;
    let (cx, cy) = forward_gradient(d, chi)?;
    Ok(d.integrate_product(&px, &cx) + d.integrate_product(&py, &cy))
}

/// Same pairing computed with the `phi`-dependent Laplacian
/// `lap chi / (1 + lap phi)` and measure `(1 + lap phi) w`.
pub fn gradient_inner_weighted(phi: &GridPotential, psi: &[f64], chi: &[f64]) -> Result<f64> {
    let d = &phi.domain;
    d.check_len(psi)?;
    let lap = laplacian(d, chi)?;
    let dens = phi.density();
    Ok(-psi
        .iter()
        .zip(&lap)
        .zip(&dens)
        .zip(d.weights())
        .map(|(((p, l), m), w)| p * (l / m) * m * w)
        .sum::<f64>())
}

/// Potentials sampled on a strictly increasing time grid.
#[derive(Debug, Clone)]
pub struct GridCurve {
    times: Vec<f64>,
    points: Vec<GridPotential>,
}

impl GridCurve {
    pub fn new(times: Vec<f64>, points: Vec<GridPotential>) -> Result<Self> {
        if times.len() < 3 || times.len() != points.len() {
            return Err(Error::domain(
                "a grid curve needs at least 3 samples with one potential per time",
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("sample times must be strictly increasing"));
        }
        if points.iter().any(|p| p.domain != points[0].domain) {
            return Err(Error::domain("curve samples live on different grids"));
        }
        Ok(Self { times, points })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[GridPotential] {
        &self.points
    }

    /// `D_t psi = psi' - (1/vol) <<psi, phi'>>` at an interior sample, with
    /// both time derivatives by central differences.
    pub fn cov_deriv(&self, section: &[Vec<f64>], idx: usize) -> Result<GridTangent> {
        let n = self.times.len();
        if idx == 0 || idx + 1 >= n {
            return Err(Error::Index { index: idx, len: n });
        }
        if section.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: section.len(),
            });
        }
        let dt = self.times[idx + 1] - self.times[idx - 1];
        let central = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| (x - y) / dt).collect()
        };
        let dphi = central(&self.points[idx + 1].values, &self.points[idx - 1].values);
        let dpsi = central(&section[idx + 1], &section[idx - 1]);
        let phi = &self.points[idx];
        let corr = gradient_inner(phi, &section[idx], &dphi)? / phi.domain.vol();
        Ok(GridTangent {
            values: dpsi.iter().map(|x| x - corr).collect(),
        })
    }
}

/// Admissible times `(t_lo, t_hi)` keeping `1 + lap(phi0 + t psi0) > 0`.
pub fn admissible_times(phi0: &GridPotential, psi0: &GridTangent) -> Result<(f64, f64)> {
    let d = &phi0.domain;
    let dens = phi0.density();
    let lap_psi = laplacian(d, &psi0.values)?;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (m, l) in dens.iter().zip(&lap_psi) {
        if *l < 0.0 {
            hi = hi.min(m / -l);
        } else if *l > 0.0 {
            lo = lo.max(-m / l);
        }
    }
    Ok((lo, hi))
}

/// Geodesic `phi(t) = phi0 + t psi0 + (1/(2 vol)) <<psi0, psi0>> t^2`.
pub fn gradient_geodesic(
    phi0: &GridPotential,
    psi0: &GridTangent,
    t: f64,
) -> Result<GridPotential> {
    let (lo, hi) = admissible_times(phi0, psi0)?;
    if !(t > lo && t < hi) {
        return Err(Error::domain(format!(
            "positivity of 1 + lap(phi) fails at t = {t}; admissible interval is ({lo}, {hi})"
        )));
    }
    let d = &phi0.domain;
    let quad = gradient_inner(phi0, &psi0.values, &psi0.values)? / (2.0 * d.vol());
    let values = phi0
        .values
        .iter()
        .zip(&psi0.values)
        .map(|(p, v)| p + t * v + quad * t * t)
        .collect();
    Ok(GridPotential {
        domain: phi0.domain.clone(),
        values,
        offset: 0.0,
    })
}

/// Velocity `phi'(t) = psi0 + (1/vol) <<psi0, psi0>> t` of the geodesic.
pub fn gradient_geodesic_velocity(
    phi0: &GridPotential,
    psi0: &GridTangent,
    t: f64,
) -> Result<Vec<f64>> {
    let k = gradient_inner(phi0, &psi0.values, &psi0.values)? / phi0.domain.vol();
    Ok(psi0.values.iter().map(|v| v + k * t).collect())
}

/// `<<(D_q D_r - D_r D_q) psi, d>>` for the family `phi + q a + r b` and the
/// section `psi(q, r) = c + q b + r a + q r c`, by nested central differences
/// with step `delta`. Vanishes for the flat gradient metric.
pub fn gradient_curvature(
    phi: &GridPotential,
    a: &[f64],
    b: &[f64],
    c: &[f64],
    d: &[f64],
    delta: f64,
) -> Result<f64> {
    let dom = &phi.domain;
    for f in [a, b, c, d] {
        dom.check_len(f)?;
    }
    let vol = dom.vol();
    let section = |q: f64, r: f64| -> Vec<f64> {
        (0..c.len())
            .map(|i| c[i] + q * b[i] + r * a[i] + q * r * c[i])
            .collect()
    };
    // D_x psi at (q, r) where x moves the family along `dir`.
    let first = |q: f64, r: f64, along_q: bool| -> Result<Vec<f64>> {
        let (p, m) = if along_q {
            (section(q + delta, r), section(q - delta, r))
        } else {
            (section(q, r + delta), section(q, r - delta))
        };
        let dpsi: Vec<f64> = p
            .iter()
            .zip(&m)
            .map(|(x, y)| (x - y) / (2.0 * delta))
            .collect();
        let dir = if along_q { a } else { b };
        let corr = gradient_inner(phi, &section(q, r), dir)? / vol;
        Ok(dpsi.iter().map(|x| x - corr).collect())
    };
    let second = |outer_q: bool| -> Result<Vec<f64>> {
        let inner_q = !outer_q;
        let (p, m) = if outer_q {
            (first(delta, 0.0, inner_q)?, first(-delta, 0.0, inner_q)?)
        } else {
            (first(0.0, delta, inner_q)?, first(0.0, -delta, inner_q)?)
        };
        let dx: Vec<f64> = p
            .iter()
            .zip(&m)
            .map(|(x, y)| (x - y) / (2.0 * delta))
            .collect();
        let dir = if outer_q { a } else { b };
        let inner_val = first(0.0, 0.0, inner_q)?;
        let corr = gradient_inner(phi, &inner_val, dir)? / vol;
        Ok(dx.iter().map(|x| x - corr).collect())
    };
    let qr = second(true)?;
    let rq = second(false)?;
    let diff: Vec<f64> = qr.iter().zip(&rq).map(|(x, y)| x - y).collect();
    gradient_inner(phi, &diff, d)
}

/// On-disk grid potential: `{ "nx":.., "ny":.., "phi": [..] }` with an
/// optional total area `vol` (default 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPotentialFile {
    pub nx: usize,
    pub ny: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vol: Option<f64>,
    pub phi: Vec<f64>,
}

impl GridPotentialFile {
    pub fn into_potential(self) -> Result<GridPotential> {
        let domain = Arc::new(QuadratureDomain::torus(
            self.nx,
            self.ny,
            self.vol.unwrap_or(1.0),
        )?);
        GridPotential::new(domain, self.phi)
    }
}
