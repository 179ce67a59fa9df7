//! The invariant suite behind `calabi verify`.

use std::sync::Arc;

use calabi::gradient::{gradient_geodesic_velocity, GridCurve};
use calabi::immersion::off_plane_residual;
use calabi::{
    boundary_sequence, conjugate_point_scan, diameter_sequence, distance, exp_domain_bound,
    exp_map, geodesic_cauchy, gradient_curvature, gradient_geodesic, gradient_inner,
    gradient_inner_dual, jacobi_integrate, jacobi_solve, log_map, pullback_inner,
    sectional_curvature, sectional_curvature_fd, ConformalFactor, GridPotential, GridTangent,
    QuadratureDomain, TangentVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Header, RunConfig};
use crate::error::CliResult;

/// Nodes from which the diameter and boundary thresholds apply.
pub const SEQUENCE_THRESHOLD_NODES: usize = 1024;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub threshold: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainSummary {
    pub nodes: usize,
    pub vol: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub header: Header,
    pub domain: DomainSummary,
    pub passed: bool,
    pub sectional_curvature: Option<f64>,
    pub sectional_curvature_fd: Option<f64>,
    pub diameter_best: Option<f64>,
    pub boundary_best: Option<f64>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn check(name: &str, pass: bool, observed: f64, threshold: Option<f64>, detail: String) -> Check {
    Check {
        name: name.into(),
        pass,
        observed,
        threshold,
        detail,
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn point(rng: &mut ChaCha8Rng, d: &Arc<QuadratureDomain>, amp: f64) -> CliResult<ConformalFactor> {
    let raw: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-amp..amp)).collect();
    Ok(ConformalFactor::project(d.clone(), &raw)?)
}

fn tangent(rng: &mut ChaCha8Rng, u: &ConformalFactor, norm: f64) -> CliResult<TangentVector> {
    loop {
        let raw: Vec<f64> = (0..u.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v = TangentVector::project(u, &raw)?;
        if v.norm() > 1e-3 {
            return Ok(v.scaled(norm / v.norm()));
        }
    }
}

pub fn run(domain: Arc<QuadratureDomain>, cfg: &RunConfig) -> CliResult<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = &domain;
    let n = d.len();
    let expected_k = 1.0 / (4.0 * d.vol());
    let mut checks = Vec::new();
    let mut report_k = None;
    let mut report_k_fd = None;

    if n >= 3 {
        let u = point(&mut rng, d, 1.0)?;
        let a = tangent(&mut rng, &u, 1.0)?;
        let b = tangent(&mut rng, &u, 1.0)?;
        let k = sectional_curvature(&u, &a, &b)?;
        let k_fd = sectional_curvature_fd(&u, &a, &b, cfg.fd_delta.max(1e-2))?;
        let err = ((k - expected_k).abs()).max((k_fd - expected_k).abs()) / expected_k;
        report_k = Some(k);
        report_k_fd = Some(k_fd);
        checks.push(check(
            "constant_curvature",
            err <= 1e-3,
            err,
            Some(1e-3),
            format!("closed {k}, finite-difference {k_fd}, expected 1/(4 vol) = {expected_k}"),
        ));
    } else {
        checks.push(check(
            "constant_curvature",
            true,
            0.0,
            None,
            "skipped: a plane needs at least 3 nodes".into(),
        ));
    }

    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u0 = point(&mut rng, d, 1.0)?;
        let v = tangent(&mut rng, &u0, 1.0)?;
        let v = v.scaled(rng.gen_range(0.01..0.95) * exp_domain_bound(&v));
        let w = exp_map(&u0, &v)?;
        worst = worst.max(sup_diff(log_map(&u0, &w)?.values(), v.values()));
    }
    checks.push(check(
        "exp_log_round_trip",
        worst < 1e-9,
        worst,
        Some(1e-9),
        "100 random admissible v".into(),
    ));

    let mut slack = f64::INFINITY;
    for _ in 0..200 {
        let p: Vec<ConformalFactor> = (0..3)
            .map(|_| point(&mut rng, d, 2.0))
            .collect::<CliResult<_>>()?;
        let dd = |i: usize, j: usize| distance(&p[i], &p[j]).map(|r| r.d);
        slack = slack.min(dd(0, 1)? + dd(1, 2)? - dd(0, 2)?);
    }
    checks.push(check(
        "triangle_inequality",
        slack >= -1e-12,
        slack,
        Some(-1e-12),
        "200 random triples, min slack".into(),
    ));

    let mut dual = 0.0f64;
    let mut conjugate = false;
    let mut first_zero = f64::INFINITY;
    for _ in 0..5 {
        let u0 = point(&mut rng, d, 0.8)?;
        let v0 = tangent(&mut rng, &u0, d.radius())?;
        let j0 = tangent(&mut rng, &u0, 1.0)?;
        let w0 = tangent(&mut rng, &u0, 1.0)?;
        let seg = geodesic_cauchy(&u0, &v0)?;
        let t = 0.6 * seg.t_max();
        let closed = jacobi_solve(&seg, &j0, &w0, t)?;
        let (ode, _) = jacobi_integrate(&seg, &j0, &w0, t, cfg.ode_step)?;
        dual = dual.max(sup_diff(closed.values(), &ode));
        let scan = conjugate_point_scan(&seg)?;
        conjugate |= scan.conjugate_found;
        first_zero = first_zero.min(scan.first_zero);
    }
    checks.push(check(
        "jacobi_dual_method",
        dual <= 1e-6,
        dual,
        Some(1e-6),
        "closed form vs Runge-Kutta".into(),
    ));
    checks.push(check(
        "no_conjugate_points",
        !conjugate,
        first_zero,
        None,
        format!("first zero of the Jacobi factor at {first_zero} for unit-rate geodesics, outside every existence interval"),
    ));

    let mut rel = 0.0f64;
    let mut off = 0.0f64;
    for _ in 0..20 {
        let u = point(&mut rng, d, 1.0)?;
        let v = tangent(&mut rng, &u, 1.0)?;
        let w = tangent(&mut rng, &u, 1.0)?;
        let a = pullback_inner(&v, &w)?;
        let b = u.inner(&v, &w)?;
        rel = rel.max((a - b).abs() / b.abs().max(1e-3));
        let seg = geodesic_cauchy(&u, &v)?;
        off = off.max(off_plane_residual(&seg, 0.5 * seg.t_max())?);
    }
    checks.push(check(
        "immersion_isometry",
        rel <= 1e-13,
        rel,
        Some(1e-13),
        "pullback vs Calabi inner product".into(),
    ));
    checks.push(check(
        "great_circles",
        off <= 1e-10,
        off,
        Some(1e-10),
        "off-plane residual of immersed geodesics".into(),
    ));

    checks.extend(gradient_checks(&mut rng)?);

    let (mut diameter_best, mut boundary_best) = (None, None);
    if n >= 16 {
        let u = ConformalFactor::zero(domain.clone());
        let dia = diameter_sequence(&u, 8)?;
        let bnd = boundary_sequence(&u, 8)?;
        let rho = d.radius();
        let best_d = dia.iter().map(|x| x.1).fold(0.0, f64::max);
        let best_t = bnd.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        diameter_best = Some(best_d);
        boundary_best = Some(best_t);
        let enforce = n >= SEQUENCE_THRESHOLD_NODES;
        checks.push(check(
            "diameter_sequence",
            !enforce || best_d / rho > 1.50,
            best_d / rho,
            enforce.then_some(1.50),
            format!(
                "best distance {best_d} of the bound {}",
                std::f64::consts::FRAC_PI_2 * rho
            ),
        ));
        checks.push(check(
            "boundary_sequence",
            !enforce || best_t / rho < 0.05,
            best_t / rho,
            enforce.then_some(0.05),
            format!("closest boundary approach {best_t}"),
        ));
    } else {
        for name in ["diameter_sequence", "boundary_sequence"] {
            checks.push(check(
                name,
                true,
                0.0,
                None,
                "skipped: the constructions need at least 16 nodes".into(),
            ));
        }
    }

    let passed = checks.iter().all(|c| c.pass);
    Ok(Report {
        header: cfg.header(),
        domain: DomainSummary {
            nodes: n,
            vol: d.vol(),
            radius: d.radius(),
        },
        passed,
        sectional_curvature: report_k,
        sectional_curvature_fd: report_k_fd,
        diameter_best,
        boundary_best,
        checks,
    })
}

/// Flatness of the gradient metric on an 8 x 8 torus of unit area.
fn gradient_checks(rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let d = Arc::new(QuadratureDomain::torus(8, 8, 1.0)?);
    let field = |rng: &mut ChaCha8Rng, amp: f64| -> Vec<f64> {
        (0..64).map(|_| rng.gen_range(-amp..amp)).collect()
    };
    let phi0 = GridPotential::new(d.clone(), field(rng, 1e-3))?;
    let psi0 = GridTangent::project(&phi0, &field(rng, 1e-3))?;
    let times = vec![0.09, 0.1, 0.11];
    let pts = times
        .iter()
        .map(|&t| gradient_geodesic(&phi0, &psi0, t))
        .collect::<calabi::Result<Vec<_>>>()?;
    let vel = times
        .iter()
        .map(|&t| gradient_geodesic_velocity(&phi0, &psi0, t))
        .collect::<calabi::Result<Vec<_>>>()?;
    let acc = GridCurve::new(times, pts)?.cov_deriv(&vel, 1)?;
    let acc = acc.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let f: Vec<Vec<f64>> = (0..6).map(|_| field(rng, 1.0)).collect();
    let curv = gradient_curvature(&phi0, &f[0], &f[1], &f[2], &f[3], 1e-3)?.abs();
    let a = gradient_inner(&phi0, &f[4], &f[5])?;
    let b = gradient_inner_dual(&phi0, &f[4], &f[5])?;
    let forms = (a - b).abs() / a.abs().max(1.0);
    Ok(vec![
        check(
            "gradient_geodesic_acceleration",
            acc <= 1e-10,
            acc,
            Some(1e-10),
            "D_t phi' along a quadratic geodesic".into(),
        ),
        check(
            "gradient_flatness",
            curv <= 1e-6,
            curv,
            Some(1e-6),
            "curvature pairing on an 8 x 8 torus".into(),
        ),
        check(
            "gradient_metric_forms",
            forms <= 1e-12,
            forms,
            Some(1e-12),
            "Dirichlet form vs Laplacian form".into(),
        ),
    ])
}
