//! Random fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use calabi::{covariant_derivative, ConformalFactor, QuadratureDomain, TangentVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random positive weights, total volume drawn from `[0.1, 3]`.
pub fn random_domain(rng: &mut ChaCha8Rng, n: usize) -> Arc<QuadratureDomain> {
    let vol: f64 = rng.gen_range(0.1..3.0);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Arc::new(QuadratureDomain::new(raw.iter().map(|w| w * vol / total).collect()).unwrap())
}

/// Random weights rescaled so that `vol` is exactly `1/4`.
pub fn random_normalized_domain(rng: &mut ChaCha8Rng, n: usize) -> Arc<QuadratureDomain> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    Arc::new(QuadratureDomain::new(raw).unwrap().rescaled_to_normalized())
}

pub fn random_field(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-amp..amp)).collect()
}

pub fn random_point(rng: &mut ChaCha8Rng, d: &Arc<QuadratureDomain>, amp: f64) -> ConformalFactor {
    let raw = random_field(rng, d.len(), amp);
    ConformalFactor::project(d.clone(), &raw).unwrap()
}

/// Random tangent vector with Calabi norm `norm`.
pub fn random_tangent(rng: &mut ChaCha8Rng, u: &ConformalFactor, norm: f64) -> TangentVector {
    loop {
        let raw = random_field(rng, u.len(), 1.0);
        let v = TangentVector::project(u, &raw).unwrap();
        let n = v.norm();
        if n > 1e-3 {
            return v.scaled(norm / n);
        }
    }
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `R(a, b) c = D_q D_r c - D_r D_q c` at `(0, 0)` for the family
/// `u(q, r) = project(u + q a + r b)` and the section
/// `c(q, r) = project_tangent(u(q, r), c)`, by nested central differences.
/// Uses only the connection, never the closed curvature formula.
pub fn fd_curvature_operator(
    u: &ConformalFactor,
    a: &TangentVector,
    b: &TangentVector,
    c: &TangentVector,
    delta: f64,
) -> Vec<f64> {
    let d = u.domain_arc().clone();
    let point = |q: f64, r: f64| -> ConformalFactor {
        let raw: Vec<f64> = (0..u.len())
            .map(|i| u.values()[i] + q * a.values()[i] + r * b.values()[i])
            .collect();
        ConformalFactor::project(d.clone(), &raw).unwrap()
    };
    let section = |q: f64, r: f64| -> Vec<f64> {
        TangentVector::project(&point(q, r), c.values())
            .unwrap()
            .into_values()
    };
    let central = |f: &dyn Fn(f64) -> Vec<f64>| -> Vec<f64> {
        let p = f(delta);
        let m = f(-delta);
        p.iter()
            .zip(&m)
            .map(|(x, y)| (x - y) / (2.0 * delta))
            .collect()
    };
    // D along one parameter of the section at (q, r).
    let first = |q: f64, r: f64, along_q: bool| -> Vec<f64> {
        let (du, dc) = if along_q {
            (
                central(&|h| point(q + h, r).values().to_vec()),
                central(&|h| section(q + h, r)),
            )
        } else {
            (
                central(&|h| point(q, r + h).values().to_vec()),
                central(&|h| section(q, r + h)),
            )
        };
        covariant_derivative(&point(q, r), &du, &section(q, r), &dc)
    };
    let second = |outer_q: bool| -> Vec<f64> {
        let inner_q = !outer_q;
        let (du, dx) = if outer_q {
            (
                central(&|h| point(h, 0.0).values().to_vec()),
                central(&|h| first(h, 0.0, inner_q)),
            )
        } else {
            (
                central(&|h| point(0.0, h).values().to_vec()),
                central(&|h| first(0.0, h, inner_q)),
            )
        };
        covariant_derivative(u, &du, &first(0.0, 0.0, inner_q), &dx)
    };
    let qr = second(true);
    let rq = second(false);
    qr.iter().zip(&rq).map(|(x, y)| x - y).collect()
}

/// Discrete Calabi length of a sampled path: midpoint rule on each chord.
pub fn path_length(points: &[ConformalFactor]) -> f64 {
    points
        .windows(2)
        .map(|p| {
            let d = p[0].domain();
            let du: Vec<f64> = p[1]
                .values()
                .iter()
                .zip(p[0].values())
                .map(|(x, y)| x - y)
                .collect();
            let mid: Vec<f64> = p[1]
                .values()
                .iter()
                .zip(p[0].values())
                .zip(&du)
                .map(|((x, y), z)| z * z * ((x + y) / 2.0).exp())
                .collect();
            d.integrate(&mid).unwrap().sqrt()
        })
        .sum()
}
