//! Seeded fixtures shared by the benchmarks.

use std::sync::Arc;

use calabi::{ConformalFactor, QuadratureDomain, TangentVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn domain(n: usize) -> Arc<QuadratureDomain> {
    Arc::new(QuadratureDomain::normalized(n).expect("n >= 2"))
}

pub fn point(rng: &mut ChaCha8Rng, d: &Arc<QuadratureDomain>) -> ConformalFactor {
    let raw: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ConformalFactor::project(d.clone(), &raw).expect("finite input")
}

/// Random tangent vector at `u` with Calabi norm `norm`.
pub fn tangent(rng: &mut ChaCha8Rng, u: &ConformalFactor, norm: f64) -> TangentVector {
    let raw: Vec<f64> = (0..u.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let v = TangentVector::project(u, &raw).expect("finite input");
    v.scaled(norm / v.norm())
}
