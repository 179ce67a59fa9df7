//! Karcher means and pairwise distance matrices for sets of densities.
//!
//! All reductions run in a fixed order. The mean additionally sorts its inputs
//! into a canonical order first, so relabeling the inputs gives the same bits.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geodesic::{distance, exp_domain_bound, exp_map, log_map};
use crate::quadrature::QuadratureDomain;
use crate::space::{ConformalFactor, TangentVector};

/// Slack kept below `(pi/2) rho` for the pairwise spread of a mean's inputs.
pub const DEFAULT_SPREAD_MARGIN: f64 = 1e-3;
const WEIGHT_SUM_TOL: f64 = 1e-12;
const MAX_HALVINGS: u32 = 40;

/// Points on one domain with nonnegative weights summing to one.
#[derive(Debug, Clone)]
pub struct DensitySet {
    domain: Arc<QuadratureDomain>,
    points: Vec<ConformalFactor>,
    weights: Vec<f64>,
}

impl DensitySet {
    /// Equal weights.
    pub fn new(points: Vec<ConformalFactor>) -> Result<Self> {
        let n = points.len();
        Self::weighted(points, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn weighted(points: Vec<ConformalFactor>, weights: Vec<f64>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::domain("a density set needs at least one point"))?;
        if weights.len() != points.len() {
            return Err(Error::Dimension {
                expected: points.len(),
                found: weights.len(),
            });
        }
        if points.iter().any(|p| !p.same_domain(first)) {
            return Err(Error::domain("all densities must share one domain"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::domain("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if !((total - 1.0).abs() <= WEIGHT_SUM_TOL) {
            return Err(Error::Constraint {
                what: "weights sum to one",
                violation: (total - 1.0).abs(),
                tolerance: WEIGHT_SUM_TOL,
            });
        }
        Ok(Self {
            domain: first.domain_arc().clone(),
            points,
            weights,
        })
    }

    pub fn domain(&self) -> &QuadratureDomain {
        &self.domain
    }

    pub fn points(&self) -> &[ConformalFactor] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Outcome of [`karcher_mean`]. `history` holds the residual norm of every
/// accepted iterate, starting with the initial guess.
#[derive(Debug, Clone)]
pub struct KarcherResult {
    pub mean: ConformalFactor,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KarcherSummary {
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

impl KarcherResult {
    pub fn summary(&self) -> KarcherSummary {
        KarcherSummary {
            iterations: self.iterations,
            residual: self.residual,
            history: self.history.clone(),
        }
    }
}

fn canonical_cmp(a: &(&ConformalFactor, f64), b: &(&ConformalFactor, f64)) -> Ordering {
    a.0.values()
        .iter()
        .zip(b.0.values())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then(a.1.total_cmp(&b.1))
}

fn weighted_log(u: &ConformalFactor, items: &[(&ConformalFactor, f64)]) -> Result<TangentVector> {
    let mut acc = vec![0.0; u.len()];
    for (p, w) in items {
        if *w == 0.0 {
            continue;
        }
        let l = log_map(u, p)?;
        for (a, x) in acc.iter_mut().zip(l.values()) {
            *a += w * x;
        }
    }
    TangentVector::with_tolerance(u, acc, 1e-8)
}

/// Weighted Karcher mean with the default spread margin.
pub fn karcher_mean(set: &DensitySet, tol: f64, max_iter: usize) -> Result<KarcherResult> {
    karcher_mean_with_margin(set, tol, max_iter, DEFAULT_SPREAD_MARGIN)
}

/// Fixed-point iteration `u <- exp_u(step * sum w_i log_u(u_i))`, starting from
/// the projection of `sum w_i u_i`. The step halves whenever the update leaves
/// the exponential domain or fails to reduce the residual.
pub fn karcher_mean_with_margin(
    set: &DensitySet,
    tol: f64,
    max_iter: usize,
    margin: f64,
) -> Result<KarcherResult> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let limit = FRAC_PI_2 * set.domain.radius() - margin;
    let dm = distance_matrix(set)?;
    for (i, row) in dm.iter().enumerate() {
        for (j, d) in row.iter().enumerate().skip(i + 1) {
            if !(*d < limit) {
                return Err(Error::domain(format!(
                    "points {i} and {j} are {d} apart, the mean needs spreads below {limit}"
                )));
            }
        }
    }

    let mut items: Vec<(&ConformalFactor, f64)> =
        set.points.iter().zip(set.weights.iter().copied()).collect();
    items.sort_by(canonical_cmp);

    let mut avg = vec![0.0; set.domain.len()];
    for (p, w) in &items {
        for (a, x) in avg.iter_mut().zip(p.values()) {
            *a += w * x;
        }
    }
    let mut u = ConformalFactor::project(set.domain.clone(), &avg)?;
    let mut r = weighted_log(&u, &items)?;
    let mut res = r.norm();
    let mut history = vec![res];
    let mut iterations = 0;

    while res > tol {
        if iterations >= max_iter {
            return Err(Error::Convergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let mut step = 1.0;
        let mut accepted = None;
        let mut left_domain = true;
        for _ in 0..MAX_HALVINGS {
            let v = r.scaled(step);
            if v.norm() < exp_domain_bound(&v) {
                if let Ok(next) = exp_map(&u, &v) {
                    left_domain = false;
                    let r_next = weighted_log(&next, &items)?;
                    let res_next = r_next.norm();
                    if res_next < res {
                        accepted = Some((next, r_next, res_next));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((next, r_next, res_next)) => {
                u = next;
                r = r_next;
                res = res_next;
                history.push(res);
            }
            None if left_domain => {
                return Err(Error::domain(
                    "mean update stays outside the exponential domain after step halving",
                ))
            }
            None => {
                return Err(Error::Convergence {
                    iterations,
                    residual: res,
                })
            }
        }
    }
    Ok(KarcherResult {
        mean: u,
        iterations,
        residual: res,
        history,
    })
}

/// Symmetric matrix of pairwise geodesic distances; rows run in parallel.
pub fn distance_matrix(set: &DensitySet) -> Result<Vec<Vec<f64>>> {
    let n = set.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            ((i + 1)..n)
                .map(|j| distance(&set.points[i], &set.points[j]).map(|r| r.d))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in upper.iter().enumerate() {
        for (k, d) in row.iter().enumerate() {
            let j = i + 1 + k;
            m[i][j] = *d;
            m[j][i] = *d;
        }
    }
    Ok(m)
}
