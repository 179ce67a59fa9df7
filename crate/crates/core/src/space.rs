//! Points of the space of normalized conformal volume factors and their
//! tangent vectors.
//!
//! A point is a log-density `u` with `integrate(e^u) = vol`. A tangent vector
//! at `u` is a field `v` with `integrate(v e^u) = 0`. The Calabi inner product
//! is `<v, w>_u = integrate(v w e^u)`.
//!
//! Fields are stored on the log scale; `e^u` is recomputed on demand so that
//! points close to the boundary (where `e^u -> 0`) keep full precision.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{DomainFile, QuadratureDomain};

/// Default relative tolerance on the defining constraints.
pub const DEFAULT_CONSTRAINT_EPS: f64 = 1e-10;

/// A point `u` of the space.
#[derive(Debug, Clone)]
pub struct ConformalFactor {
    domain: Arc<QuadratureDomain>,
    values: Arc<[f64]>,
}

impl PartialEq for ConformalFactor {
    fn eq(&self, other: &Self) -> bool {
        self.same_domain(other) && self.values == other.values
    }
}

impl ConformalFactor {
    /// Wraps `values` after checking the volume constraint at the default
    /// tolerance.
    pub fn new(domain: Arc<QuadratureDomain>, values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(domain, values, DEFAULT_CONSTRAINT_EPS)
    }

    pub fn with_tolerance(
        domain: Arc<QuadratureDomain>,
        values: Vec<f64>,
        eps: f64,
    ) -> Result<Self> {
        domain.check_len(&values)?;
        if values.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::Range(
                "conformal factor has non-finite values".into(),
            ));
        }
        let mass: f64 = values
            .iter()
            .zip(domain.weights())
            .map(|(u, w)| u.exp() * w)
            .sum();
        let violation = (mass - domain.vol()).abs() / domain.vol();
        if !(violation <= eps) {
            return Err(Error::Constraint {
                what: "integral of e^u equals vol",
                violation,
                tolerance: eps,
            });
        }
        Ok(Self::from_parts(domain, values))
    }

    /// Skips validation; callers guarantee the constraint analytically.
    pub(crate) fn from_parts(domain: Arc<QuadratureDomain>, values: Vec<f64>) -> Self {
        Self {
            domain,
            values: values.into(),
        }
    }

    /// The reference point `u = 0`.
    pub fn zero(domain: Arc<QuadratureDomain>) -> Self {
        let n = domain.len();
        Self::from_parts(domain, vec![0.0; n])
    }

    /// Shifts `raw` by the unique constant that restores the constraint.
    pub fn project(domain: Arc<QuadratureDomain>, raw: &[f64]) -> Result<Self> {
        domain.check_len(raw)?;
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::Range(
                "raw field must be finite at every node".into(),
            ));
        }
        let top = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mass: f64 = raw
            .iter()
            .zip(domain.weights())
            .map(|(r, w)| (r - top).exp() * w)
            .sum();
        let shift = top + (mass / domain.vol()).ln();
        if !shift.is_finite() {
            return Err(Error::Range(format!(
                "cannot normalize field: log-mass shift is {shift}"
            )));
        }
        let values: Vec<f64> = raw.iter().map(|r| r - shift).collect();
        if values.iter().any(|u| !u.exp().is_finite()) {
            return Err(Error::Range(
                "e^u overflows after normalization; rescale the input".into(),
            ));
        }
        Ok(Self::from_parts(domain, values))
    }

    /// Ingests a positive density as `u = log(density)` and projects it.
    pub fn from_density(domain: Arc<QuadratureDomain>, density: &[f64]) -> Result<Self> {
        if let Some((i, d)) = density
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.is_finite() && **d > 0.0))
        {
            return Err(Error::Range(format!(
                "density must be finite and positive, node {i} has {d}"
            )));
        }
        let raw: Vec<f64> = density.iter().map(|d| d.ln()).collect();
        Self::project(domain, &raw)
    }

    pub fn domain(&self) -> &QuadratureDomain {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<QuadratureDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `e^u` at every node.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|u| u.exp()).collect()
    }

    /// Relative residual `|integrate(e^u) - vol| / vol`.
    pub fn constraint_residual(&self) -> f64 {
        let mass = self.domain.integrate_unchecked(&self.density());
        (mass - self.domain.vol()).abs() / self.domain.vol()
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    pub(crate) fn check_same_domain(&self, other: &Self) -> Result<()> {
        if !self.same_domain(other) {
            return Err(Error::domain("points live on different domains"));
        }
        Ok(())
    }

    /// Weighted integral `integrate(f e^u)`.
    pub fn weighted_integral(&self, field: &[f64]) -> Result<f64> {
        self.domain.check_len(field)?;
        Ok(self.weighted_integral_unchecked(field))
    }

    pub(crate) fn weighted_integral_unchecked(&self, field: &[f64]) -> f64 {
        field
            .iter()
            .zip(self.values.iter())
            .zip(self.domain.weights())
            .map(|((f, u), w)| f * u.exp() * w)
            .sum()
    }

    /// Calabi pairing of raw fields, without tangency checks.
    pub(crate) fn pair(&self, v: &[f64], w: &[f64]) -> f64 {
        v.iter()
            .zip(w)
            .zip(self.values.iter())
            .zip(self.domain.weights())
            .map(|(((a, b), u), wt)| a * b * u.exp() * wt)
            .sum()
    }

    /// Calabi inner product `<v, w>_u`.
    pub fn inner(&self, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        v.check_base(self)?;
        w.check_base(self)?;
        Ok(self.pair(&v.values, &w.values))
    }

    pub fn norm(&self, v: &TangentVector) -> Result<f64> {
        Ok(self.inner(v, v)?.sqrt())
    }

    pub fn to_field_file(&self) -> DensityFieldFile {
        DensityFieldFile {
            domain: DomainRef::Inline(self.domain.to_file()),
            u: Some(self.values.to_vec()),
            density: None,
        }
    }
}

/// A tangent vector `v` at a basepoint `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: ConformalFactor,
    values: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: &ConformalFactor, values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(base, values, DEFAULT_CONSTRAINT_EPS)
    }

    /// Validates `|integrate(v e^u)| <= eps * vol * max(1, max|v|)`.
    pub fn with_tolerance(base: &ConformalFactor, values: Vec<f64>, eps: f64) -> Result<Self> {
        base.domain.check_len(&values)?;
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Range("tangent vector has non-finite values".into()));
        }
        let scale = values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let violation =
            base.weighted_integral_unchecked(&values).abs() / (base.domain.vol() * scale);
        if !(violation <= eps) {
            return Err(Error::Constraint {
                what: "integral of v e^u vanishes",
                violation,
                tolerance: eps,
            });
        }
        Ok(Self::from_parts(base, values))
    }

    pub(crate) fn from_parts(base: &ConformalFactor, values: Vec<f64>) -> Self {
        Self {
            base: base.clone(),
            values,
        }
    }

    pub fn zero(base: &ConformalFactor) -> Self {
        Self::from_parts(base, vec![0.0; base.len()])
    }

    /// Orthogonal projection `raw - (1/vol) integrate(raw e^u)`.
    pub fn project(base: &ConformalFactor, raw: &[f64]) -> Result<Self> {
        base.domain.check_len(raw)?;
        Ok(Self::from_parts(base, project_raw(base, raw)))
    }

    pub fn base(&self) -> &ConformalFactor {
        &self.base
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.base.pair(&self.values, &self.values).sqrt()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_parts(&self.base, self.values.iter().map(|x| a * x).collect())
    }

    /// `self + a * other`, both based at the same point.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        other.check_base(&self.base)?;
        Ok(Self::from_parts(
            &self.base,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        ))
    }

    pub(crate) fn check_base(&self, u: &ConformalFactor) -> Result<()> {
        let same = Arc::ptr_eq(&self.base.values, &u.values) || self.base == *u;
        if !same {
            return Err(Error::domain(
                "tangent vector is based at a different point",
            ));
        }
        Ok(())
    }
}

pub(crate) fn project_raw(base: &ConformalFactor, raw: &[f64]) -> Vec<f64> {
    let mean = base.weighted_integral_unchecked(raw) / base.domain.vol();
    raw.iter().map(|r| r - mean).collect()
}

/// Where a density field takes its domain from: a path or an inline object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainRef {
    Path(String),
    Inline(DomainFile),
}

/// On-disk density field: `{ "domain": .., "u": [..] }` or
/// `{ "domain": .., "density": [..] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFieldFile {
    pub domain: DomainRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<f64>>,
}

impl DensityFieldFile {
    /// Resolves the field against an already loaded domain. A `u` field is
    /// validated at `eps`; a `density` field is log-transformed and projected.
    pub fn into_point(self, domain: Arc<QuadratureDomain>, eps: f64) -> Result<ConformalFactor> {
        match (self.u, self.density) {
            (Some(u), None) => ConformalFactor::with_tolerance(domain, u, eps),
            (None, Some(d)) => ConformalFactor::from_density(domain, &d),
            (Some(_), Some(_)) => Err(Error::Parse(
                "density field must carry exactly one of \"u\" or \"density\"".into(),
            )),
            (None, None) => Err(Error::Parse(
                "density field is missing both \"u\" and \"density\"".into(),
            )),
        }
    }
}
