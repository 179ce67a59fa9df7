//! Riemannian geometry of the Calabi metric on conformal volume factors.
//!
//! A point is a field `u` on a quadrature domain with `integrate(e^u) = vol`;
//! tangent vectors are fields `v` with `integrate(v e^u) = 0`, and the metric is
//! `<v, w>_u = integrate(v w e^u)`. The space is isometric to an open piece of
//! the round sphere of radius `2 sqrt(vol)`, so geodesics, distances, Jacobi
//! fields and parallel transport all have closed forms.
//!
//! ```
//! use std::sync::Arc;
//! use calabi::{distance, ConformalFactor, QuadratureDomain};
//!
//! let d = Arc::new(QuadratureDomain::normalized(2).unwrap());
//! let u0 = ConformalFactor::zero(d.clone());
//! let u1 = ConformalFactor::new(d, vec![1.5f64.ln(), 0.5f64.ln()]).unwrap();
//! let r = distance(&u0, &u1).unwrap();
//! assert!((r.d - std::f64::consts::PI / 12.0).abs() < 1e-15);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN on purpose

pub mod connection;
pub mod error;
pub mod geodesic;
pub mod gradient;
pub mod immersion;
pub mod jacobi;
pub mod quadrature;
pub mod space;
pub mod stats;

pub use connection::{
    covariant_derivative, curvature_operator, curvature_tensor, parallel_transport,
    sectional_curvature, sectional_curvature_fd, SampledCurve,
};
pub use error::{Error, Result};
pub use geodesic::{
    arccot, boundary_direction, boundary_sequence, cosine, diameter, diameter_point,
    diameter_sequence, distance, exp_domain_bound, exp_map, geodesic_cauchy, geodesic_dirichlet,
    log_map, DistanceReport, GeodesicSegment,
};
pub use gradient::{
    gradient_curvature, gradient_geodesic, gradient_inner, gradient_inner_dual,
    gradient_inner_weighted, GridCurve, GridPotential, GridPotentialFile, GridTangent,
};
pub use immersion::{immerse, pullback_inner, SpherePoint};
pub use jacobi::{
    conjugate_point_scan, jacobi_integrate, jacobi_solve, ConjugateReport, JacobiClosedForm,
};
pub use quadrature::{DomainFile, QuadratureDomain, NORMALIZED_VOLUME};
pub use space::{ConformalFactor, DensityFieldFile, DomainRef, TangentVector};
pub use stats::{distance_matrix, karcher_mean, DensitySet, KarcherResult};
