//! Finite quadrature rules standing in for the volume measure of a closed
//! manifold.
//!
//! Every integral over the manifold reduces to a weighted sum over nodes.
//! Sums are always accumulated in node order so results are reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total volume under the unit-curvature normalization (sectional curvature
/// `1 / (4 vol) = 1`).
pub const NORMALIZED_VOLUME: f64 = 0.25;

/// Shape and spacing of a periodic 2D grid. Nodes are stored row-major with
/// `x` varying fastest: node `(i, j)` has index `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridShape {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl GridShape {
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// A finite node set with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureDomain {
    weights: Vec<f64>,
    vol: f64,
    grid: Option<GridShape>,
}

impl QuadratureDomain {
    /// Builds a domain from arbitrary positive weights; `vol` is their sum.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let vol = weights.iter().sum();
        Self::with_volume(weights, vol, None)
    }

    fn with_volume(weights: Vec<f64>, vol: f64, grid: Option<GridShape>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::domain(format!(
                "a domain needs at least 2 nodes, got {}",
                weights.len()
            )));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::domain(format!(
                "weight {i} must be finite and strictly positive, got {w}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if !(vol > 0.0) || ((sum - vol) / vol).abs() >= 1e-12 {
            return Err(Error::domain(format!(
                "volume {vol} does not match the weight sum {sum}"
            )));
        }
        Ok(Self { weights, vol, grid })
    }

    /// Equal-weight domain with `vol = 1/4`.
    pub fn normalized(node_count: usize) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::domain(format!(
                "a normalized domain needs at least 2 nodes, got {node_count}"
            )));
        }
        let w = NORMALIZED_VOLUME / node_count as f64;
        Self::with_volume(vec![w; node_count], NORMALIZED_VOLUME, None)
    }

    /// Uniform periodic `nx x ny` grid on a square torus of area `total_vol`.
    pub fn torus(nx: usize, ny: usize, total_vol: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::domain(format!(
                "torus grid needs nx, ny >= 3, got {nx} x {ny}"
            )));
        }
        if !(total_vol.is_finite() && total_vol > 0.0) {
            return Err(Error::domain(format!(
                "torus volume must be positive, got {total_vol}"
            )));
        }
        let side = total_vol.sqrt();
        let grid = GridShape {
            nx,
            ny,
            hx: side / nx as f64,
            hy: side / ny as f64,
        };
        let w = total_vol / (nx * ny) as f64;
        Self::with_volume(vec![w; nx * ny], total_vol, Some(grid))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vol(&self) -> f64 {
        self.vol
    }

    /// Radius `2 sqrt(vol)` of the sphere the space immerses into.
    pub fn radius(&self) -> f64 {
        2.0 * self.vol.sqrt()
    }

    pub fn grid(&self) -> Option<&GridShape> {
        self.grid.as_ref()
    }

    pub fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: field.len(),
            });
        }
        Ok(())
    }

    /// `sum_i field_i * weight_i`.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        self.check_len(field)?;
        Ok(self.integrate_unchecked(field))
    }

    pub(crate) fn integrate_unchecked(&self, field: &[f64]) -> f64 {
        field.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    /// Integral of a pointwise product `f * g`.
    pub(crate) fn integrate_product(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    /// The same domain with weights scaled so that `vol = 1/4`.
    pub fn rescaled_to_normalized(&self) -> Self {
        let s = NORMALIZED_VOLUME / self.vol;
        let weights = self.weights.iter().map(|w| w * s).collect();
        let grid = self.grid.map(|g| {
            let side = NORMALIZED_VOLUME.sqrt();
            GridShape {
                hx: side / g.nx as f64,
                hy: side / g.ny as f64,
                ..g
            }
        });
        Self {
            weights,
            vol: NORMALIZED_VOLUME,
            grid,
        }
    }

    pub fn from_file(file: DomainFile) -> Result<Self> {
        match file.grid {
            None => Self::new(file.weights),
            Some(GridSpec { nx, ny }) => {
                if nx * ny != file.weights.len() {
                    return Err(Error::domain(format!(
                        "grid {nx} x {ny} does not match {} weights",
                        file.weights.len()
                    )));
                }
                let vol: f64 = file.weights.iter().sum();
                let torus = Self::torus(nx, ny, vol)?;
                let w = torus.weights[0];
                if file.weights.iter().any(|x| ((x - w) / w).abs() > 1e-12) {
                    return Err(Error::domain("grid domains must have uniform weights"));
                }
                Ok(torus)
            }
        }
    }

    pub fn to_file(&self) -> DomainFile {
        DomainFile {
            weights: self.weights.clone(),
            grid: self.grid.map(|g| GridSpec { nx: g.nx, ny: g.ny }),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DomainFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("domain: {e}")))?;
        Self::from_file(file)
    }
}

/// On-disk domain description: `{ "weights": [..], "grid": {"nx":.., "ny":..} }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}
