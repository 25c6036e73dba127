use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the number of grid points.
pub const DEFAULT_POINT_BUDGET: usize = 100_000;

/// Axis-aligned uniform grid of candidate boundary points around a point of
/// interest.
///
/// Points are ordered with the first coordinate varying fastest: the flat
/// index of `(i_0, …, i_{n-1})` is `Σ i_d · resolution^d`. For a 2-D grid this
/// is row-major with `y` selecting the row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meshgrid {
    center: Vec<f64>,
    extent: Vec<f64>,
    resolution: usize,
    points: Vec<Vec<f64>>,
}

impl Meshgrid {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Half-width per dimension.
    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dims(&self) -> usize {
        self.center.len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Coordinates along dimension `d`.
    pub fn axis(&self, d: usize) -> Vec<f64> {
        axis(self.center[d], self.extent[d], self.resolution)
    }

    /// Whether `p` lies inside the grid's bounding box.
    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dims()
            && p.iter()
                .zip(self.center.iter().zip(&self.extent))
                .all(|(x, (c, e))| (x - c).abs() <= *e)
    }
}

fn axis(center: f64, extent: f64, resolution: usize) -> Vec<f64> {
    (0..resolution)
        .map(|i| center + extent * (2.0 * i as f64 / (resolution - 1) as f64 - 1.0))
        .collect()
}

pub fn build_meshgrid(center: &[f64], extent: &[f64], resolution: usize) -> Result<Meshgrid> {
    build_meshgrid_with_budget(center, extent, resolution, DEFAULT_POINT_BUDGET)
}

pub fn build_meshgrid_with_budget(
    center: &[f64],
    extent: &[f64],
    resolution: usize,
    budget: usize,
) -> Result<Meshgrid> {
    if center.is_empty() {
        return Err(Error::InvalidArgument("grid center has no coordinates".into()));
    }
    if extent.len() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            actual: extent.len(),
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 2, got {resolution}"
        )));
    }
    if center.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("grid center must be finite".into()));
    }
    if extent.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "grid extent must be positive and finite, got {extent:?}"
        )));
    }
    let dims = center.len();
    let total = u32::try_from(dims)
        .ok()
        .and_then(|d| resolution.checked_pow(d))
        .filter(|&n| n <= budget)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{resolution}^{dims} grid points exceed the budget of {budget}; a coarser grid \
                 covers the space with fewer points, a denser one costs more computation"
            ))
        })?;
    let axes: Vec<Vec<f64>> = (0..dims).map(|d| axis(center[d], extent[d], resolution)).collect();
    let points = (0..total)
        .map(|flat| {
            let mut rem = flat;
            (0..dims)
                .map(|d| {
                    let i = rem % resolution;
                    rem /= resolution;
                    axes[d][i]
                })
                .collect()
        })
        .collect();
    Ok(Meshgrid {
        center: center.to_vec(),
        extent: extent.to_vec(),
        resolution,
        points,
    })
}
