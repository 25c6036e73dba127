//! Trajectory dissimilarity measures and the min-max normalization that turns
//! a set of raw distances into similarity scores in `[0, 1]`.
//!
//! Every measure returns 0 for identical inputs and is invariant under a
//! common rigid translation of both curves.

mod alignment;
mod pointwise;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

pub use alignment::{discrete_frechet, dtw, hausdorff, partial_curve_mapping};
pub use pointwise::{
    area_between, curvature_comparison, curve_length_difference, endpoint_convergence,
    menger_curvature, swept_error_area, sum_squared_error, total_distance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetricId {
    #[serde(rename = "area")]
    Area,
    #[serde(rename = "curvature")]
    CurvatureComparison,
    #[serde(rename = "curvelength")]
    CurveLength,
    #[serde(rename = "dtw")]
    Dtw,
    #[serde(rename = "endpoint")]
    EndpointConvergence,
    #[serde(rename = "frechet")]
    Frechet,
    #[serde(rename = "hausdorff")]
    Hausdorff,
    #[serde(rename = "pcm")]
    Pcm,
    #[serde(rename = "sea")]
    Sea,
    #[serde(rename = "sse")]
    Sse,
    #[serde(rename = "totaldist")]
    TotalDistance,
}

impl MetricId {
    pub const ALL: [MetricId; 11] = [
        MetricId::Area,
        MetricId::CurvatureComparison,
        MetricId::CurveLength,
        MetricId::Dtw,
        MetricId::EndpointConvergence,
        MetricId::Frechet,
        MetricId::Hausdorff,
        MetricId::Pcm,
        MetricId::Sea,
        MetricId::Sse,
        MetricId::TotalDistance,
    ];

    /// Stable lowercase identifier used on the command line and over HTTP.
    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::Area => "area",
            MetricId::CurvatureComparison => "curvature",
            MetricId::CurveLength => "curvelength",
            MetricId::Dtw => "dtw",
            MetricId::EndpointConvergence => "endpoint",
            MetricId::Frechet => "frechet",
            MetricId::Hausdorff => "hausdorff",
            MetricId::Pcm => "pcm",
            MetricId::Sea => "sea",
            MetricId::Sse => "sse",
            MetricId::TotalDistance => "totaldist",
        }
    }

    /// Human-readable name as used in result tables.
    pub fn display_name(self) -> &'static str {
        match self {
            MetricId::Area => "Area",
            MetricId::CurvatureComparison => "Curvature Comparison",
            MetricId::CurveLength => "Curve Length",
            MetricId::Dtw => "DTW",
            MetricId::EndpointConvergence => "Endpoint Convergence",
            MetricId::Frechet => "Frechet",
            MetricId::Hausdorff => "Hausdorff",
            MetricId::Pcm => "PCM",
            MetricId::Sea => "SEA",
            MetricId::Sse => "SSE",
            MetricId::TotalDistance => "Total Distance",
        }
    }

    pub fn valid_ids() -> String {
        MetricId::ALL.map(MetricId::as_str).join(", ")
    }

    /// Parses a comma-separated list; an empty list means all metrics.
    pub fn parse_list(s: &str) -> Result<Vec<MetricId>> {
        let ids: Vec<MetricId> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        Ok(if ids.is_empty() { MetricId::ALL.to_vec() } else { ids })
    }

    /// Metrics that compare samples index by index.
    pub fn is_index_aligned(self) -> bool {
        matches!(
            self,
            MetricId::Sse
                | MetricId::TotalDistance
                | MetricId::Sea
                | MetricId::CurvatureComparison
                | MetricId::EndpointConvergence
        )
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        MetricId::ALL
            .into_iter()
            .find(|m| m.as_str() == lower)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// Tunable parts of the metric definitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricParams {
    /// Fraction of trailing samples averaged by endpoint convergence.
    pub endpoint_fraction: f64,
    /// Number of candidate offsets scanned by partial curve mapping.
    pub pcm_offsets: usize,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams {
            endpoint_fraction: 0.1,
            pcm_offsets: 101,
        }
    }
}

pub fn distance(metric: MetricId, a: &Trajectory, b: &Trajectory) -> Result<f64> {
    distance_with(metric, a, b, &MetricParams::default())
}

pub fn distance_with(
    metric: MetricId,
    a: &Trajectory,
    b: &Trajectory,
    params: &MetricParams,
) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    Ok(match metric {
        MetricId::Frechet => discrete_frechet(a, b),
        MetricId::Dtw => dtw(a, b),
        MetricId::Hausdorff => hausdorff(a, b),
        MetricId::Sse => sum_squared_error(a, b)?,
        MetricId::TotalDistance => total_distance(a, b)?,
        MetricId::Sea => swept_error_area(a, b)?,
        MetricId::Area => area_between(a, b)?,
        MetricId::CurveLength => curve_length_difference(a, b),
        MetricId::CurvatureComparison => curvature_comparison(a, b)?,
        MetricId::EndpointConvergence => endpoint_convergence(a, b, params.endpoint_fraction)?,
        MetricId::Pcm => partial_curve_mapping(a, b, params.pcm_offsets)?,
    })
}

/// Min-max normalization: the smallest distance maps to 1 and the largest to
/// 0. Non-finite entries (failed evaluations) map to 0. If every finite value
/// is equal, all of them map to 1.
pub fn normalize_similarities(distances: &[f64]) -> Result<Vec<f64>> {
    if distances.is_empty() {
        return Err(Error::InvalidArgument("cannot normalize an empty set".into()));
    }
    let finite = distances.iter().cloned().filter(|d| d.is_finite());
    let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
        (lo.min(d), hi.max(d))
    });
    if !min.is_finite() {
        return Err(Error::InvalidArgument("no finite distance to normalize".into()));
    }
    let span = max - min;
    Ok(distances
        .iter()
        .map(|&d| {
            if !d.is_finite() {
                0.0
            } else if span == 0.0 {
                1.0
            } else {
                ((max - d) / span).clamp(0.0, 1.0)
            }
        })
        .collect())
}
