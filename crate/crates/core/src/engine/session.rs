use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{MetricId, MetricParams};
use crate::representations::{RepresentationConfig, RepresentationId};
use crate::trajectory::{ConstraintKind, Trajectory};

use super::classifier::{fit_region_classifier, ClassifierKind, RegionModel};
use super::grid::{build_meshgrid, Meshgrid};
use super::map::{evaluate_grid, robust_region, EvalOptions, NormalizationScope, SimilarityMap};
use super::{best_reproduction, ReproductionResult};

/// Grid placement. Missing fields are derived from the demonstration: the
/// center defaults to the moved endpoint and the half-width to
/// `extent_fraction` of the bounding-box diagonal in every dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub center: Option<Vec<f64>>,
    pub extent: Option<Vec<f64>>,
    pub resolution: usize,
    pub extent_fraction: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            center: None,
            extent: None,
            resolution: 9,
            extent_fraction: 0.25,
        }
    }
}

impl GridSpec {
    pub fn build(&self, demo: &Trajectory, kind: ConstraintKind) -> Result<Meshgrid> {
        let center = match &self.center {
            Some(c) => c.clone(),
            None => match kind {
                ConstraintKind::Final => demo.last().to_vec(),
                _ => demo.first().to_vec(),
            },
        };
        let extent = match &self.extent {
            Some(e) if e.len() == 1 => vec![e[0]; demo.dims()],
            Some(e) => e.clone(),
            None => {
                let diag = demo.bbox_diagonal();
                if diag == 0.0 {
                    return Err(Error::InvalidArgument(
                        "cannot derive a grid extent from a motionless demonstration".into(),
                    ));
                }
                vec![self.extent_fraction * diag; demo.dims()]
            }
        };
        if center.len() != demo.dims() || extent.len() != demo.dims() {
            return Err(Error::DimensionMismatch {
                expected: demo.dims(),
                actual: if center.len() != demo.dims() { center.len() } else { extent.len() },
            });
        }
        build_meshgrid(&center, &extent, self.resolution)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub representations: Vec<RepresentationId>,
    pub metric: MetricId,
    pub constraint_kind: ConstraintKind,
    pub grid: GridSpec,
    pub normalization: NormalizationScope,
    pub classifier: ClassifierKind,
    pub params: RepresentationConfig,
    pub metric_params: MetricParams,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            representations: RepresentationId::ALL.to_vec(),
            metric: MetricId::Frechet,
            constraint_kind: ConstraintKind::Initial,
            grid: GridSpec::default(),
            normalization: NormalizationScope::Joint,
            classifier: ClassifierKind::default(),
            params: RepresentationConfig::default(),
            metric_params: MetricParams::default(),
        }
    }
}

impl SessionConfig {
    /// Sorts and deduplicates the representations and pins the grid center
    /// and extent derived from `demo`, so equivalent requests compare equal.
    pub fn normalized(mut self, demo: &Trajectory) -> Result<Self> {
        self.representations.sort();
        self.representations.dedup();
        let grid = self.grid.build(demo, self.constraint_kind)?;
        self.grid.center = Some(grid.center().to_vec());
        self.grid.extent = Some(grid.extent().to_vec());
        Ok(self)
    }

    pub fn eval_options(&self, workers: Option<usize>) -> EvalOptions {
        EvalOptions {
            config: self.params,
            metric_params: self.metric_params,
            normalization: self.normalization,
            workers,
        }
    }
}

/// A computed survey: the demonstration, its configuration, the similarity
/// map and the trained region classifier.
///
/// The id is a digest of the demonstration and configuration, so identical
/// inputs give identical documents regardless of which front end computed
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub config: SessionConfig,
    pub demo: Trajectory,
    pub map: SimilarityMap,
    pub region: RegionModel,
}

/// Labels of the combined map plus an optional robustness mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionView {
    pub resolution: usize,
    pub center: Vec<f64>,
    pub extent: Vec<f64>,
    pub representations: Vec<RepresentationId>,
    pub labels: Vec<RepresentationId>,
    pub best_score: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robust_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robust_mask: Option<Vec<bool>>,
}

fn digest(demo: &Trajectory, config: &SessionConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(demo).expect("trajectory serializes"));
    hasher.update(serde_json::to_vec(config).expect("config serializes"));
    hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

impl Session {
    /// Digest of the demonstration and the normalized configuration.
    pub fn id_for(demo: &Trajectory, config: &SessionConfig) -> Result<String> {
        let config = config.clone().normalized(demo)?;
        Ok(digest(demo, &config))
    }

    pub fn compute(demo: Trajectory, config: SessionConfig, workers: Option<usize>) -> Result<Self> {
        let config = config.normalized(&demo)?;
        let grid = config.grid.build(&demo, config.constraint_kind)?;
        let map = evaluate_grid(
            &demo,
            &grid,
            &config.representations,
            config.metric,
            config.constraint_kind,
            &config.eval_options(workers),
        )?;
        let region = fit_region_classifier(&map, config.classifier)?;
        Ok(Session {
            id: digest(&demo, &config),
            config,
            demo,
            map,
            region,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("session serializes")
    }

    pub fn region_view(&self, robust: Option<f64>) -> Result<RegionView> {
        let robust_mask = robust.map(|t| robust_region(&self.map, t)).transpose()?;
        Ok(RegionView {
            resolution: self.map.grid.resolution(),
            center: self.map.grid.center().to_vec(),
            extent: self.map.grid.extent().to_vec(),
            representations: self.map.representations.clone(),
            labels: self.map.best_label.clone(),
            best_score: self.map.best_score.clone(),
            robust_threshold: robust,
            robust_mask,
        })
    }

    /// Best reproduction at `point` under the session's settings.
    pub fn reproduce(&self, point: &[f64]) -> Result<ReproductionResult> {
        best_reproduction(
            &self.demo,
            point,
            self.config.constraint_kind,
            &self.config.representations,
            self.config.metric,
            &self.config.eval_options(Some(1)),
        )
    }

    pub fn predict(&self, point: &[f64]) -> Result<RepresentationId> {
        self.region.predict(point)
    }
}
