use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{distance_with, normalize_similarities, MetricId, MetricParams};
use crate::representations::{fit_all, Representation, RepresentationConfig, RepresentationId};
use crate::trajectory::{BoundaryConstraint, ConstraintKind, Trajectory};

use super::grid::Meshgrid;

/// Which raw distances are normalized together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationScope {
    /// One normalization over every (representation, point) cell.
    #[default]
    Joint,
    /// Each representation's map is normalized on its own.
    PerRepresentation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub representation: RepresentationId,
    pub point: usize,
    pub message: String,
}

/// Normalized similarity of every representation at every grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMap {
    pub grid: Meshgrid,
    pub metric: MetricId,
    pub constraint_kind: ConstraintKind,
    pub normalization: NormalizationScope,
    /// Representations in precedence order; indexes the outer dimension of
    /// `scores` and `raw`.
    pub representations: Vec<RepresentationId>,
    pub scores: Vec<Vec<f64>>,
    /// Raw distances; `None` where the reproduction or metric failed.
    pub raw: Vec<Vec<Option<f64>>>,
    pub best_label: Vec<RepresentationId>,
    pub best_score: Vec<f64>,
    /// Points where every representation failed.
    pub failed: Vec<bool>,
    pub errors: Vec<CellError>,
}

impl SimilarityMap {
    /// Scores of one representation, if it is part of the map.
    pub fn scores_of(&self, rep: RepresentationId) -> Option<&[f64]> {
        self.representations
            .iter()
            .position(|r| *r == rep)
            .map(|i| self.scores[i].as_slice())
    }

    /// Rebuilds the normalized scores and the per-point argmax from `raw`.
    pub fn from_raw(
        grid: Meshgrid,
        metric: MetricId,
        constraint_kind: ConstraintKind,
        normalization: NormalizationScope,
        representations: Vec<RepresentationId>,
        raw: Vec<Vec<Option<f64>>>,
        errors: Vec<CellError>,
    ) -> Result<Self> {
        let n = grid.len();
        let as_f64 = |v: &Option<f64>| v.unwrap_or(f64::NAN);
        let scores = match normalization {
            NormalizationScope::Joint => {
                let flat: Vec<f64> = raw.iter().flatten().map(as_f64).collect();
                let norm = normalize_or_zero(&flat)?;
                norm.chunks(n).map(<[f64]>::to_vec).collect()
            }
            NormalizationScope::PerRepresentation => raw
                .iter()
                .map(|row| normalize_or_zero(&row.iter().map(as_f64).collect::<Vec<_>>()))
                .collect::<Result<Vec<_>>>()?,
        };
        let mut map = SimilarityMap {
            grid,
            metric,
            constraint_kind,
            normalization,
            representations,
            scores,
            raw,
            best_label: Vec::new(),
            best_score: Vec::new(),
            failed: Vec::new(),
            errors,
        };
        let (labels, best) = combine_best(&map);
        map.failed = (0..n).map(|p| map.raw.iter().all(|row| row[p].is_none())).collect();
        map.best_label = labels;
        map.best_score = best;
        Ok(map)
    }
}

fn normalize_or_zero(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().all(|v| !v.is_finite()) {
        return Ok(vec![0.0; values.len()]);
    }
    normalize_similarities(values)
}

/// Inputs of a grid evaluation besides the demo and the grid.
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub config: RepresentationConfig,
    pub metric_params: MetricParams,
    pub normalization: NormalizationScope,
    /// Worker threads; `None` uses the global pool, `Some(1)` runs inline.
    pub workers: Option<usize>,
}

/// Reproduces the demo from every grid point with every representation and
/// scores the result against the demo.
///
/// The grid point replaces the endpoint selected by `constraint_kind`; the
/// other endpoint stays at the demo's. A failure in one cell is recorded and
/// scores 0 instead of aborting the survey.
pub fn evaluate_grid(
    demo: &Trajectory,
    grid: &Meshgrid,
    reps: &[RepresentationId],
    metric: MetricId,
    constraint_kind: ConstraintKind,
    options: &EvalOptions,
) -> Result<SimilarityMap> {
    if reps.is_empty() {
        return Err(Error::InvalidArgument("at least one representation is required".into()));
    }
    if grid.dims() != demo.dims() {
        return Err(Error::DimensionMismatch {
            expected: demo.dims(),
            actual: grid.dims(),
        });
    }
    if constraint_kind == ConstraintKind::Both {
        return Err(Error::InvalidArgument(
            "grid evaluation moves either the initial or the final point".into(),
        ));
    }
    let models = fit_all(reps, demo, &options.config)?;
    let ids: Vec<RepresentationId> = models.iter().map(Representation::id).collect();
    let n = grid.len();
    let cells: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|r| (0..n).map(move |p| (r, p)))
        .collect();
    let eval = |&(r, p): &(usize, usize)| -> Result<f64> {
        let constraint = BoundaryConstraint::displaced(demo, constraint_kind, &grid.points()[p])?;
        let repro = models[r].reproduce(&constraint)?;
        let d = distance_with(metric, &repro, demo, &options.metric_params)?;
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Singular(format!("non-finite {metric} distance")))
        }
    };
    let outcomes: Vec<Result<f64>> = match options.workers {
        Some(1) => cells.iter().map(eval).collect(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {w} workers: {e}")))?
            .install(|| cells.par_iter().map(eval).collect()),
        None => cells.par_iter().map(eval).collect(),
    };

    let mut raw = vec![vec![None; n]; models.len()];
    let mut errors = Vec::new();
    for (&(r, p), outcome) in cells.iter().zip(outcomes) {
        match outcome {
            Ok(d) => raw[r][p] = Some(d),
            Err(e) => errors.push(CellError {
                representation: ids[r],
                point: p,
                message: e.to_string(),
            }),
        }
    }
    SimilarityMap::from_raw(
        grid.clone(),
        metric,
        constraint_kind,
        options.normalization,
        ids,
        raw,
        errors,
    )
}

/// Per-point best representation and its score. Exact ties go to the
/// representation earliest in precedence order (JA, LTE, DMP).
pub fn combine_best(map: &SimilarityMap) -> (Vec<RepresentationId>, Vec<f64>) {
    let n = map.grid.len();
    (0..n)
        .map(|p| {
            let mut best = 0;
            for r in 1..map.representations.len() {
                if map.scores[r][p] > map.scores[best][p] {
                    best = r;
                }
            }
            (map.representations[best], map.scores[best][p])
        })
        .unzip()
}

/// Grid points whose best score reaches `threshold` (inclusive).
pub fn robust_region(map: &SimilarityMap, threshold: f64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "robustness threshold must be in [0, 1], got {threshold}"
        )));
    }
    Ok(map.best_score.iter().map(|&s| s >= threshold).collect())
}

/// Sum over grid points of the gap between the best score and `rep`'s score.
pub fn accumulated_similarity_difference(map: &SimilarityMap, rep: RepresentationId) -> Result<f64> {
    let scores = map
        .scores_of(rep)
        .ok_or_else(|| Error::UnknownRepresentation(format!("{rep} is not part of this map")))?;
    Ok(map
        .best_score
        .iter()
        .zip(scores)
        .map(|(best, s)| best - s)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::grid::build_meshgrid;
    use crate::shapes;

    fn synthetic(reps: Vec<RepresentationId>, raw: Vec<Vec<Option<f64>>>) -> SimilarityMap {
        let n = raw[0].len();
        let grid = build_meshgrid(&[0.0], &[1.0], n).unwrap();
        SimilarityMap::from_raw(
            grid,
            MetricId::Frechet,
            ConstraintKind::Initial,
            NormalizationScope::Joint,
            reps,
            raw,
            Vec::new(),
        )
        .unwrap()
    }

    fn with_scores(reps: Vec<RepresentationId>, scores: Vec<Vec<f64>>) -> SimilarityMap {
        let mut map = synthetic(reps, scores.iter().map(|r| r.iter().map(|_| Some(1.0)).collect()).collect());
        map.scores = scores;
        let (l, s) = combine_best(&map);
        map.best_label = l;
        map.best_score = s;
        map
    }

    use RepresentationId::{Dmp, Ja, Lte};

    #[test]
    fn argmax_and_ties() {
        let map = with_scores(vec![Ja, Lte, Dmp], vec![vec![0.2, 0.7, 0.0], vec![0.9, 0.7, 0.0], vec![0.5, 0.1, 0.0]]);
        let (labels, scores) = combine_best(&map);
        assert_eq!(labels, vec![Lte, Ja, Ja]);
        assert_eq!(scores, vec![0.9, 0.7, 0.0]);
    }

    #[test]
    fn failed_points_are_flagged() {
        let map = synthetic(vec![Ja, Lte], vec![vec![Some(1.0), None], vec![Some(2.0), None]]);
        assert_eq!(map.failed, vec![false, true]);
        assert_eq!(map.best_label[1], Ja);
        assert_eq!(map.best_score[1], 0.0);
    }

    #[test]
    fn robust_region_is_inclusive() {
        let map = with_scores(vec![Ja], vec![vec![0.8, 0.7, 0.75]]);
        assert_eq!(robust_region(&map, 0.75).unwrap(), vec![true, false, true]);
        assert_eq!(robust_region(&map, 0.0).unwrap(), vec![true; 3]);
        assert!(robust_region(&map, 1.5).is_err());
    }

    #[test]
    fn robust_one_marks_session_maximum() {
        let map = synthetic(vec![Ja, Lte], vec![vec![Some(1.0), Some(3.0), Some(2.0)], vec![Some(1.5), Some(4.0), Some(1.0)]]);
        assert_eq!(robust_region(&map, 1.0).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn delta_arithmetic() {
        let n = 81;
        let map = with_scores(vec![Ja, Lte], vec![vec![0.5; n], vec![0.6; n]]);
        let d = accumulated_similarity_difference(&map, Ja).unwrap();
        assert!((d - 8.1).abs() < 1e-9);
        assert_eq!(accumulated_similarity_difference(&map, Lte).unwrap(), 0.0);
        assert!(accumulated_similarity_difference(&map, Dmp).is_err());
        let single = with_scores(vec![Lte], vec![vec![0.3; 5]]);
        assert_eq!(accumulated_similarity_difference(&single, Lte).unwrap(), 0.0);
    }

    #[test]
    fn single_representation_wins_everywhere() {
        let demo = shapes::s_curve(60);
        let grid = build_meshgrid(demo.first(), &[0.1, 0.1], 3).unwrap();
        let map = evaluate_grid(&demo, &grid, &[Lte], MetricId::Frechet, ConstraintKind::Initial, &EvalOptions::default()).unwrap();
        assert!(map.best_label.iter().all(|l| *l == Lte));
        assert_eq!(map.scores.len(), 1);
        assert_eq!(map.scores[0].len(), 9);
    }

    #[test]
    fn per_representation_scope_normalizes_rows() {
        let demo = shapes::s_curve(60);
        let grid = build_meshgrid(demo.first(), &[0.1, 0.1], 3).unwrap();
        let options = EvalOptions { normalization: NormalizationScope::PerRepresentation, ..Default::default() };
        let map = evaluate_grid(&demo, &grid, &[Ja, Lte], MetricId::Sse, ConstraintKind::Initial, &options).unwrap();
        for row in &map.scores {
            assert_eq!(row.iter().cloned().fold(0.0, f64::max), 1.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let demo = shapes::s_curve(30);
        let grid = build_meshgrid(demo.first(), &[0.1, 0.1], 3).unwrap();
        let opts = EvalOptions::default();
        assert!(evaluate_grid(&demo, &grid, &[], MetricId::Sse, ConstraintKind::Initial, &opts).is_err());
        assert!(evaluate_grid(&demo, &grid, &[Ja], MetricId::Sse, ConstraintKind::Both, &opts).is_err());
        let grid3 = build_meshgrid(&[0.0; 3], &[0.1; 3], 2).unwrap();
        assert!(evaluate_grid(&demo, &grid3, &[Ja], MetricId::Sse, ConstraintKind::Initial, &opts).is_err());
    }
}
