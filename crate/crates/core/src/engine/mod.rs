//! The similarity-aware framework: grid surveys, similarity maps, region
//! classification and best-reproduction queries.

mod classifier;
mod grid;
mod map;
mod session;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{distance_with, normalize_similarities, MetricId};
use crate::representations::{fit_all, RepresentationId};
use crate::trajectory::{BoundaryConstraint, ConstraintKind, Trajectory};

pub use classifier::{fit_points, fit_region_classifier, ClassifierKind, RegionModel};
pub use grid::{build_meshgrid, build_meshgrid_with_budget, Meshgrid, DEFAULT_POINT_BUDGET};
pub use map::{
    accumulated_similarity_difference, combine_best, evaluate_grid, robust_region, CellError,
    EvalOptions, NormalizationScope, SimilarityMap,
};
pub use session::{GridSpec, RegionView, Session, SessionConfig};

/// Predicts the best representation at `point`.
pub fn predict_representation(model: &RegionModel, point: &[f64]) -> Result<RepresentationId> {
    model.predict(point)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub representation: RepresentationId,
    pub raw_distance: Option<f64>,
    pub similarity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproductionResult {
    pub representation: RepresentationId,
    pub trajectory: Trajectory,
    /// Similarity normalized over the candidates evaluated at this point.
    pub similarity: f64,
    pub raw_distance: f64,
    pub candidates: Vec<Candidate>,
}

/// Reproduces from `point` with every representation and returns the one
/// closest to the demo under `metric`. Exact ties go to the earlier
/// representation in precedence order.
pub fn best_reproduction(
    demo: &Trajectory,
    point: &[f64],
    constraint_kind: ConstraintKind,
    reps: &[RepresentationId],
    metric: MetricId,
    options: &EvalOptions,
) -> Result<ReproductionResult> {
    if reps.is_empty() {
        return Err(Error::InvalidArgument("at least one representation is required".into()));
    }
    let constraint = BoundaryConstraint::displaced(demo, constraint_kind, point)?;
    let models = fit_all(reps, demo, &options.config)?;
    let outcomes: Vec<(RepresentationId, Result<(Trajectory, f64)>)> = models
        .iter()
        .map(|m| {
            let out = m.reproduce(&constraint).and_then(|t| {
                let d = distance_with(metric, &t, demo, &options.metric_params)?;
                if d.is_finite() {
                    Ok((t, d))
                } else {
                    Err(Error::Singular(format!("non-finite {metric} distance")))
                }
            });
            (m.id(), out)
        })
        .collect();

    let raw: Vec<f64> = outcomes
        .iter()
        .map(|(_, o)| o.as_ref().map_or(f64::NAN, |(_, d)| *d))
        .collect();
    if raw.iter().all(|d| d.is_nan()) {
        let msg = outcomes
            .iter()
            .filter_map(|(id, o)| o.as_ref().err().map(|e| format!("{id}: {e}")))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::AllFailed(msg));
    }
    let sims = normalize_similarities(&raw)?;
    let mut best: Option<usize> = None;
    for (i, d) in raw.iter().enumerate() {
        if d.is_finite() && best.map_or(true, |b| *d < raw[b]) {
            best = Some(i);
        }
    }
    let best = best.expect("at least one finite distance");
    let candidates = outcomes
        .iter()
        .zip(&sims)
        .map(|((id, o), s)| Candidate {
            representation: *id,
            raw_distance: o.as_ref().ok().map(|(_, d)| *d),
            similarity: *s,
            error: o.as_ref().err().map(ToString::to_string),
        })
        .collect();
    let (id, outcome) = outcomes.into_iter().nth(best).expect("index in range");
    let (trajectory, raw_distance) = outcome.expect("finite distance implies success");
    Ok(ReproductionResult {
        representation: id,
        trajectory,
        similarity: sims[best],
        raw_distance,
        candidates,
    })
}
