//! Metric-bias study: which behaviour (converging JA reproductions or
//! shape-preserving LTE reproductions) does each metric reward?
//!
//! For every shape and every point of a grid around its initial point, JA and
//! LTE reproduce from that point and both are scored against the demo. A cell
//! is inconclusive when `|d_ja − d_lte| / max(d_ja, d_lte) ≤ tie_margin`,
//! otherwise the smaller distance wins.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::GridSpec;
use crate::error::{Error, Result};
use crate::metrics::{distance_with, MetricId, MetricParams};
use crate::representations::{JaModel, LteModel, RepresentationConfig};
use crate::trajectory::{BoundaryConstraint, ConstraintKind, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ja,
    Lte,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "JA")]
    Ja,
    #[serde(rename = "LTE")]
    Lte,
    Either,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Ja => "JA",
            Decision::Lte => "LTE",
            Decision::Either => "Either",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeOutcomes {
    pub shape: String,
    /// Row-major over the grid; `None` where a reproduction failed.
    pub outcomes: Vec<Option<Outcome>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRecord {
    pub metric: MetricId,
    /// Percentages over all counted cells; they sum to 100.
    pub ja_share: f64,
    pub lte_share: f64,
    pub inconclusive_share: f64,
    pub decision: Decision,
    pub cells: usize,
    /// Cells left out because a reproduction or the metric failed.
    pub excluded: usize,
    pub per_shape: Vec<ShapeOutcomes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BiasStudyConfig {
    pub grid_resolution: usize,
    pub extent_fraction: f64,
    pub tie_margin: f64,
    pub decision_threshold: f64,
    /// Also pin the demo's goal. By default only the initial point is
    /// constrained, so LTE reproduces a translated copy of the demo.
    pub pin_goal: bool,
    pub params: RepresentationConfig,
    pub metric_params: MetricParams,
}

impl Default for BiasStudyConfig {
    fn default() -> Self {
        BiasStudyConfig {
            grid_resolution: 9,
            extent_fraction: 0.25,
            tie_margin: 0.10,
            decision_threshold: 0.5,
            pin_goal: false,
            params: RepresentationConfig::default(),
            metric_params: MetricParams::default(),
        }
    }
}

/// Classifies one cell from its two raw distances.
pub fn cell_outcome(d_ja: f64, d_lte: f64, tie_margin: f64) -> Outcome {
    let larger = d_ja.max(d_lte);
    if larger == 0.0 || (d_ja - d_lte).abs() / larger <= tie_margin {
        Outcome::Inconclusive
    } else if d_ja < d_lte {
        Outcome::Ja
    } else {
        Outcome::Lte
    }
}

/// JA wins if its share exceeds `threshold` (a fraction) and the LTE share;
/// likewise for LTE; anything else is `Either`.
pub fn categorize_metric(record: &BiasRecord, threshold: f64) -> Decision {
    decide(record.ja_share, record.lte_share, threshold)
}

fn decide(ja_share: f64, lte_share: f64, threshold: f64) -> Decision {
    let cut = threshold * 100.0;
    if ja_share > cut && ja_share > lte_share {
        Decision::Ja
    } else if lte_share > cut && lte_share > ja_share {
        Decision::Lte
    } else {
        Decision::Either
    }
}

pub fn run_bias_study(
    corpus: &[(String, Trajectory)],
    metric: MetricId,
    config: &BiasStudyConfig,
) -> Result<BiasRecord> {
    Ok(run_bias_study_multi(corpus, &[metric], config)?.remove(0))
}

/// Runs the study for several metrics, sharing the reproductions between
/// them.
pub fn run_bias_study_multi(
    corpus: &[(String, Trajectory)],
    metrics: &[MetricId],
    config: &BiasStudyConfig,
) -> Result<Vec<BiasRecord>> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("the shape corpus is empty".into()));
    }
    if metrics.is_empty() {
        return Err(Error::InvalidArgument("no metrics requested".into()));
    }
    if !(config.tie_margin > 0.0 && config.tie_margin < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tie margin must be in (0, 1), got {}",
            config.tie_margin
        )));
    }
    let spec = GridSpec {
        resolution: config.grid_resolution,
        extent_fraction: config.extent_fraction,
        ..GridSpec::default()
    };

    // distances[shape][point][metric] = (d_ja, d_lte)
    let per_shape: Vec<Vec<Option<Vec<(f64, f64)>>>> = corpus
        .iter()
        .map(|(name, demo)| {
            let grid = spec.build(demo, ConstraintKind::Initial)?;
            let ja = JaModel::new(demo.clone(), config.params.ja_lambda, config.params.constraint_weight)?;
            let lte = LteModel::new(demo.clone(), config.params.constraint_weight)?;
            let cells = grid
                .points()
                .par_iter()
                .map(|p| -> Result<Vec<(f64, f64)>> {
                    let c = if config.pin_goal {
                        BoundaryConstraint::displaced(demo, ConstraintKind::Initial, p)?
                    } else {
                        BoundaryConstraint::initial(p.to_vec())
                    };
                    let rj = ja.reproduce(&c)?;
                    let rl = lte.reproduce(&c)?;
                    metrics
                        .iter()
                        .map(|&m| {
                            let dj = distance_with(m, &rj, demo, &config.metric_params)?;
                            let dl = distance_with(m, &rl, demo, &config.metric_params)?;
                            Ok((dj, dl))
                        })
                        .collect()
                })
                .map(|r| match r {
                    Ok(v) if v.iter().all(|(a, b)| a.is_finite() && b.is_finite()) => Some(v),
                    Ok(_) => None,
                    Err(e) => {
                        log::warn!("{name}: cell excluded: {e}");
                        None
                    }
                })
                .collect();
            Ok(cells)
        })
        .collect::<Result<_>>()?;

    metrics
        .iter()
        .enumerate()
        .map(|(mi, &metric)| {
            let mut counts = [0usize; 3];
            let mut excluded = 0;
            let shapes = corpus
                .iter()
                .zip(&per_shape)
                .map(|((name, _), cells)| {
                    let outcomes = cells
                        .iter()
                        .map(|cell| {
                            let o = cell.as_ref().map(|v| cell_outcome(v[mi].0, v[mi].1, config.tie_margin));
                            match o {
                                Some(Outcome::Ja) => counts[0] += 1,
                                Some(Outcome::Lte) => counts[1] += 1,
                                Some(Outcome::Inconclusive) => counts[2] += 1,
                                None => excluded += 1,
                            }
                            o
                        })
                        .collect();
                    ShapeOutcomes {
                        shape: name.clone(),
                        outcomes,
                    }
                })
                .collect();
            let total: usize = counts.iter().sum();
            if total == 0 {
                return Err(Error::AllFailed(format!("every cell failed for {metric}")));
            }
            let pct = |c: usize| 100.0 * c as f64 / total as f64;
            let (ja_share, lte_share) = (pct(counts[0]), pct(counts[1]));
            Ok(BiasRecord {
                metric,
                ja_share,
                lte_share,
                inconclusive_share: 100.0 - ja_share - lte_share,
                decision: decide(ja_share, lte_share, config.decision_threshold),
                cells: total,
                excluded,
                per_shape: shapes,
            })
        })
        .collect()
}

/// `Metric,JA,LTE,Inconclusive,Decision` with percentages to two decimals.
pub fn to_csv(records: &[BiasRecord]) -> String {
    let mut out = String::from("Metric,JA,LTE,Inconclusive,Decision\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{:.2},{:.2},{:.2},{}",
            r.metric.display_name(),
            r.ja_share,
            r.lte_share,
            r.inconclusive_share,
            r.decision.as_str()
        );
    }
    out
}

pub fn to_markdown(records: &[BiasRecord]) -> String {
    let mut out = String::from("| Metric | JA | LTE | Inconclusive | Decision |\n|---|---|---|---|---|\n");
    for r in records {
        let _ = writeln!(
            out,
            "| {} | {:.2}% | {:.2}% | {:.2}% | {} |",
            r.metric.display_name(),
            r.ja_share,
            r.lte_share,
            r.inconclusive_share,
            r.decision.as_str()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(ja: f64, lte: f64, inc: f64) -> BiasRecord {
        BiasRecord {
            metric: MetricId::Dtw,
            ja_share: ja,
            lte_share: lte,
            inconclusive_share: inc,
            decision: Decision::Either,
            cells: 0,
            excluded: 0,
            per_shape: Vec::new(),
        }
    }

    #[test]
    fn decisions_from_published_rows() {
        assert_eq!(categorize_metric(&record(97.58, 0.0, 2.42), 0.5), Decision::Ja);
        assert_eq!(categorize_metric(&record(0.0, 0.09, 99.91), 0.5), Decision::Either);
        assert_eq!(categorize_metric(&record(33.0, 33.0, 34.0), 0.5), Decision::Either);
        assert_eq!(categorize_metric(&record(7.36, 65.34, 27.30), 0.5), Decision::Lte);
    }

    #[test]
    fn tie_rule() {
        assert_eq!(cell_outcome(1.0, 1.05, 0.1), Outcome::Inconclusive);
        assert_eq!(cell_outcome(1.0, 2.0, 0.1), Outcome::Ja);
        assert_eq!(cell_outcome(2.0, 1.0, 0.1), Outcome::Lte);
        assert_eq!(cell_outcome(0.0, 0.0, 0.1), Outcome::Inconclusive);
    }

    #[test]
    fn tables_have_expected_columns() {
        let r = BiasRecord { decision: Decision::Ja, ..record(97.58, 0.0, 2.42) };
        assert_eq!(to_csv(&[r.clone()]), "Metric,JA,LTE,Inconclusive,Decision\nDTW,97.58,0.00,2.42,JA\n");
        assert!(to_markdown(&[r]).contains("| DTW | 97.58% | 0.00% | 2.42% | JA |"));
    }

    #[test]
    fn validation() {
        let corpus = vec![("s".to_string(), crate::shapes::s_curve(40))];
        let bad = BiasStudyConfig { tie_margin: 0.0, ..Default::default() };
        assert!(run_bias_study(&corpus, MetricId::Dtw, &bad).is_err());
        assert!(run_bias_study(&[], MetricId::Dtw, &BiasStudyConfig::default()).is_err());
    }
}
