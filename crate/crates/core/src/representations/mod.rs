//! Single-demonstration LfD representations. Each turns a demonstration plus
//! a boundary constraint into a reproduction with the demo's length.

mod dmp;
mod ja;
mod lte;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{BoundaryConstraint, ConstraintKind, Trajectory};

pub use dmp::{DmpConfig, DmpModel};
pub use ja::JaModel;
pub use lte::LteModel;

pub(crate) const RANK_TOLERANCE: f64 = 1e-14;

/// Representation labels. Declaration order is the tie-breaking precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationId {
    Ja,
    Lte,
    Dmp,
}

impl RepresentationId {
    pub const ALL: [RepresentationId; 3] =
        [RepresentationId::Ja, RepresentationId::Lte, RepresentationId::Dmp];

    pub fn as_str(self) -> &'static str {
        match self {
            RepresentationId::Ja => "ja",
            RepresentationId::Lte => "lte",
            RepresentationId::Dmp => "dmp",
        }
    }

    /// Parses a comma-separated list, deduplicated and sorted by precedence.
    pub fn parse_list(s: &str) -> Result<Vec<RepresentationId>> {
        let mut out: Vec<RepresentationId> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for RepresentationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RepresentationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ja" => Ok(RepresentationId::Ja),
            "lte" => Ok(RepresentationId::Lte),
            "dmp" => Ok(RepresentationId::Dmp),
            other => Err(Error::UnknownRepresentation(other.to_string())),
        }
    }
}

/// Parameters shared by every session. The same values are used for all
/// demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepresentationConfig {
    pub ja_lambda: f64,
    /// Weight of the endpoint rows in the LTE and JA systems.
    pub constraint_weight: f64,
    pub dmp: DmpConfig,
}

impl Default for RepresentationConfig {
    fn default() -> Self {
        RepresentationConfig {
            ja_lambda: 20.0,
            constraint_weight: 1e6,
            dmp: DmpConfig::default(),
        }
    }
}

/// A fitted representation.
#[derive(Debug)]
pub enum Representation {
    Ja(JaModel),
    Lte(LteModel),
    Dmp(DmpModel),
}

impl Representation {
    pub fn fit(id: RepresentationId, demo: &Trajectory, config: &RepresentationConfig) -> Result<Self> {
        Ok(match id {
            RepresentationId::Ja => {
                Representation::Ja(JaModel::new(demo.clone(), config.ja_lambda, config.constraint_weight)?)
            }
            RepresentationId::Lte => {
                Representation::Lte(LteModel::new(demo.clone(), config.constraint_weight)?)
            }
            RepresentationId::Dmp => Representation::Dmp(DmpModel::fit(demo.clone(), &config.dmp)?),
        })
    }

    pub fn id(&self) -> RepresentationId {
        match self {
            Representation::Ja(_) => RepresentationId::Ja,
            Representation::Lte(_) => RepresentationId::Lte,
            Representation::Dmp(_) => RepresentationId::Dmp,
        }
    }

    pub fn reproduce(&self, constraint: &BoundaryConstraint) -> Result<Trajectory> {
        match self {
            Representation::Ja(m) => m.reproduce(constraint),
            Representation::Lte(m) => m.reproduce(constraint),
            Representation::Dmp(m) => m.reproduce(constraint),
        }
    }
}

/// Fits every requested representation on one demonstration, in precedence
/// order.
pub fn fit_all(
    ids: &[RepresentationId],
    demo: &Trajectory,
    config: &RepresentationConfig,
) -> Result<Vec<Representation>> {
    let mut ids = ids.to_vec();
    ids.sort();
    ids.dedup();
    ids.into_iter().map(|id| Representation::fit(id, demo, config)).collect()
}

pub(crate) fn kind_slot(kind: ConstraintKind) -> usize {
    match kind {
        ConstraintKind::Initial => 0,
        ConstraintKind::Final => 1,
        ConstraintKind::Both => 2,
    }
}

pub(crate) fn stack_rhs(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use proptest::prelude::*;

    fn all_models(demo: &Trajectory) -> Vec<Representation> {
        fit_all(&RepresentationId::ALL, demo, &RepresentationConfig::default()).unwrap()
    }

    #[test]
    fn parse_ids() {
        assert_eq!(
            RepresentationId::parse_list("dmp, lte,ja,lte").unwrap(),
            vec![RepresentationId::Ja, RepresentationId::Lte, RepresentationId::Dmp]
        );
        assert!(RepresentationId::parse_list("lte,gmm").is_err());
    }

    #[test]
    fn outputs_have_demo_shape_and_hit_endpoints() {
        let demo = shapes::s_curve(100);
        let diag = demo.bbox_diagonal();
        let c = BoundaryConstraint::displaced(&demo, ConstraintKind::Initial, &[0.3, 0.1]).unwrap();
        for model in all_models(&demo) {
            let out = model.reproduce(&c).unwrap();
            assert_eq!((out.len(), out.dims()), (demo.len(), demo.dims()));
            let start_err = crate::trajectory::distance(out.first(), &[0.3, 0.1]);
            let goal_err = crate::trajectory::distance(out.last(), demo.last());
            assert!(start_err <= 1e-6 * diag, "{}: start off by {start_err}", model.id());
            let goal_tol = if model.id() == RepresentationId::Dmp { 1e-2 } else { 1e-6 };
            assert!(goal_err <= goal_tol * diag, "{}: goal off by {goal_err}", model.id());
        }
    }

    #[test]
    fn reproduction_is_deterministic() {
        let demo = shapes::loop_shape(100);
        let c = BoundaryConstraint::displaced(&demo, ConstraintKind::Final, &[0.9, 0.2]).unwrap();
        for model in all_models(&demo) {
            let a = model.reproduce(&c).unwrap();
            let b = model.reproduce(&c).unwrap();
            assert_eq!(a.as_flat(), b.as_flat());
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let demo = shapes::s_curve(30);
        let c = BoundaryConstraint::initial(vec![0.0, 0.0, 0.0]);
        for model in all_models(&demo) {
            assert!(matches!(model.reproduce(&c), Err(Error::DimensionMismatch { .. })));
        }
    }

    #[test]
    fn works_in_three_dimensions() {
        let demo = shapes::helix(60);
        let c = BoundaryConstraint::displaced(&demo, ConstraintKind::Initial, &[0.2, -0.1, 0.05]).unwrap();
        for model in all_models(&demo) {
            let out = model.reproduce(&c).unwrap();
            assert_eq!(out.dims(), 3);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn translation_equivariance(vx in -2.0f64..2.0, vy in -2.0f64..2.0, px in -0.3f64..0.3, py in -0.3f64..0.3) {
            let demo = shapes::s_curve(60);
            let start = [demo.first()[0] + px, demo.first()[1] + py];
            let c = BoundaryConstraint::displaced(&demo, ConstraintKind::Initial, &start).unwrap();
            let v = [vx, vy];
            let moved_demo = demo.translated(&v);
            for (model, moved) in all_models(&demo).into_iter().zip(all_models(&moved_demo)) {
                let a = model.reproduce(&c).unwrap().translated(&v);
                let b = moved.reproduce(&c.translated(&v)).unwrap();
                prop_assert!(a.max_distance(&b) < 1e-6, "{} off by {}", model.id(), a.max_distance(&b));
            }
        }
    }
}
