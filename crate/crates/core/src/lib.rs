//! Similarity-aware multi-representational learning from demonstration.
//!
//! A single demonstration is encoded by several trajectory representations
//! (Laplacian trajectory editing, jerk-accuracy, dynamic movement primitives).
//! Reproductions from new start or goal points are scored against the demo
//! with a similarity metric, and the best representation per region of the
//! constraint space is learned by a classifier.

pub mod bias;
pub mod engine;
pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod representations;
pub mod service;
pub mod shapes;
pub mod trajectory;

pub use engine::{best_reproduction, predict_representation, Session, SessionConfig};
pub use error::{Error, Result};
pub use metrics::{distance, MetricId};
pub use representations::{Representation, RepresentationId};
pub use trajectory::{BoundaryConstraint, ConstraintKind, Trajectory};
