use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::LeastSquares;
use crate::trajectory::{BoundaryConstraint, ConstraintKind, Trajectory};

use super::lte::{append_constraints, demo_matrix, matrix_to_trajectory, pinned_indices};
use super::{kind_slot, stack_rhs, RANK_TOLERANCE};

/// Jerk-accuracy model as a discrete quadratic program.
///
/// Minimizes `‖D₃ X‖² + λ⁶ ‖X − X_demo‖²` where `D₃` is the third-difference
/// operator scaled by `1/h³`. Both terms carry the same quadrature weight `h`,
/// which cancels; the system is assembled after multiplying through by `h⁶`
/// so that the operator rows are `[-1, 3, -3, 1]` and the accuracy rows carry
/// `(λh)³`.
#[derive(Debug)]
pub struct JaModel {
    demo: Trajectory,
    lambda: f64,
    constraint_weight: f64,
    solvers: [OnceLock<Result<LeastSquares, String>>; 3],
}

impl JaModel {
    pub fn new(demo: Trajectory, lambda: f64, constraint_weight: f64) -> Result<Self> {
        if demo.len() < 4 {
            return Err(Error::InvalidTrajectory(
                "the jerk-accuracy model needs at least 4 samples".into(),
            ));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        if !(constraint_weight > 0.0 && constraint_weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "constraint weight must be positive, got {constraint_weight}"
            )));
        }
        Ok(JaModel {
            demo,
            lambda,
            constraint_weight,
            solvers: Default::default(),
        })
    }

    pub fn demo(&self) -> &Trajectory {
        &self.demo
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Third-difference operator with rows `[-1, 3, -3, 1] / h³`.
    pub fn jerk_operator(&self) -> DMatrix<f64> {
        let h3 = self.demo.step().powi(3);
        unit_jerk_operator(self.demo.len()) / h3
    }

    fn accuracy_weight(&self) -> f64 {
        (self.lambda * self.demo.step()).powi(3)
    }

    fn operator(&self, kind: ConstraintKind) -> DMatrix<f64> {
        let len = self.demo.len();
        let pinned = pinned_indices(kind, len);
        let jerk_rows = len - 3;
        let mut a = DMatrix::zeros(jerk_rows + len + pinned.len(), len);
        a.rows_mut(0, jerk_rows).copy_from(&unit_jerk_operator(len));
        let w = self.accuracy_weight();
        for i in 0..len {
            a[(jerk_rows + i, i)] = w;
        }
        for (k, idx) in pinned.iter().enumerate() {
            a[(jerk_rows + len + k, *idx)] = self.constraint_weight;
        }
        a
    }

    fn solver(&self, kind: ConstraintKind) -> Result<&LeastSquares> {
        self.solvers[kind_slot(kind)]
            .get_or_init(|| {
                LeastSquares::factor(self.operator(kind), RANK_TOLERANCE).map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Singular(e.clone()))
    }

    pub fn reproduce(&self, constraint: &BoundaryConstraint) -> Result<Trajectory> {
        constraint.validate(&self.demo)?;
        let solver = self.solver(constraint.kind())?;
        let len = self.demo.len();
        let zeros = DMatrix::zeros(len - 3, self.demo.dims());
        let accuracy = demo_matrix(&self.demo) * self.accuracy_weight();
        let rhs = append_constraints(
            stack_rhs(&zeros, &accuracy),
            constraint,
            len,
            self.constraint_weight,
        );
        let x = solver.solve(rhs).map_err(|e| {
            Error::Singular(format!("{e} (lambda {}, step {})", self.lambda, self.demo.step()))
        })?;
        matrix_to_trajectory(&x, constraint, self.demo.duration())
    }
}

fn unit_jerk_operator(len: usize) -> DMatrix<f64> {
    let mut op = DMatrix::zeros(len - 3, len);
    for row in 0..len - 3 {
        op[(row, row)] = -1.0;
        op[(row, row + 1)] = 3.0;
        op[(row, row + 2)] = -3.0;
        op[(row, row + 3)] = 1.0;
    }
    op
}
