use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::LeastSquares;
use crate::trajectory::{BoundaryConstraint, ConstraintKind, Trajectory};

use super::{kind_slot, stack_rhs, RANK_TOLERANCE};

/// Laplacian trajectory editing.
///
/// The demonstration's second differences (its Laplacian coordinates) are
/// kept in a least-squares sense while the pinned endpoints are enforced by
/// heavily weighted rows. When only one endpoint is pinned the two one-sided
/// boundary rows of the path-graph Laplacian are added so that the system
/// stays full rank; the result is then a rigid translation of the demo.
#[derive(Debug)]
pub struct LteModel {
    demo: Trajectory,
    laplacian: DMatrix<f64>,
    delta: DMatrix<f64>,
    constraint_weight: f64,
    solvers: [OnceLock<Result<LeastSquares, String>>; 3],
}

impl LteModel {
    pub fn new(demo: Trajectory, constraint_weight: f64) -> Result<Self> {
        if demo.len() < 3 {
            return Err(Error::InvalidTrajectory(
                "laplacian editing needs at least 3 samples".into(),
            ));
        }
        if !(constraint_weight > 0.0 && constraint_weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "constraint weight must be positive, got {constraint_weight}"
            )));
        }
        let len = demo.len();
        let mut laplacian = DMatrix::zeros(len - 2, len);
        for row in 0..len - 2 {
            laplacian[(row, row)] = 1.0;
            laplacian[(row, row + 1)] = -2.0;
            laplacian[(row, row + 2)] = 1.0;
        }
        let positions = demo_matrix(&demo);
        let delta = &laplacian * &positions;
        Ok(LteModel {
            demo,
            laplacian,
            delta,
            constraint_weight,
            solvers: Default::default(),
        })
    }

    pub fn demo(&self) -> &Trajectory {
        &self.demo
    }

    /// The `(T-2) x T` second-difference operator.
    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Laplacian coordinates of the demonstration, one row per interior sample.
    pub fn delta(&self) -> &DMatrix<f64> {
        &self.delta
    }

    fn uses_boundary_rows(kind: ConstraintKind) -> bool {
        kind != ConstraintKind::Both
    }

    fn boundary_rows(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let len = self.demo.len();
        let mut op = DMatrix::zeros(2, len);
        op[(0, 0)] = 1.0;
        op[(0, 1)] = -1.0;
        op[(1, len - 1)] = 1.0;
        op[(1, len - 2)] = -1.0;
        let rhs = &op * demo_matrix(&self.demo);
        (op, rhs)
    }

    fn operator(&self, kind: ConstraintKind) -> DMatrix<f64> {
        let len = self.demo.len();
        let pinned = pinned_indices(kind, len);
        let extra = if Self::uses_boundary_rows(kind) { 2 } else { 0 };
        let rows = self.laplacian.nrows() + extra + pinned.len();
        let mut a = DMatrix::zeros(rows, len);
        a.rows_mut(0, len - 2).copy_from(&self.laplacian);
        if extra > 0 {
            a.rows_mut(len - 2, 2).copy_from(&self.boundary_rows().0);
        }
        for (k, idx) in pinned.iter().enumerate() {
            a[(len - 2 + extra + k, *idx)] = self.constraint_weight;
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
        let mut known = self.delta.clone();
        if Self::uses_boundary_rows(constraint.kind()) {
            let (_, rhs) = self.boundary_rows();
            known = stack_rhs(&known, &rhs);
        }
        let rhs = append_constraints(known, constraint, self.demo.len(), self.constraint_weight);
        let x = solver.solve(rhs)?;
        matrix_to_trajectory(&x, constraint, self.demo.duration())
    }
}

pub(crate) fn pinned_indices(kind: ConstraintKind, len: usize) -> Vec<usize> {
    match kind {
        ConstraintKind::Initial => vec![0],
        ConstraintKind::Final => vec![len - 1],
        ConstraintKind::Both => vec![0, len - 1],
    }
}

pub(crate) fn demo_matrix(demo: &Trajectory) -> DMatrix<f64> {
    DMatrix::from_row_slice(demo.len(), demo.dims(), demo.as_flat())
}

pub(crate) fn append_constraints(
    known: DMatrix<f64>,
    constraint: &BoundaryConstraint,
    len: usize,
    weight: f64,
) -> DMatrix<f64> {
    let pinned = constraint.pinned(len);
    let dims = known.ncols();
    let mut rows = DMatrix::zeros(pinned.len(), dims);
    for (k, (_, p)) in pinned.iter().enumerate() {
        for d in 0..dims {
            rows[(k, d)] = weight * p[d];
        }
    }
    stack_rhs(&known, &rows)
}

/// Converts the solution to a trajectory. The weighted constraint rows leave
/// pinned samples off by solver round-off; they are set to the requested
/// points exactly.
pub(crate) fn matrix_to_trajectory(
    x: &DMatrix<f64>,
    constraint: &BoundaryConstraint,
    duration: f64,
) -> Result<Trajectory> {
    let dims = x.ncols();
    let mut data = Vec::with_capacity(x.len());
    for r in 0..x.nrows() {
        data.extend(x.row(r).iter());
    }
    for (i, p) in constraint.pinned(x.nrows()) {
        data[i * dims..(i + 1) * dims].copy_from_slice(p);
    }
    Trajectory::new(data, dims)?.with_duration(duration)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Trajectory {
        let rows: Vec<[f64; 2]> = (0..n).map(|i| [i as f64 / (n - 1) as f64, 0.0]).collect();
        Trajectory::from_rows(&rows).unwrap()
    }

    #[test]
    fn laplacian_rows_and_straight_line_delta() {
        let model = LteModel::new(line(6), 1e6).unwrap();
        assert_eq!(model.laplacian().row(1).iter().cloned().collect::<Vec<_>>(), vec![0.0, 1.0, -2.0, 1.0, 0.0, 0.0]);
        assert!(model.delta().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn single_endpoint_translates_demo() {
        let demo = crate::shapes::s_curve(50);
        let model = LteModel::new(demo.clone(), 1e6).unwrap();
        let v = [0.3, -0.2];
        let start: Vec<f64> = demo.first().iter().zip(v).map(|(a, b)| a + b).collect();
        let out = model.reproduce(&BoundaryConstraint::initial(start)).unwrap();
        assert!(out.max_distance(&demo.translated(&v)) < 1e-8);
    }

    #[test]
    fn rejects_two_sample_demo() {
        assert!(LteModel::new(line(2), 1e6).is_err());
    }
}
