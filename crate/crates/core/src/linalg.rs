//! Dense least-squares solves for the stacked operator systems used by the
//! Laplacian and jerk-accuracy representations.

use nalgebra::{DMatrix, QR};

use crate::error::{Error, Result};

/// A factored tall system `A x ≈ b`, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    rows: usize,
    cols: usize,
    qr: QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl LeastSquares {
    /// Factors `a` with Householder QR. Fails if `a` is rank deficient
    /// relative to `rcond`.
    pub fn factor(a: DMatrix<f64>, rcond: f64) -> Result<Self> {
        let (rows, cols) = a.shape();
        if rows < cols {
            return Err(Error::Singular(format!(
                "underdetermined system: {rows} equations for {cols} unknowns"
            )));
        }
        let qr = a.qr();
        let r = qr.r();
        let diag: Vec<f64> = (0..cols).map(|i| r[(i, i)].abs()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || min <= rcond * max {
            return Err(Error::Singular(format!(
                "rank deficient stacked system (|R| diagonal ratio {:.3e})",
                if max > 0.0 { min / max } else { 0.0 }
            )));
        }
        Ok(LeastSquares { rows, cols, qr })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Minimizes `‖A x − b‖` column by column.
    pub fn solve(&self, mut b: DMatrix<f64>) -> Result<DMatrix<f64>> {
        assert_eq!(b.nrows(), self.rows);
        self.qr.q_tr_mul(&mut b);
        let r = self.qr.r();
        let top = b.rows(0, self.cols).into_owned();
        let x = r
            .solve_upper_triangular(&top)
            .ok_or_else(|| Error::Singular("zero pivot in back substitution".into()))?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("non-finite least-squares solution".into()));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_overdetermined_line_fit() {
        // y = 2x + 1 sampled exactly.
        let a = DMatrix::from_row_slice(4, 2, &[0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0, 1.0]);
        let b = DMatrix::from_column_slice(4, 1, &[1.0, 3.0, 5.0, 7.0]);
        let x = LeastSquares::factor(a, 1e-14).unwrap().solve(b).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_rank_deficient() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        assert!(matches!(LeastSquares::factor(a, 1e-12), Err(Error::Singular(_))));
        let wide = DMatrix::zeros(1, 2);
        assert!(LeastSquares::factor(wide, 1e-12).is_err());
    }
}
