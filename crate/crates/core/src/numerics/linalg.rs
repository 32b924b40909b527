//! Small dense linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Singular-value condition number; `∞` for exactly singular input.
pub fn condition_number(a: &Matrix) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// LU solve `a x = b`.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let lu = a.clone().lu();
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or(Error::Singular(f64::INFINITY))?;
    Ok(x.iter().cloned().collect())
}

/// Determinant via LU.
pub fn determinant(a: &Matrix) -> f64 {
    a.clone().lu().determinant()
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_det() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!((determinant(&a) - 5.0).abs() < 1e-14);
        let ev = symmetric_eigenvalues(&a);
        assert!((ev[0] + ev[1] - 5.0).abs() < 1e-13);
        assert!(condition_number(&a) > 1.0);
    }

    #[test]
    fn singular_matrix() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(condition_number(&a) > 1e12);
    }
}
