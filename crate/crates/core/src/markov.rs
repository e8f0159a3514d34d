//! Finite-state Markov chain utilities.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Stationary law of a row-stochastic matrix, solving `πP = π`, `Σπ = 1` by LU.
pub fn stationary_distribution(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = p.nrows();
    if n == 0 || p.ncols() != n {
        return Err(Error::DimensionError(format!(
            "expected a square transition matrix, got {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    let mut a = p.transpose() - DMatrix::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::DomainError("transition matrix has no unique stationary law".into()))?;
    Ok(pi.map(|v| v.max(0.0)))
}

/// `P^t` by repeated squaring.
pub fn matrix_power(p: &DMatrix<f64>, mut t: u32) -> DMatrix<f64> {
    let n = p.nrows();
    let mut out = DMatrix::identity(n, n);
    let mut base = p.clone();
    while t > 0 {
        if t & 1 == 1 {
            out = &out * &base;
        }
        base = &base * &base;
        t >>= 1;
    }
    out
}

/// Largest total-variation distance between two rows.
pub fn dobrushin_coefficient(p: &DMatrix<f64>) -> f64 {
    let n = p.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let tv: f64 = (0..p.ncols()).map(|k| (p[(i, k)] - p[(j, k)]).abs()).sum::<f64>() * 0.5;
            worst = worst.max(tv);
        }
    }
    worst
}

/// Checks that every row is a probability vector within `tol`.
pub fn check_stochastic(p: &DMatrix<f64>, tol: f64) -> Result<()> {
    for i in 0..p.nrows() {
        let row = p.row(i);
        if row.iter().any(|&v| !(v >= -tol)) || (row.sum() - 1.0).abs() > tol {
            return Err(Error::DomainError(format!("row {i} is not a probability vector")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_stationary() {
        let (a, b) = (0.3, 0.1);
        let p = DMatrix::from_row_slice(2, 2, &[1.0 - a, a, b, 1.0 - b]);
        let pi = stationary_distribution(&p).unwrap();
        assert!((pi[0] - b / (a + b)).abs() < 1e-14);
        assert!((pi[1] - a / (a + b)).abs() < 1e-14);
        assert!((dobrushin_coefficient(&p) - (1.0 - a - b)).abs() < 1e-14);
    }

    #[test]
    fn power_matches_repeated_product() {
        let p = DMatrix::from_row_slice(3, 3, &[0.5, 0.25, 0.25, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4]);
        let mut q = DMatrix::identity(3, 3);
        for _ in 0..7 {
            q = &q * &p;
        }
        assert!((matrix_power(&p, 7) - q).amax() < 1e-14);
        assert!(check_stochastic(&p, 1e-12).is_ok());
    }
}
