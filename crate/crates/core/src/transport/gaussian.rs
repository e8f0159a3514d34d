use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::PsdMatrix;

const COND_FLOOR: f64 = 1e-12;

/// `tr(A⁻¹ (Q − A²)²)` with `A = B^{1/2}` invertible and `Q = (A C A)^{1/2}`.
/// Equal to the Bures term `tr C + tr B − 2 tr Q`, without cancellation.
fn bures_sq_mapped(c: &PsdMatrix, b: &PsdMatrix) -> Option<f64> {
    let a = b.sqrt();
    let a_inv = a.inverse(COND_FLOOR.sqrt())?;
    let am = a.as_matrix();
    let inner = PsdMatrix::new({
        let s = am * c.as_matrix() * am;
        (&s + s.transpose()) * 0.5
    })
    .ok()?;
    let q = inner.sqrt();
    let diff = q.as_matrix() - b.as_matrix();
    Some((a_inv * diff).norm_squared())
}

fn cond(m: &PsdMatrix) -> f64 {
    let (vals, _) = m.eigen();
    let max = vals.max();
    if max <= 0.0 {
        return 0.0;
    }
    vals.min() / max
}

/// 2-Wasserstein distance between `N(m1, C1)` and `N(m2, C2)`.
pub fn w2_gaussian(m1: &DVector<f64>, c1: &PsdMatrix, m2: &DVector<f64>, c2: &PsdMatrix) -> Result<f64> {
    let d = m1.len();
    for k in [m2.len(), c1.dim(), c2.dim()] {
        if k != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: k,
            });
        }
    }
    crate::linalg::psd_sqrt(c1)?;
    crate::linalg::psd_sqrt(c2)?;
    let mean = (m1 - m2).norm_squared();
    let (k1, k2) = (cond(c1), cond(c2));
    let bures = if k1.max(k2) > COND_FLOOR {
        if k2 >= k1 {
            bures_sq_mapped(c1, c2)
        } else {
            bures_sq_mapped(c2, c1)
        }
    } else {
        None
    };
    let bures = match bures {
        Some(v) => v,
        None => {
            let s = c2.sqrt();
            let sm = s.as_matrix();
            let inner = sm * c1.as_matrix() * sm;
            let q = PsdMatrix::new((&inner + inner.transpose()) * 0.5)?.sqrt();
            (c1.trace() + c2.trace() - 2.0 * q.trace()).max(0.0)
        }
    };
    Ok((mean + bures).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn identical_gaussians() {
        let c = PsdMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0])).unwrap();
        let m = DVector::from_vec(vec![1.0, 2.0]);
        assert!(w2_gaussian(&m, &c, &m, &c).unwrap() < 1e-14);
    }

    #[test]
    fn pure_mean_shift() {
        let c = PsdMatrix::identity(2);
        let w = w2_gaussian(&DVector::zeros(2), &c, &DVector::from_vec(vec![3.0, 4.0]), &c).unwrap();
        assert!((w - 5.0).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_scales() {
        let w = w2_gaussian(
            &DVector::zeros(1),
            &PsdMatrix::diag(&[4.0]).unwrap(),
            &DVector::zeros(1),
            &PsdMatrix::diag(&[1.0]).unwrap(),
        )
        .unwrap();
        assert!((w - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_sides() {
        let z = PsdMatrix::zeros(2);
        let c = PsdMatrix::diag(&[1.0, 4.0]).unwrap();
        let w = w2_gaussian(&DVector::zeros(2), &z, &DVector::zeros(2), &c).unwrap();
        assert!((w - 5f64.sqrt()).abs() < 1e-14);
        let w = w2_gaussian(&DVector::zeros(2), &z, &DVector::zeros(2), &z).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn nearly_equal_covariances_do_not_cancel() {
        // commuting case: W2 = ‖√C1 − √C2‖_F exactly
        let f = 1.0 - 1e-12;
        let c2 = PsdMatrix::diag(&[1.0, 0.5, 0.25]).unwrap();
        let c1 = PsdMatrix::new(c2.as_matrix() * f).unwrap();
        let w = w2_gaussian(&DVector::zeros(3), &c1, &DVector::zeros(3), &c2).unwrap();
        let exact = (1.0 - f) / (1.0 + f.sqrt()) * c2.trace().sqrt();
        assert!((w - exact).abs() < 1e-15, "{w} vs {exact}");
    }

    #[test]
    fn commuting_closed_form() {
        let c1 = PsdMatrix::diag(&[1.0, 9.0]).unwrap();
        let c2 = PsdMatrix::diag(&[4.0, 1.0]).unwrap();
        let w = w2_gaussian(&DVector::zeros(2), &c1, &DVector::zeros(2), &c2).unwrap();
        assert!((w - 5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn random_matches_trace_formula() {
        use crate::rng::make_stream;
        let mut rng = make_stream(41, 0);
        for _ in 0..20 {
            let a = DMatrix::from_fn(3, 3, |_, _| rng.standard_normal());
            let b = DMatrix::from_fn(3, 3, |_, _| rng.standard_normal());
            let c1 = PsdMatrix::new(&a * a.transpose()).unwrap();
            let c2 = PsdMatrix::new(&b * b.transpose()).unwrap();
            let s = c2.sqrt();
            let q = PsdMatrix::new({
                let m = s.as_matrix() * c1.as_matrix() * s.as_matrix();
                (&m + m.transpose()) * 0.5
            })
            .unwrap()
            .sqrt();
            let naive = (c1.trace() + c2.trace() - 2.0 * q.trace()).sqrt();
            let w = w2_gaussian(&DVector::zeros(3), &c1, &DVector::zeros(3), &c2).unwrap();
            assert!((w - naive).abs() < 1e-8 * (1.0 + naive));
            let back = w2_gaussian(&DVector::zeros(3), &c2, &DVector::zeros(3), &c1).unwrap();
            assert!((w - back).abs() < 1e-8 * (1.0 + naive));
        }
    }
}
