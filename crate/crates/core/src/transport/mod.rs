//! Wasserstein distances between finitely supported and Gaussian measures.

mod bounded;
mod gaussian;
mod one_d;
mod simplex;
mod sliced;

pub use bounded::{bounded_distance, cost_matrix, wasserstein_exact, GroundMetric, DEFAULT_BOOTSTRAP};
pub use gaussian::w2_gaussian;
pub use one_d::{w_exact_1d, w_exact_vs_uniform};
pub use simplex::{discrete_ot_exact, DUAL_TOL, SIZE_CAP};
pub use sliced::sliced_w1;

use nalgebra::DMatrix;

use crate::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// How a [`TransportResult`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact1d,
    ExactOt,
    GaussianClosedForm,
    Sliced,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Exact1d => "exact-1d",
            Method::ExactOt => "exact-ot",
            Method::GaussianClosedForm => "gaussian-closed-form",
            Method::Sliced => "sliced",
        }
    }
}

/// One coupling entry `(source atom, target atom, mass)`.
pub type PlanEntry = (usize, usize, f64);

#[derive(Clone, Debug, PartialEq)]
pub struct TransportResult {
    /// The distance (`W_p`, already raised to `1/p`) or, for
    /// [`discrete_ot_exact`], the optimal total cost.
    pub cost: f64,
    pub plan: Option<Vec<PlanEntry>>,
    pub method: Method,
    /// Numerical error bound or Monte Carlo standard error.
    pub error: f64,
}

impl TransportResult {
    /// Row and column sums of the plan.
    pub fn plan_marginals(&self, n: usize, m: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        let plan = self.plan.as_ref()?;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; m];
        for &(i, j, w) in plan {
            a[i] += w;
            b[j] += w;
        }
        Some((a, b))
    }
}

/// Ground cost selection for [`transport_distance`].
#[derive(Clone, Debug)]
pub enum CostSpec {
    /// `W_p` with Euclidean ground metric, `p ∈ {1, 2}`.
    EuclideanP(u32),
    /// `W_{ρ∧1}` for the given base metric.
    BoundedMetric(GroundMetric),
    /// Explicit cost matrix between the atoms.
    Custom(DMatrix<f64>),
}

/// Dispatches on the cost: quantile coupling for 1-D Euclidean costs, exact
/// OT otherwise (subsampled for the bounded metric above the size cap).
pub fn transport_distance(
    mu: &EmpiricalMeasure,
    nu: &EmpiricalMeasure,
    spec: &CostSpec,
    subsample: usize,
    stream: &mut RngStream,
) -> Result<TransportResult> {
    match spec {
        CostSpec::EuclideanP(p) => {
            if mu.dim() == 1 && nu.dim() == 1 {
                w_exact_1d(mu, nu, *p)
            } else {
                wasserstein_exact(mu, nu, &GroundMetric::Euclidean, *p)
            }
        }
        CostSpec::BoundedMetric(metric) => bounded_distance(mu, nu, metric, subsample, stream),
        CostSpec::Custom(c) => {
            if c.nrows() != mu.len() || c.ncols() != nu.len() {
                return Err(Error::DimensionMismatch {
                    expected: mu.len() * nu.len(),
                    found: c.nrows() * c.ncols(),
                });
            }
            if c.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::DomainError("custom cost entries must be nonnegative".into()));
            }
            discrete_ot_exact(c, mu.weights(), nu.weights())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_stream;
    use proptest::prelude::*;

    fn cloud(rng: &mut RngStream, n: usize, d: usize, shift: f64) -> EmpiricalMeasure {
        let pts = (0..n)
            .map(|_| (0..d).map(|_| rng.standard_normal() + shift).collect())
            .collect();
        EmpiricalMeasure::uniform(pts).unwrap()
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = make_stream(21, 0);
        for _ in 0..20 {
            let a = cloud(&mut rng, 15, 2, 0.0);
            let b = cloud(&mut rng, 12, 2, 0.5);
            let c = cloud(&mut rng, 10, 2, -0.3);
            let w = |x: &EmpiricalMeasure, y: &EmpiricalMeasure| {
                wasserstein_exact(x, y, &GroundMetric::Euclidean, 1).unwrap().cost
            };
            assert!((w(&a, &b) - w(&b, &a)).abs() < 1e-10);
            assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-10);
            assert!(w(&a, &a) < 1e-12);
        }
    }

    #[test]
    fn gaussian_formula_agrees_with_sample_ot() {
        // population W2 vs exact OT on 300-point subsamples of 10^3-point samples
        use crate::linalg::PsdMatrix;
        use nalgebra::DVector;
        let mut rng = make_stream(22, 0);
        let shift = DVector::from_vec(vec![1.0, 0.5]);
        let n = 1000;
        let a: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.standard_normal(), rng.standard_normal()]).collect();
        let b: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.standard_normal() + 1.0, rng.standard_normal() + 0.5])
            .collect();
        let mu = EmpiricalMeasure::uniform(a).unwrap();
        let nu = EmpiricalMeasure::uniform(b).unwrap();
        let exact = w2_gaussian(
            &DVector::zeros(2),
            &PsdMatrix::identity(2),
            &shift,
            &PsdMatrix::identity(2),
        )
        .unwrap();
        let mut vals = Vec::new();
        for r in 0..16 {
            let mut s = make_stream(22, 10 + r);
            let ia: Vec<usize> = (0..300).map(|_| s.below(n)).collect();
            let ib: Vec<usize> = (0..300).map(|_| s.below(n)).collect();
            let w = wasserstein_exact(&mu.subset(&ia).unwrap(), &nu.subset(&ib).unwrap(), &GroundMetric::Euclidean, 2)
                .unwrap()
                .cost;
            vals.push(w);
        }
        let mean = vals.iter().sum::<f64>() / 16.0;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 15.0).sqrt();
        assert!((mean - exact).abs() <= 3.0 * sd, "{mean} vs {exact} (sd {sd})");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn one_d_matches_exact_ot(
            xs in prop::collection::vec(-5.0f64..5.0, 1..40),
            ys in prop::collection::vec(-5.0f64..5.0, 1..40),
            p in 1u32..=2,
        ) {
            let mu = EmpiricalMeasure::uniform_1d(&xs).unwrap();
            let nu = EmpiricalMeasure::uniform_1d(&ys).unwrap();
            let a = w_exact_1d(&mu, &nu, p).unwrap();
            let b = wasserstein_exact(&mu, &nu, &GroundMetric::Euclidean, p).unwrap();
            prop_assert!((a.cost - b.cost).abs() < 1e-9);
        }

        #[test]
        fn plans_have_input_marginals(
            n in 1usize..12,
            m in 1usize..12,
            seed in 0u64..1000,
        ) {
            let mut rng = make_stream(seed, 0);
            let wa: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.01).collect();
            let wb: Vec<f64> = (0..m).map(|_| rng.uniform() + 0.01).collect();
            let sa: f64 = wa.iter().sum();
            let sb: f64 = wb.iter().sum();
            let wa: Vec<f64> = wa.iter().map(|w| w / sa).collect();
            let wb: Vec<f64> = wb.iter().map(|w| w / sb).collect();
            let c = DMatrix::from_fn(n, m, |_, _| rng.uniform());
            let r = discrete_ot_exact(&c, &wa, &wb).unwrap();
            let (ra, rb) = r.plan_marginals(n, m).unwrap();
            for (x, y) in ra.iter().zip(&wa) { prop_assert!((x - y).abs() < 1e-10); }
            for (x, y) in rb.iter().zip(&wb) { prop_assert!((x - y).abs() < 1e-10); }
            let cost: f64 = r.plan.as_ref().unwrap().iter().map(|&(i, j, w)| w * c[(i, j)]).sum();
            prop_assert!((cost - r.cost).abs() < 1e-10);
        }
    }
}
