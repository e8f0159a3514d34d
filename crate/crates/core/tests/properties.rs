use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use wamcmc::adaptation::{step_size, AdaptationPolicy, AdaptationRule, Schedule};
use wamcmc::diagnostics::{
    containment_discrete_ar_exact, estimate_diminishing, harris_constants, check_drift, DiminishingConfig,
};
use wamcmc::empirical::{mass, EmpiricalMeasure, MASS_TOL};
use wamcmc::kernels::{DiscreteRwm, KernelFamily, Potential, RegularGrid, State, TuningParam, Ula, DEFAULT_TRUNC_TOL};
use wamcmc::linalg::{psd_sqrt, PsdMatrix};
use wamcmc::process::{run_adaptive, run_ensemble, run_finite_adaptation, Init};
use wamcmc::rng::make_stream;
use wamcmc::transport::{bounded_distance, discrete_ot_exact, w_exact_1d, wasserstein_exact, GroundMetric};

fn measure_1d(values: &[f64], weights: &[f64]) -> EmpiricalMeasure {
    EmpiricalMeasure::from_unnormalized(values.iter().map(|v| vec![*v]).collect(), weights.to_vec()).unwrap()
}

fn atoms(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max).prop_flat_map(|n| (prop::collection::vec(-3.0..3.0f64, n), prop::collection::vec(0.05..1.0f64, n)))
}

fn bernoulli_policy() -> AdaptationPolicy {
    AdaptationPolicy::bernoulli(
        Schedule::Harmonic { scale: 1.0, offset: 1.0 },
        vec![TuningParam::DiscreteBase(2), TuningParam::DiscreteBase(3), TuningParam::DiscreteBase(5)],
    )
}

fn brute_force_assignment(c: &DMatrix<f64>) -> f64 {
    fn go(c: &DMatrix<f64>, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        let n = c.nrows();
        if row == n {
            *best = best.min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                go(c, row + 1, used, acc + c[(row, j)] / n as f64, best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(c, 0, &mut vec![false; c.nrows()], 0.0, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stream_is_reproducible(seed in any::<u64>(), id in any::<u64>(), lane in any::<u64>()) {
        let mut a = make_stream(seed, id).split(lane);
        let mut b = make_stream(seed, id).split(lane);
        for _ in 0..16 {
            prop_assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn psd_sqrt_of_square(entries in prop::collection::vec(-2.0..2.0f64, 9)) {
        let a = DMatrix::from_row_slice(3, 3, &entries);
        let s = PsdMatrix::new(&a * a.transpose()).unwrap();
        let sq = PsdMatrix::new(s.as_matrix() * s.as_matrix()).unwrap();
        let back = psd_sqrt(&sq).unwrap();
        let scale = s.max_eigenvalue().max(1.0);
        prop_assert!((back.as_matrix() - s.as_matrix()).amax() <= 1e-8 * scale);
    }

    #[test]
    fn psd_eigenvalues_respect_clip(entries in prop::collection::vec(-2.0..2.0f64, 16)) {
        let a = DMatrix::from_row_slice(4, 4, &entries);
        let s = PsdMatrix::new(&a * a.transpose()).unwrap();
        let (vals, _) = s.eigen();
        prop_assert!(vals.iter().all(|v| *v >= -1e-10 * s.max_eigenvalue()));
        prop_assert!((s.as_matrix() - s.as_matrix().transpose()).amax() <= 1e-12 * s.as_matrix().amax().max(1.0));
    }

    #[test]
    fn measures_stay_normalized((xs, ws) in atoms(40), dir in -1.0..1.0f64) {
        let mu = measure_1d(&xs, &ws);
        prop_assert!((mass(mu.weights()) - 1.0).abs() <= MASS_TOL);
        let pts: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x, x * dir]).collect();
        let nu = EmpiricalMeasure::from_unnormalized(pts, ws.clone()).unwrap();
        let proj = nu.project(&[0.6, 0.8]).unwrap();
        prop_assert!((mass(proj.weights()) - 1.0).abs() <= MASS_TOL);
        let idx: Vec<usize> = (0..xs.len()).step_by(2).collect();
        let sub = nu.subset(&idx).unwrap();
        prop_assert!((mass(sub.weights()) - 1.0).abs() <= MASS_TOL);
    }

    #[test]
    fn rwm_rows_sum_to_one(n in 3usize..25, s in 0.3..1.0f64, center in 0.0..20.0f64) {
        let grid = RegularGrid::new(vec![0.0], vec![1.0], vec![n]).unwrap();
        let k = DiscreteRwm::new(grid, |p| (-(p[0] - center).powi(2) / 6.0).exp() + 1e-3, DEFAULT_TRUNC_TOL).unwrap();
        let p = k.transition_matrix(&PsdMatrix::scaled_identity(1, s).unwrap()).unwrap();
        for r in 0..n {
            prop_assert!((p.row(r).sum() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn ula_coupled_contraction_is_exact(x in prop::collection::vec(-5.0..5.0f64, 2), y in prop::collection::vec(-5.0..5.0f64, 2), h in 0.05..0.2f64) {
        let pot = Potential::quadratic(PsdMatrix::diag(&[1.0, 4.0]).unwrap()).unwrap();
        let k = KernelFamily::Ula(Ula::new(pot, 0.05).unwrap());
        let g = TuningParam::Langevin { m: PsdMatrix::identity(2), h };
        let (a, b) = (State::vector(&x), State::vector(&y));
        let (a1, b1) = k.coupled_step(&a, &g, &b, &g, &mut make_stream(1, 0)).unwrap();
        let d0 = (a.as_vector().unwrap() - b.as_vector().unwrap()).norm_squared();
        let d1 = (a1.as_vector().unwrap() - b1.as_vector().unwrap()).norm_squared();
        prop_assert!(d1 <= (1.0 - 2.0 * h * 4.0 / 5.0) * d0 + 1e-12);
    }

    #[test]
    fn finite_stop_freezes(t_stop in 0usize..60, seed in any::<u64>()) {
        let p = bernoulli_policy().with_finite_stop(t_stop);
        let init = Init::Point(TuningParam::DiscreteBase(2), State::Real(0.25));
        let traj = run_adaptive(&KernelFamily::DiscreteAr, &p, &init, 80, &make_stream(seed, 0)).unwrap();
        traj.verify_freeze(&KernelFamily::DiscreteAr, &p).unwrap();
        let after: Vec<_> = traj.tunings().skip(t_stop).collect();
        prop_assert!(after.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn restriction_holds_tuning(radius in 0.0..1.5f64, seed in any::<u64>()) {
        let k = KernelFamily::GaussianAr(wamcmc::kernels::GaussianAr::new(PsdMatrix::identity(1), 0.95).unwrap());
        let p = AdaptationPolicy::frozen()
            .with_rule(AdaptationRule::Jitter { schedule: Schedule::Constant(1.0), lo: 0.1, hi: 0.9 })
            .with_restriction(radius);
        let init = Init::Point(TuningParam::ArCoef(0.5), State::vector(&[0.0]));
        let traj = run_adaptive(&k, &p, &init, 50, &make_stream(seed, 0)).unwrap();
        for w in traj.records.windows(2) {
            let x = w[0].state.as_vector().unwrap()[0];
            if x.abs() > radius {
                prop_assert_eq!(&w[1].tuning, &w[0].tuning);
            }
        }
    }

    #[test]
    fn step_schedule_stays_in_range(h0 in 0.05..0.2f64, frac in 0.0..1.0f64) {
        let h_star = 0.05 + frac * (h0 - 0.05);
        let mut last = f64::INFINITY;
        for t in 0..200 {
            let h = step_size(h0, h_star, t);
            prop_assert!(h >= h_star && h <= 0.2);
            prop_assert!((h - h_star).abs() <= last);
            last = (h - h_star).abs();
        }
    }

    #[test]
    fn finite_adaptation_shares_prefix(t_stop in 0usize..40, seed in any::<u64>()) {
        let init = Init::Point(TuningParam::DiscreteBase(2), State::Real(0.5));
        let s = make_stream(seed, 3);
        let full = run_adaptive(&KernelFamily::DiscreteAr, &bernoulli_policy(), &init, 60, &s).unwrap();
        let fin = run_finite_adaptation(&KernelFamily::DiscreteAr, &bernoulli_policy(), &init, t_stop, 60 - t_stop, &s).unwrap();
        prop_assert_eq!(&full.records[..=t_stop], &fin.records[..=t_stop]);
    }

    #[test]
    fn replica_depends_only_on_its_index(seed in any::<u64>(), extra in 0usize..4) {
        let init = Init::Point(TuningParam::DiscreteBase(2), State::Real(0.1));
        let base = make_stream(seed, 0);
        let a = run_ensemble(&KernelFamily::DiscreteAr, &bernoulli_policy(), &init, 20, 2, &[20], &base).unwrap();
        let b = run_ensemble(&KernelFamily::DiscreteAr, &bernoulli_policy(), &init, 20, 2 + extra, &[20], &base).unwrap();
        prop_assert_eq!(&a[0].states[..], &b[0].states[..2]);
    }

    #[test]
    fn plan_marginals_and_cost((xa, wa) in atoms(12), (xb, wb) in atoms(12)) {
        let mu = measure_1d(&xa, &wa);
        let nu = measure_1d(&xb, &wb);
        let c = DMatrix::from_fn(xa.len(), xb.len(), |i, j| (xa[i] - xb[j]).abs());
        let r = discrete_ot_exact(&c, mu.weights(), nu.weights()).unwrap();
        let (a, b) = r.plan_marginals(xa.len(), xb.len()).unwrap();
        for (u, v) in a.iter().zip(mu.weights()) {
            prop_assert!((u - v).abs() <= 1e-10);
        }
        for (u, v) in b.iter().zip(nu.weights()) {
            prop_assert!((u - v).abs() <= 1e-10);
        }
        let from_plan: f64 = r.plan.as_ref().unwrap().iter().map(|&(i, j, w)| w * c[(i, j)]).sum();
        prop_assert!((from_plan - r.cost).abs() <= 1e-10);
    }

    #[test]
    fn one_d_matches_simplex((xa, wa) in atoms(64), (xb, wb) in atoms(64)) {
        let mu = measure_1d(&xa, &wa);
        let nu = measure_1d(&xb, &wb);
        let c = DMatrix::from_fn(xa.len(), xb.len(), |i, j| (xa[i] - xb[j]).abs());
        let ot = discrete_ot_exact(&c, mu.weights(), nu.weights()).unwrap().cost;
        prop_assert!((w_exact_1d(&mu, &nu, 1).unwrap().cost - ot).abs() <= 1e-9);
    }

    #[test]
    fn simplex_matches_brute_force(n in 1usize..=6, entries in prop::collection::vec(0.0..1.0f64, 36)) {
        let c = DMatrix::from_fn(n, n, |i, j| entries[i * 6 + j]);
        let w = vec![1.0 / n as f64; n];
        let ot = discrete_ot_exact(&c, &w, &w).unwrap().cost;
        prop_assert!((ot - brute_force_assignment(&c)).abs() <= 1e-12);
    }

    #[test]
    fn bounded_metric_axioms((xa, wa) in atoms(8), (xb, wb) in atoms(8), (xc, wc) in atoms(8)) {
        let (a, b, c) = (measure_1d(&xa, &wa), measure_1d(&xb, &wb), measure_1d(&xc, &wc));
        let mut rng = make_stream(0, 0);
        let mut d = |p: &EmpiricalMeasure, q: &EmpiricalMeasure| {
            bounded_distance(p, q, &GroundMetric::Euclidean, 0, &mut rng).unwrap().cost
        };
        let (ab, ba, bc, ac) = (d(&a, &b), d(&b, &a), d(&b, &c), d(&a, &c));
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - ba).abs() <= 1e-10);
        prop_assert!(ac <= ab + bc + 1e-10);
        let w = wasserstein_exact(&a, &b, &GroundMetric::Euclidean, 2).unwrap().cost;
        prop_assert!(w >= 0.0);
    }

    #[test]
    fn containment_monotone_in_eps(x in 0.0..1.0f64, e1 in 0.001..0.5f64, e2 in 0.001..0.5f64) {
        let est = containment_discrete_ar_exact(2, x, 0.3, 14).unwrap();
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let m = |e: f64| est.horizon_at(e).map_or(usize::MAX, |n| n);
        prop_assert!(m(hi) <= m(lo));
    }

    #[test]
    fn diminishing_estimates_in_unit_interval(seed in any::<u64>()) {
        let init = Init::Point(TuningParam::DiscreteBase(2), State::Real(0.5));
        let traj = run_adaptive(&KernelFamily::DiscreteAr, &bernoulli_policy(), &init, 30, &make_stream(seed, 0)).unwrap();
        let cfg = DiminishingConfig { pairs_per_delta: 16, times: Some(vec![0, 10, 29]), ..Default::default() };
        let est = estimate_diminishing(&traj, &KernelFamily::DiscreteAr, &cfg, &make_stream(seed, 1)).unwrap();
        prop_assert!(est.values.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn harris_constants_ranges(lambda in 0.05..0.95f64, k in 0.05..5.0f64, kappa in 0.01..0.99f64, alpha in 0.01..0.99f64, delta in 0.01..1.0f64) {
        if let Ok(c) = harris_constants(lambda, k, kappa, alpha, delta) {
            prop_assert!(c.alpha_star > 0.0 && c.alpha_star < 1.0);
            prop_assert!(c.beta_star <= alpha.min(kappa) / (4.0 * k) + 1e-15);
            prop_assert!(c.is_consistent());
        }
    }

    #[test]
    fn drift_without_violations_fits(g in 0.1..0.9f64, seed in any::<u64>()) {
        let k = KernelFamily::GaussianAr(wamcmc::kernels::GaussianAr::new(PsdMatrix::identity(1), 0.95).unwrap());
        let pts: Vec<State> = [0.0, 1.0, 2.5].iter().map(|x| State::vector(&[*x])).collect();
        let v = |x: &[f64]| x[0] * x[0];
        let rep = check_drift(&k, &[TuningParam::ArCoef(g)], &v, &pts, 200, None, &make_stream(seed, 0)).unwrap();
        prop_assert_eq!(rep.violations, 0);
        for p in &rep.points {
            prop_assert!(p.pv <= rep.lambda_hat.unwrap() * p.v + rep.l_hat + 1e-9);
        }
    }

    #[test]
    fn gaussian_ar_moments_close_form(g in 0.01..0.95f64, t in 0u32..30, x0 in -3.0..3.0f64) {
        let cov = PsdMatrix::diag(&[1.0, 0.3]).unwrap();
        let x = DVector::from_vec(vec![x0, -x0]);
        let (m, c) = wamcmc::kernels::gaussian_ar_moments(&x, g, &cov, t).unwrap();
        let gt = g.powi(t as i32);
        prop_assert!((m - &x * gt).amax() <= 1e-12);
        prop_assert!((c.as_matrix() - cov.as_matrix() * (1.0 - gt * gt)).amax() <= 1e-12);
        // one step from N(0, C) returns covariance g²C + (1 − g²)C
        let (_, one) = wamcmc::kernels::gaussian_ar_moments(&x, g, &cov, 1).unwrap();
        prop_assert!((cov.as_matrix() * (g * g) + one.as_matrix() - cov.as_matrix()).amax() <= 1e-12);
    }
}
