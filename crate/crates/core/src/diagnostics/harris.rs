//! Simultaneous weak Harris constants and their exact verification on
//! finite chains.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::markov::{check_stochastic, matrix_power, stationary_distribution};
use crate::rng::RngStream;
use crate::transport::{discrete_ot_exact, DUAL_TOL};

/// Largest chain the verifier enumerates.
pub const MAX_STATES: usize = 64;

const CONTRACTION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct HarrisConstants {
    pub lambda: f64,
    pub k: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub delta: f64,
    pub beta_star: f64,
    pub r: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub alpha_star: f64,
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::ParamOutOfRange(format!("{name} = {v} must lie in (0, 1)")));
    }
    Ok(())
}

pub fn harris_constants(lambda: f64, k: f64, kappa: f64, alpha: f64, delta: f64) -> Result<HarrisConstants> {
    open_unit("lambda", lambda)?;
    open_unit("kappa", kappa)?;
    open_unit("alpha", alpha)?;
    open_unit("delta", delta)?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::ParamOutOfRange(format!("K = {k} must be positive")));
    }
    let beta = alpha.min(kappa) / (4.0 * k);
    let r = (1.0 + delta) * 2.0 * k / (1.0 - lambda);
    let f1 = ((1.0 - lambda) * (1.0 + beta * 2.0 * k / (1.0 - lambda)) / (1.0 + beta * r) + lambda).sqrt();
    let f2 = (1.0 - alpha / 2.0).sqrt();
    let f3 = (1.0 - kappa / 2.0).sqrt();
    Ok(HarrisConstants {
        lambda,
        k,
        kappa,
        alpha,
        delta,
        beta_star: beta,
        r,
        f1,
        f2,
        f3,
        alpha_star: 1.0 - f1.max(f2).max(f3),
    })
}

impl HarrisConstants {
    /// `√((ρ ∧ 1)(1 + β* V(u) + β* V(v)))`.
    pub fn rho_gamma(&self, rho: f64, vu: f64, vv: f64) -> f64 {
        (rho.min(1.0) * (1.0 + self.beta_star * (vu + vv))).sqrt()
    }

    /// `(1 − α*)^t √(1 + β* V(x) + (α ∧ κ) / (4 (1 − λ)))`.
    pub fn stationary_bound(&self, v_x: f64, t: u32) -> f64 {
        let start = 1.0 + self.beta_star * v_x + self.alpha.min(self.kappa) / (4.0 * (1.0 - self.lambda));
        (1.0 - self.alpha_star).powi(t as i32) * start.sqrt()
    }

    /// True when `α*` is re-derivable from the stored case factors.
    pub fn is_consistent(&self) -> bool {
        self.alpha_star == 1.0 - self.f1.max(self.f2).max(self.f3)
    }
}

/// Transition matrices `P_γ` on a common finite state space with drift tables
/// `V(γ, ·)` and a base metric `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteChain {
    kernels: Vec<DMatrix<f64>>,
    v: Vec<Vec<f64>>,
    rho: DMatrix<f64>,
}

impl FiniteChain {
    pub fn new(kernels: Vec<DMatrix<f64>>, v: Vec<Vec<f64>>, rho: DMatrix<f64>) -> Result<Self> {
        let n = rho.nrows();
        if n == 0 || n > MAX_STATES || rho.ncols() != n {
            return Err(Error::DimensionError(format!(
                "metric must be square with 1..={MAX_STATES} states, got {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let r = rho[(i, j)];
                if !(r >= 0.0) || r != rho[(j, i)] || (i == j && r != 0.0) {
                    return Err(Error::DomainError(format!("rho is not a metric table at ({i}, {j})")));
                }
            }
        }
        if kernels.is_empty() || kernels.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: kernels.len().max(1),
                found: v.len(),
            });
        }
        for (p, vg) in kernels.iter().zip(&v) {
            if p.nrows() != n || p.ncols() != n || vg.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.nrows().max(vg.len()),
                });
            }
            check_stochastic(p, 1e-12)?;
            if vg.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::DomainError("drift function must be nonnegative".into()));
            }
        }
        Ok(Self { kernels, v, rho })
    }

    pub fn states(&self) -> usize {
        self.rho.nrows()
    }

    pub fn tunings(&self) -> usize {
        self.kernels.len()
    }

    pub fn kernel(&self, g: usize) -> &DMatrix<f64> {
        &self.kernels[g]
    }

    pub fn drift(&self, g: usize) -> &[f64] {
        &self.v[g]
    }

    pub fn rho(&self) -> &DMatrix<f64> {
        &self.rho
    }

    fn ot(&self, cost: &DMatrix<f64>, a: &[f64], b: &[f64]) -> Result<f64> {
        Ok(discrete_ot_exact(cost, a, b)?.cost)
    }

    fn row(&self, g: usize, x: usize) -> Vec<f64> {
        self.kernels[g].row(x).iter().copied().collect()
    }

    fn capped(&self) -> DMatrix<f64> {
        self.rho.map(|r| r.min(1.0))
    }

    /// Exact `W_{ρ∧1}(P_γ(x, ·), P_γ(y, ·))`.
    pub fn capped_distance(&self, g: usize, x: usize, y: usize) -> Result<f64> {
        self.ot(&self.capped(), &self.row(g, x), &self.row(g, y))
    }

    fn pv(&self, g: usize) -> Vec<f64> {
        let v = DVector::from_column_slice(&self.v[g]);
        (&self.kernels[g] * v).iter().copied().collect()
    }
}

/// Sharpest `(K, κ, α)` the chain admits for the given `λ, δ`, found by
/// enumeration. `κ` and `α` are capped just below 1.
pub fn fit_harris_inputs(chain: &FiniteChain, lambda: f64, delta: f64) -> Result<(f64, f64, f64)> {
    open_unit("lambda", lambda)?;
    open_unit("delta", delta)?;
    let n = chain.states();
    let cap: f64 = 1.0 - 1e-9;
    let mut k: f64 = 1e-12;
    for g in 0..chain.tunings() {
        for (pv, v) in chain.pv(g).iter().zip(chain.drift(g)) {
            k = k.max(pv - lambda * v);
        }
    }
    let r = (1.0 + delta) * 2.0 * k / (1.0 - lambda);
    let mut kappa = cap;
    let mut alpha = cap;
    for g in 0..chain.tunings() {
        let v = chain.drift(g);
        for x in 0..n {
            for y in x + 1..n {
                let w = chain.capped_distance(g, x, y)?;
                let rho = chain.rho[(x, y)];
                if rho < 1.0 {
                    kappa = kappa.min(1.0 - w / rho);
                }
                if v[x] <= r && v[y] <= r {
                    alpha = alpha.min(1.0 - w);
                }
            }
        }
    }
    Ok((k, kappa, alpha))
}

/// Checks drift, `ρ`-contraction and `ρ`-smallness exactly.
pub fn check_harris_hypotheses(chain: &FiniteChain, c: &HarrisConstants) -> Result<()> {
    let n = chain.states();
    let fail = |gamma, reason| Err(Error::HypothesisFailed { gamma, reason });
    for g in 0..chain.tunings() {
        let v = chain.drift(g);
        for (x, pv) in chain.pv(g).iter().enumerate() {
            if *pv > c.lambda * v[x] + c.k + CONTRACTION_TOL {
                return fail(g, format!("drift fails at state {x}: PV = {pv} > {}", c.lambda * v[x] + c.k));
            }
        }
        for x in 0..n {
            for y in x + 1..n {
                let w = chain.capped_distance(g, x, y)?;
                let rho = chain.rho[(x, y)];
                if rho < 1.0 && w > (1.0 - c.kappa) * rho + CONTRACTION_TOL {
                    return fail(g, format!("pair ({x}, {y}) is not rho-contracting: {w} > {}", (1.0 - c.kappa) * rho));
                }
                if v[x] <= c.r && v[y] <= c.r && w > 1.0 - c.alpha + CONTRACTION_TOL {
                    return fail(g, format!("pair ({x}, {y}) in the small set: {w} > {}", 1.0 - c.alpha));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarrisReport {
    pub pairs_checked: usize,
    /// Largest `W_{ρ_γ}(P_γ(x, ·), P_γ(y, ·)) / ρ_γ(x, y)` over distinct pairs.
    pub worst_ratio: f64,
    pub rows_checked: usize,
    /// Largest ratio of the `t`-step distance to its bound.
    pub worst_stationary_ratio: f64,
}

/// Verifies the one-step contraction in `ρ_γ` for every pair and the
/// geometric bound on the distance to the stationary law for `t ≤ t_max`.
pub fn verify_harris_contraction(chain: &FiniteChain, c: &HarrisConstants, t_max: u32) -> Result<HarrisReport> {
    check_harris_hypotheses(chain, c)?;
    let n = chain.states();
    let mut report = HarrisReport {
        pairs_checked: 0,
        worst_ratio: 0.0,
        rows_checked: 0,
        worst_stationary_ratio: 0.0,
    };
    for g in 0..chain.tunings() {
        let v = chain.drift(g);
        let cost = DMatrix::from_fn(n, n, |u, w| c.rho_gamma(chain.rho[(u, w)], v[u], v[w]));
        for x in 0..n {
            for y in x + 1..n {
                let lhs = chain.ot(&cost, &chain.row(g, x), &chain.row(g, y))?;
                let rhs = (1.0 - c.alpha_star) * cost[(x, y)];
                report.pairs_checked += 1;
                if cost[(x, y)] > 0.0 {
                    report.worst_ratio = report.worst_ratio.max(lhs / cost[(x, y)]);
                }
                if lhs > rhs + CONTRACTION_TOL {
                    return Err(Error::ContractionViolated { gamma: g, x, y, lhs, rhs });
                }
            }
        }
        let pi: Vec<f64> = stationary_distribution(chain.kernel(g))?
            .iter()
            .map(|p| p.max(0.0))
            .collect();
        for t in 0..=t_max {
            let pt = matrix_power(chain.kernel(g), t);
            for x in 0..n {
                let row: Vec<f64> = pt.row(x).iter().map(|p| p.max(0.0)).collect();
                let lhs = chain.ot(&cost, &row, &pi)?;
                let rhs = c.stationary_bound(v[x], t);
                report.rows_checked += 1;
                report.worst_stationary_ratio = report.worst_stationary_ratio.max(lhs / rhs);
                if lhs > rhs + CONTRACTION_TOL + DUAL_TOL {
                    return Err(Error::ContractionViolated { gamma: g, x, y: n, lhs, rhs });
                }
            }
        }
    }
    Ok(report)
}

/// Random Metropolis chains on `n` points `z ∈ [0, 2]` sharing one target:
/// `ρ(i, j) = |z_i − z_j|` and `V(γ, i) = (1 + γ/2) z_i²`.
pub fn random_reversible_chain(n: usize, tunings: usize, stream: &mut RngStream) -> Result<FiniteChain> {
    if n == 0 || n > MAX_STATES || tunings == 0 {
        return Err(Error::ParamOutOfRange(format!("need 1..={MAX_STATES} states and a tuning, got {n}, {tunings}")));
    }
    let z: Vec<f64> = (0..n).map(|_| 2.0 * stream.uniform()).collect();
    let pi: Vec<f64> = (0..n).map(|_| 0.2 + stream.uniform()).collect();
    let mut kernels = Vec::with_capacity(tunings);
    let mut v = Vec::with_capacity(tunings);
    for g in 0..tunings {
        let mut q = DMatrix::from_fn(n, n, |_, _| stream.uniform());
        q = (&q + q.transpose()) * 0.5;
        q.fill_diagonal(0.0);
        let max_row = (0..n).map(|i| q.row(i).sum()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        q /= max_row;
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut off = 0.0;
            for j in 0..n {
                if i != j {
                    p[(i, j)] = q[(i, j)] * (pi[j] / pi[i]).min(1.0);
                    off += p[(i, j)];
                }
            }
            p[(i, i)] = (1.0 - off).max(0.0);
        }
        kernels.push(p);
        v.push(z.iter().map(|zi| (1.0 + g as f64 / 2.0) * zi * zi).collect());
    }
    let rho = DMatrix::from_fn(n, n, |i, j| (z[i] - z[j]).abs());
    FiniteChain::new(kernels, v, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_stream;

    #[test]
    fn worked_constants() {
        let c = harris_constants(0.5, 1.0, 0.2, 0.2, 0.1).unwrap();
        let f1 = (0.5f64 * 1.2 / 1.22 + 0.5).sqrt();
        assert!((c.beta_star - 0.05).abs() < 1e-15);
        assert!((c.r - 4.4).abs() < 1e-12);
        assert!((c.f1 - f1).abs() < 1e-15);
        assert!((c.f2 - 0.9f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.f2, c.f3);
        assert!((c.alpha_star - (1.0 - f1)).abs() < 1e-15);
        assert!((c.alpha_star - 0.00411).abs() < 5e-6);
        assert!(c.is_consistent());
    }

    #[test]
    fn boundary_beta_is_one() {
        let c = harris_constants(0.5, 0.05, 0.2, 0.2, 0.1).unwrap();
        assert!((c.beta_star - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vanishing_kappa_degenerates() {
        let c = harris_constants(0.5, 1.0, 1e-9, 0.2, 0.1).unwrap();
        assert!(c.f3 > 1.0 - 1e-9);
        assert!(c.alpha_star > 0.0 && c.alpha_star < 1e-9);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(harris_constants(1.0, 1.0, 0.2, 0.2, 0.1).is_err());
        assert!(harris_constants(0.5, 0.0, 0.2, 0.2, 0.1).is_err());
        assert!(harris_constants(0.5, 1.0, 0.2, 0.0, 0.1).is_err());
    }

    // two states at distance 0.5: W_{ρ∧1}(P(0), P(1)) = 0.5 |1 − a − b|
    #[test]
    fn two_state_chain() {
        let (a, b) = (0.3, 0.4);
        let p = DMatrix::from_row_slice(2, 2, &[1.0 - a, a, b, 1.0 - b]);
        let rho = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let chain = FiniteChain::new(vec![p], vec![vec![0.0, 0.0]], rho).unwrap();
        assert!((chain.capped_distance(0, 0, 1).unwrap() - 0.5 * 0.3).abs() < 1e-15);
        let (k, kappa, alpha) = fit_harris_inputs(&chain, 0.5, 0.1).unwrap();
        assert!((kappa - 0.7).abs() < 1e-12);
        assert!((alpha - 0.85).abs() < 1e-12);
        let c = harris_constants(0.5, k, kappa, alpha, 0.1).unwrap();
        let rep = verify_harris_contraction(&chain, &c, 20).unwrap();
        assert_eq!(rep.pairs_checked, 1);
        assert!(rep.worst_ratio <= 1.0 - c.alpha_star);
    }

    #[test]
    fn rank_one_chain_contracts_to_zero() {
        let p = DMatrix::from_row_slice(3, 3, &[0.2, 0.3, 0.5, 0.2, 0.3, 0.5, 0.2, 0.3, 0.5]);
        let rho = DMatrix::from_fn(3, 3, |i, j| (i as f64 - j as f64).abs() * 0.7);
        let chain = FiniteChain::new(vec![p], vec![vec![0.0, 1.0, 2.0]], rho).unwrap();
        let (k, kappa, alpha) = fit_harris_inputs(&chain, 0.5, 0.1).unwrap();
        let c = harris_constants(0.5, k, kappa, alpha, 0.1).unwrap();
        let rep = verify_harris_contraction(&chain, &c, 5).unwrap();
        assert_eq!(rep.worst_ratio, 0.0);
    }

    #[test]
    fn hypothesis_failure_names_tuning() {
        let p = DMatrix::identity(2, 2);
        let rho = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let chain = FiniteChain::new(vec![p], vec![vec![0.0, 0.0]], rho).unwrap();
        let c = harris_constants(0.5, 1.0, 0.2, 0.2, 0.1).unwrap();
        assert!(matches!(
            verify_harris_contraction(&chain, &c, 3),
            Err(Error::HypothesisFailed { gamma: 0, .. })
        ));
    }

    #[test]
    fn random_chains_verify() {
        let mut rng = make_stream(71, 0);
        let mut passed = 0;
        while passed < 10 {
            let chain = random_reversible_chain(6, 2, &mut rng).unwrap();
            let (k, kappa, alpha) = fit_harris_inputs(&chain, 0.5, 0.1).unwrap();
            let Ok(c) = harris_constants(0.5, k, kappa, alpha, 0.1) else { continue };
            verify_harris_contraction(&chain, &c, 10).unwrap();
            passed += 1;
        }
    }
}
