//! Random-walk Metropolis–Hastings on a finite regular grid with a discrete
//! Gaussian proposal.
//!
//! The proposal lives on the infinite lattice spanned by the grid; its
//! normalizer is summed over lattice offsets until the remaining shells carry
//! less than `trunc_tol` of the mass. Proposals that land off the grid have
//! zero target density and are rejected.

use nalgebra::{DMatrix, DVector};

use super::TuningParam;
use crate::error::{Error, Result};
use crate::linalg::PsdMatrix;
use crate::markov;
use crate::rng::RngStream;

pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;

/// Largest number of lattice offsets enumerated for one normalizer.
const MAX_OFFSETS: usize = 1 << 24;

/// Axis-aligned lattice `origin + spacing ⊙ k`, `0 ≤ k_i < counts_i`, indexed
/// in row-major order (last coordinate fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct RegularGrid {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    counts: Vec<usize>,
}

impl RegularGrid {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let d = origin.len();
        if d == 0 {
            return Err(Error::DimensionError("zero-dimensional grid".into()));
        }
        if spacing.len() != d || counts.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if spacing.len() != d { spacing.len() } else { counts.len() },
            });
        }
        if spacing.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::DomainError("grid spacing must be positive".into()));
        }
        if counts.iter().any(|&c| c == 0) {
            return Err(Error::DomainError("grid counts must be positive".into()));
        }
        Ok(Self {
            origin,
            spacing,
            counts,
        })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn coords(&self, mut i: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            c[a] = i % self.counts[a];
            i /= self.counts[a];
        }
        c
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.coords(i)
            .iter()
            .enumerate()
            .map(|(a, &k)| self.origin[a] + self.spacing[a] * k as f64)
            .collect()
    }

    /// Index of `coords + offset`, or `None` when it leaves the grid.
    pub fn shifted(&self, coords: &[usize], offset: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for a in 0..self.dim() {
            let k = coords[a] as i64 + offset[a];
            if k < 0 || k >= self.counts[a] as i64 {
                return None;
            }
            idx = idx * self.counts[a] + k as usize;
        }
        Some(idx)
    }
}

/// Discrete Gaussian proposal for one covariance: the lattice offsets that can
/// reach the grid and their cumulative probabilities.
#[derive(Clone, Debug)]
pub struct ProposalTable {
    dim: usize,
    offsets: Vec<i64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    normalizer: f64,
}

impl ProposalTable {
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn offset(&self, j: usize) -> &[i64] {
        &self.offsets[j * self.dim..(j + 1) * self.dim]
    }

    /// Proposal probability of offset `j`.
    pub fn prob(&self, j: usize) -> f64 {
        self.probs[j]
    }

    /// Offset selected by a uniform draw, or `None` when the draw falls in the
    /// mass that can never reach the grid.
    pub fn pick(&self, u: f64) -> Option<&[i64]> {
        let j = self.cumulative.partition_point(|&c| c <= u);
        (j < self.probs.len()).then(|| self.offset(j))
    }
}

/// Calls `f` on every offset with Chebyshev norm exactly `r`.
fn for_shell(dim: usize, r: i64, f: &mut impl FnMut(&[i64])) {
    let mut k = vec![-r; dim];
    loop {
        if k.iter().any(|v| v.abs() == r) {
            f(&k);
        }
        let mut a = dim;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            if k[a] < r {
                k[a] += 1;
                break;
            }
            k[a] = -r;
        }
    }
}

/// The random-walk Metropolis kernel over a [`RegularGrid`].
#[derive(Clone, Debug)]
pub struct DiscreteRwm {
    grid: RegularGrid,
    density: Vec<f64>,
    trunc_tol: f64,
    eigen_lo: f64,
    eigen_hi: f64,
}

impl DiscreteRwm {
    /// Evaluates `target` on the grid. Rejects non-finite or negative values,
    /// an identically zero target and support points with no supported
    /// lattice neighbour.
    pub fn new(grid: RegularGrid, target: impl Fn(&[f64]) -> f64, trunc_tol: f64) -> Result<Self> {
        let density: Vec<f64> = (0..grid.len()).map(|i| target(&grid.point(i))).collect();
        Self::from_values(grid, density, trunc_tol)
    }

    pub fn from_values(grid: RegularGrid, density: Vec<f64>, trunc_tol: f64) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: density.len(),
            });
        }
        if !(trunc_tol > 0.0 && trunc_tol < 1.0) {
            return Err(Error::ParamOutOfRange(format!(
                "trunc_tol = {trunc_tol} must lie in (0, 1)"
            )));
        }
        if let Some(i) = density.iter().position(|f| !(*f >= 0.0 && f.is_finite())) {
            return Err(Error::DomainError(format!(
                "target density {} at grid point {i} is negative or non-finite",
                density[i]
            )));
        }
        let support = density.iter().filter(|&&f| f > 0.0).count();
        if support == 0 {
            return Err(Error::DomainError("target density vanishes on the grid".into()));
        }
        if support > 1 {
            let d = grid.dim();
            for i in (0..grid.len()).filter(|&i| density[i] > 0.0) {
                let c = grid.coords(i);
                let mut off = vec![0i64; d];
                let connected = (0..d).any(|a| {
                    [-1i64, 1].iter().any(|&s| {
                        off.iter_mut().for_each(|v| *v = 0);
                        off[a] = s;
                        grid.shifted(&c, &off).is_some_and(|j| density[j] > 0.0)
                    })
                });
                if !connected {
                    return Err(Error::DomainError(format!(
                        "grid point {i} has positive density but no supported neighbour"
                    )));
                }
            }
        }
        Ok(Self {
            grid,
            density,
            trunc_tol,
            eigen_lo: 0.0,
            eigen_hi: f64::INFINITY,
        })
    }

    /// Restricts admissible proposal covariances to spectra in `[lo, hi]`.
    pub fn with_eigen_box(mut self, lo: f64, hi: f64) -> Self {
        self.eigen_lo = lo;
        self.eigen_hi = hi;
        self
    }

    pub fn grid(&self) -> &RegularGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }

    pub fn eigen_box(&self) -> (f64, f64) {
        (self.eigen_lo, self.eigen_hi)
    }

    pub(crate) fn check_matrix(&self, m: &PsdMatrix) -> Result<()> {
        if m.dim() != self.grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.dim(),
                found: m.dim(),
            });
        }
        if m.min_eigenvalue() <= 0.0 {
            return Err(Error::DomainError(
                "proposal covariance must be positive definite".into(),
            ));
        }
        if !m.spectrum_within(self.eigen_lo, self.eigen_hi, 1e-9) {
            return Err(Error::DomainError(format!(
                "proposal covariance spectrum outside [{}, {}]",
                self.eigen_lo, self.eigen_hi
            )));
        }
        Ok(())
    }

    /// Builds the proposal table for covariance `m`.
    pub fn proposal_table(&self, m: &PsdMatrix) -> Result<ProposalTable> {
        self.check_matrix(m)?;
        let d = self.grid.dim();
        let prec = m.inverse(0.0).ok_or_else(|| {
            Error::DomainError("proposal covariance must be positive definite".into())
        })?;
        let h = &self.grid.spacing;
        let energy = |k: &[i64]| {
            let v = DVector::from_fn(d, |a, _| k[a] as f64 * h[a]);
            (-0.5 * v.dot(&(&prec * &v))).exp()
        };
        let reach: Vec<i64> = self.grid.counts.iter().map(|&c| c as i64 - 1).collect();
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let mut total = 0.0;
        let mut seen = 0usize;
        let min_h = h.iter().cloned().fold(f64::INFINITY, f64::min);
        let sd = m.max_eigenvalue().sqrt();
        let mut r = 0i64;
        loop {
            let mut shell = 0.0;
            for_shell(d, r, &mut |k| {
                let w = energy(k);
                shell += w;
                seen += 1;
                if k.iter().zip(&reach).all(|(v, &c)| v.abs() <= c) {
                    offsets.extend_from_slice(k);
                    weights.push(w);
                }
            });
            total += shell;
            let past_grid = reach.iter().all(|&c| r >= c);
            let past_bulk = r as f64 * min_h >= 3.0 * sd;
            if past_grid && past_bulk && shell <= self.trunc_tol * total {
                break;
            }
            if seen > MAX_OFFSETS {
                return Err(Error::SizeCap {
                    rows: seen,
                    cols: 1,
                    cap: MAX_OFFSETS,
                });
            }
            r += 1;
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(ProposalTable {
            dim: d,
            offsets,
            probs,
            cumulative,
            normalizer: total,
        })
    }

    /// One Metropolis transition with a prebuilt proposal table.
    pub fn apply_with_table(&self, i: usize, table: &ProposalTable, pick: f64, accept: f64) -> Result<usize> {
        if i >= self.grid.len() {
            return Err(Error::DomainError(format!("grid index {i} out of range")));
        }
        let fi = self.density[i];
        if fi <= 0.0 {
            return Err(Error::ZeroDensity { index: i });
        }
        let Some(off) = table.pick(pick) else {
            return Ok(i);
        };
        let Some(j) = self.grid.shifted(&self.grid.coords(i), off) else {
            return Ok(i);
        };
        let fj = self.density[j];
        if fj >= fi || accept < fj / fi {
            Ok(j)
        } else {
            Ok(i)
        }
    }

    pub(super) fn apply(&self, i: usize, m: &PsdMatrix, pick: f64, accept: f64) -> Result<usize> {
        let table = self.proposal_table(m)?;
        self.apply_with_table(i, &table, pick, accept)
    }

    /// Exact transition matrix over every grid point. Rows of zero-density
    /// points are absorbing.
    pub fn transition_matrix(&self, m: &PsdMatrix) -> Result<DMatrix<f64>> {
        let table = self.proposal_table(m)?;
        let n = self.grid.len();
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            let fi = self.density[i];
            if fi <= 0.0 {
                p[(i, i)] = 1.0;
                continue;
            }
            let c = self.grid.coords(i);
            let mut moved = 0.0;
            for k in 0..table.len() {
                if let Some(j) = self.grid.shifted(&c, table.offset(k)) {
                    if j != i {
                        let q = table.prob(k) * (self.density[j] / fi).min(1.0);
                        p[(i, j)] += q;
                        moved += q;
                    }
                }
            }
            p[(i, i)] = 1.0 - moved;
        }
        Ok(p)
    }

    /// Target law on the grid: the normalized density values.
    pub fn target_law(&self) -> Vec<f64> {
        let total: f64 = self.density.iter().sum();
        self.density.iter().map(|f| f / total).collect()
    }

    /// Indices of grid points with positive density.
    pub fn support(&self) -> Vec<usize> {
        (0..self.grid.len()).filter(|&i| self.density[i] > 0.0).collect()
    }

    /// Stationary law of the exact transition matrix restricted to the
    /// support, embedded back into the full grid.
    pub fn exact_stationary(&self, m: &PsdMatrix) -> Result<Vec<f64>> {
        let p = self.transition_matrix(m)?;
        let supp = self.support();
        let sub = DMatrix::from_fn(supp.len(), supp.len(), |a, b| p[(supp[a], supp[b])]);
        let pi = markov::stationary_distribution(&sub)?;
        let mut out = vec![0.0; self.grid.len()];
        for (a, &i) in supp.iter().enumerate() {
            out[i] = pi[a];
        }
        Ok(out)
    }

    /// Dobrushin coefficient of the transition matrix on the support.
    pub fn dobrushin_coefficient(&self, m: &PsdMatrix) -> Result<f64> {
        let p = self.transition_matrix(m)?;
        let supp = self.support();
        let sub = DMatrix::from_fn(supp.len(), supp.len(), |a, b| p[(supp[a], supp[b])]);
        Ok(markov::dobrushin_coefficient(&sub))
    }
}

/// One Metropolis transition from grid index `i`.
pub fn discrete_rwm_step(
    i: usize,
    tuning: &TuningParam,
    kernel: &DiscreteRwm,
    stream: &mut RngStream,
) -> Result<usize> {
    match tuning {
        TuningParam::MatrixScale(m) => {
            let pick = stream.uniform();
            let accept = stream.uniform();
            kernel.apply(i, m, pick, accept)
        }
        other => Err(Error::VariantMismatch(format!(
            "discrete RWM expects a MatrixScale tuning, got {}",
            other.variant_name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_stream;

    fn line(n: usize, h: f64) -> RegularGrid {
        RegularGrid::new(vec![0.0], vec![h], vec![n]).unwrap()
    }

    #[test]
    fn flat_target_always_accepts() {
        let k = DiscreteRwm::new(line(10, 0.1), |_| 1.0, DEFAULT_TRUNC_TOL).unwrap();
        let m = PsdMatrix::diag(&[0.05]).unwrap();
        let table = k.proposal_table(&m).unwrap();
        let mut rng = make_stream(0, 0);
        for _ in 0..1000 {
            let pick = rng.uniform();
            let i = (rng.uniform() * 10.0) as usize;
            let j = k.apply_with_table(i, &table, pick, 1.0 - 1e-16).unwrap();
            if let Some(off) = table.pick(pick) {
                if let Some(target) = k.grid().shifted(&[i], off) {
                    assert_eq!(j, target);
                }
            }
        }
    }

    // hand computation: on the lattice hℤ, g(0) = 1/Z, g(±h) = e^{-h²/2s}/Z
    #[test]
    fn two_point_matrix_matches_hand_formula() {
        let h = 0.5;
        let s = 0.3;
        let (f0, f1) = (1.0, 0.4);
        let k = DiscreteRwm::from_values(line(2, h), vec![f0, f1], DEFAULT_TRUNC_TOL).unwrap();
        let p = k.transition_matrix(&PsdMatrix::diag(&[s]).unwrap()).unwrap();
        let z: f64 = (-200i64..=200)
            .map(|j| (-(j as f64 * h).powi(2) / (2.0 * s)).exp())
            .sum();
        let g1 = (-(h * h) / (2.0 * s)).exp() / z;
        let expected = [[1.0 - g1 * f1 / f0, g1 * f1 / f0], [g1, 1.0 - g1]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - expected[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rows_sum_to_one() {
        let g = RegularGrid::new(vec![-1.0, -1.0], vec![0.25, 0.5], vec![9, 5]).unwrap();
        let k = DiscreteRwm::new(g, |p| (-(p[0] * p[0] + p[1] * p[1])).exp(), DEFAULT_TRUNC_TOL).unwrap();
        let m = PsdMatrix::new(DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.2])).unwrap();
        let p = k.transition_matrix(&m).unwrap();
        for i in 0..p.nrows() {
            assert!((p.row(i).sum() - 1.0).abs() < 1e-12);
            assert!(p.row(i).iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn stationary_law_is_normalized_target() {
        let k = DiscreteRwm::new(line(20, 0.1), |x| (-8.0 * (x[0] - 0.9).powi(2)).exp() + 0.05, DEFAULT_TRUNC_TOL)
            .unwrap();
        let pi = k.exact_stationary(&PsdMatrix::diag(&[0.04]).unwrap()).unwrap();
        for (a, b) in pi.iter().zip(k.target_law()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_density_state_is_an_error() {
        let k = DiscreteRwm::from_values(line(4, 1.0), vec![1.0, 1.0, 0.0, 0.0], DEFAULT_TRUNC_TOL).unwrap();
        let mut rng = make_stream(1, 0);
        let m = TuningParam::MatrixScale(PsdMatrix::identity(1));
        assert!(matches!(
            discrete_rwm_step(3, &m, &k, &mut rng),
            Err(Error::ZeroDensity { index: 3 })
        ));
    }

    #[test]
    fn degenerate_targets_rejected() {
        assert!(DiscreteRwm::from_values(line(3, 1.0), vec![0.0; 3], DEFAULT_TRUNC_TOL).is_err());
        assert!(DiscreteRwm::from_values(line(3, 1.0), vec![1.0, 0.0, 1.0], DEFAULT_TRUNC_TOL).is_err());
        assert!(DiscreteRwm::from_values(line(3, 1.0), vec![1.0, f64::NAN, 1.0], DEFAULT_TRUNC_TOL).is_err());
    }

    #[test]
    fn dobrushin_in_unit_interval() {
        let k = DiscreteRwm::new(line(12, 0.1), |x| 1.0 + x[0], DEFAULT_TRUNC_TOL).unwrap();
        let c = k.dobrushin_coefficient(&PsdMatrix::diag(&[0.5]).unwrap()).unwrap();
        assert!(c > 0.0 && c < 1.0);
    }
}
