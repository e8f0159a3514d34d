//! Parameterized Markov kernel families `P_γ`.
//!
//! Every family draws its noise first and then applies a deterministic
//! update, so the coupled step is literally the same noise pushed through two
//! (state, tuning) pairs. Each marginal of [`KernelFamily::coupled_step`] is
//! bit-identical to [`KernelFamily::step`] on a clone of the stream.

mod discrete_ar;
mod gaussian_ar;
mod langevin;
mod rwm;

pub use discrete_ar::{discrete_ar_law, discrete_ar_step, DISCRETE_AR_MAX_ATOMS};
pub use gaussian_ar::{gaussian_ar_moments, gaussian_ar_step, GaussianAr};
pub use langevin::{
    diffusion_step, ula_quadratic_moments, ula_step, Diffusion, Gradient, Potential, Ula,
    DEFAULT_SUBSTEPS,
};
pub use rwm::{discrete_rwm_step, DiscreteRwm, RegularGrid, DEFAULT_TRUNC_TOL};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::PsdMatrix;
use crate::rng::RngStream;

/// A point of the state space of one of the kernel families.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Real(f64),
    Vector(DVector<f64>),
    Grid(usize),
}

impl State {
    pub fn vector(values: &[f64]) -> State {
        State::Vector(DVector::from_column_slice(values))
    }

    pub fn as_real(&self) -> Result<f64> {
        match self {
            State::Real(x) => Ok(*x),
            other => Err(Error::VariantMismatch(format!("expected a real state, got {other:?}"))),
        }
    }

    pub fn as_vector(&self) -> Result<&DVector<f64>> {
        match self {
            State::Vector(x) => Ok(x),
            other => Err(Error::VariantMismatch(format!(
                "expected a vector state, got {other:?}"
            ))),
        }
    }

    pub fn as_grid(&self) -> Result<usize> {
        match self {
            State::Grid(i) => Ok(*i),
            other => Err(Error::VariantMismatch(format!(
                "expected a grid-index state, got {other:?}"
            ))),
        }
    }
}

/// Tuning parameter `γ` of a kernel family.
#[derive(Clone, Debug, PartialEq)]
pub enum TuningParam {
    /// Base `γ ≥ 2` of the discrete auto-regression.
    DiscreteBase(u32),
    /// Coefficient of the Gaussian auto-regression.
    ArCoef(f64),
    /// Preconditioning (or proposal covariance) matrix `M(γ)`.
    MatrixScale(PsdMatrix),
    /// Preconditioner plus discretization step of the unadjusted Langevin kernel.
    Langevin { m: PsdMatrix, h: f64 },
}

impl TuningParam {
    pub fn variant_name(&self) -> &'static str {
        match self {
            TuningParam::DiscreteBase(_) => "DiscreteBase",
            TuningParam::ArCoef(_) => "ArCoef",
            TuningParam::MatrixScale(_) => "MatrixScale",
            TuningParam::Langevin { .. } => "LangevinTuning",
        }
    }

    pub fn same_variant(&self, other: &TuningParam) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }

    /// Distance between two tunings of the same variant: absolute difference
    /// for scalars, spectral norm for matrices, and their sum for Langevin
    /// tunings.
    pub fn distance(&self, other: &TuningParam) -> Result<f64> {
        match (self, other) {
            (TuningParam::DiscreteBase(a), TuningParam::DiscreteBase(b)) => {
                Ok((*a as f64 - *b as f64).abs())
            }
            (TuningParam::ArCoef(a), TuningParam::ArCoef(b)) => Ok((a - b).abs()),
            (TuningParam::MatrixScale(a), TuningParam::MatrixScale(b)) => {
                Ok(a.operator_distance(b))
            }
            (TuningParam::Langevin { m: ma, h: ha }, TuningParam::Langevin { m: mb, h: hb }) => {
                Ok(ma.operator_distance(mb) + (ha - hb).abs())
            }
            (a, b) => Err(Error::VariantMismatch(format!(
                "cannot compare {} with {}",
                a.variant_name(),
                b.variant_name()
            ))),
        }
    }

    /// Compact text form used in tables.
    pub fn describe(&self) -> String {
        fn mat(m: &PsdMatrix) -> String {
            let a = m.as_matrix();
            let rows: Vec<String> = (0..a.nrows())
                .map(|i| {
                    (0..a.ncols())
                        .map(|j| a[(i, j)].to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            rows.join(";")
        }
        match self {
            TuningParam::DiscreteBase(g) => g.to_string(),
            TuningParam::ArCoef(g) => g.to_string(),
            TuningParam::MatrixScale(m) => mat(m),
            TuningParam::Langevin { m, h } => format!("h={h}|{}", mat(m)),
        }
    }

    pub fn matrix(&self) -> Option<&PsdMatrix> {
        match self {
            TuningParam::MatrixScale(m) | TuningParam::Langevin { m, .. } => Some(m),
            _ => None,
        }
    }
}

/// One of the five kernel families.
#[derive(Clone, Debug)]
pub enum KernelFamily {
    DiscreteAr,
    GaussianAr(GaussianAr),
    DiscreteRwm(DiscreteRwm),
    Ula(Ula),
    Diffusion(Diffusion),
}

/// Noise consumed by one transition.
#[derive(Clone, Debug)]
pub(crate) enum Noise {
    Uniform(f64),
    Normal(DVector<f64>),
    Proposal { pick: f64, accept: f64 },
    Path(DMatrix<f64>),
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::DiscreteAr => "discrete_ar",
            KernelFamily::GaussianAr(_) => "gaussian_ar",
            KernelFamily::DiscreteRwm(_) => "discrete_rwm",
            KernelFamily::Ula(_) => "ula",
            KernelFamily::Diffusion(_) => "diffusion",
        }
    }

    /// Dimension of the embedded state coordinates.
    pub fn state_dim(&self) -> usize {
        match self {
            KernelFamily::DiscreteAr => 1,
            KernelFamily::GaussianAr(k) => k.dim(),
            KernelFamily::DiscreteRwm(k) => k.grid().dim(),
            KernelFamily::Ula(k) => k.potential().dim(),
            KernelFamily::Diffusion(k) => k.potential().dim(),
        }
    }

    /// Coordinates of a state in Euclidean space (grid indices map to grid points).
    pub fn embed(&self, x: &State) -> Result<Vec<f64>> {
        match (self, x) {
            (KernelFamily::DiscreteAr, State::Real(v)) => Ok(vec![*v]),
            (KernelFamily::DiscreteRwm(k), State::Grid(i)) => {
                if *i >= k.grid().len() {
                    return Err(Error::DomainError(format!("grid index {i} out of range")));
                }
                Ok(k.grid().point(*i))
            }
            (
                KernelFamily::GaussianAr(_) | KernelFamily::Ula(_) | KernelFamily::Diffusion(_),
                State::Vector(v),
            ) => Ok(v.iter().copied().collect()),
            (k, s) => Err(Error::VariantMismatch(format!(
                "state {s:?} does not belong to kernel {}",
                k.name()
            ))),
        }
    }

    /// Checks that `tuning` is the variant this family accepts and satisfies
    /// its range constraints.
    pub fn validate_tuning(&self, tuning: &TuningParam) -> Result<()> {
        match (self, tuning) {
            (KernelFamily::DiscreteAr, TuningParam::DiscreteBase(g)) => {
                if *g < 2 {
                    return Err(Error::DomainError(format!("discrete base {g} < 2")));
                }
                Ok(())
            }
            (KernelFamily::GaussianAr(k), TuningParam::ArCoef(g)) => k.check_coef(*g),
            (KernelFamily::DiscreteRwm(k), TuningParam::MatrixScale(m)) => k.check_matrix(m),
            (KernelFamily::Ula(k), TuningParam::Langevin { m, h }) => {
                k.check_step(*h)?;
                k.check_matrix(m)
            }
            (KernelFamily::Diffusion(k), TuningParam::MatrixScale(m)) => k.check_matrix(m),
            (k, t) => Err(Error::VariantMismatch(format!(
                "kernel {} does not accept tuning {}",
                k.name(),
                t.variant_name()
            ))),
        }
    }

    pub(crate) fn draw_noise(&self, rng: &mut RngStream) -> Noise {
        match self {
            KernelFamily::DiscreteAr => Noise::Uniform(rng.uniform()),
            KernelFamily::GaussianAr(k) => Noise::Normal(rng.normal_vector(k.dim())),
            KernelFamily::DiscreteRwm(_) => Noise::Proposal {
                pick: rng.uniform(),
                accept: rng.uniform(),
            },
            KernelFamily::Ula(k) => Noise::Normal(rng.normal_vector(k.potential().dim())),
            KernelFamily::Diffusion(k) => {
                let d = k.potential().dim();
                let n = k.substeps();
                Noise::Path(DMatrix::from_fn(d, n, |_, _| rng.standard_normal()))
            }
        }
    }

    pub(crate) fn apply(&self, x: &State, tuning: &TuningParam, noise: &Noise) -> Result<State> {
        match (self, tuning, noise) {
            (KernelFamily::DiscreteAr, TuningParam::DiscreteBase(g), Noise::Uniform(u)) => {
                discrete_ar::apply(x.as_real()?, *g, *u).map(State::Real)
            }
            (KernelFamily::GaussianAr(k), TuningParam::ArCoef(g), Noise::Normal(z)) => {
                k.apply(x.as_vector()?, *g, z).map(State::Vector)
            }
            (
                KernelFamily::DiscreteRwm(k),
                TuningParam::MatrixScale(m),
                Noise::Proposal { pick, accept },
            ) => k.apply(x.as_grid()?, m, *pick, *accept).map(State::Grid),
            (KernelFamily::Ula(k), TuningParam::Langevin { m, h }, Noise::Normal(z)) => {
                k.apply(x.as_vector()?, m, *h, z).map(State::Vector)
            }
            (KernelFamily::Diffusion(k), TuningParam::MatrixScale(m), Noise::Path(w)) => {
                k.apply(x.as_vector()?, m, w).map(State::Vector)
            }
            (k, t, _) => Err(Error::VariantMismatch(format!(
                "kernel {} does not accept tuning {}",
                k.name(),
                t.variant_name()
            ))),
        }
    }

    /// One transition `x → X₁ ~ P_γ(x, ·)`.
    pub fn step(&self, x: &State, tuning: &TuningParam, rng: &mut RngStream) -> Result<State> {
        let noise = self.draw_noise(rng);
        self.apply(x, tuning, &noise)
    }

    /// Shared-noise coupling of `P_{γ'}(x, ·)` and `P_γ(y, ·)`.
    pub fn coupled_step(
        &self,
        x: &State,
        tuning_x: &TuningParam,
        y: &State,
        tuning_y: &TuningParam,
        rng: &mut RngStream,
    ) -> Result<(State, State)> {
        if !tuning_x.same_variant(tuning_y) {
            return Err(Error::VariantMismatch(format!(
                "coupled tunings differ: {} vs {}",
                tuning_x.variant_name(),
                tuning_y.variant_name()
            )));
        }
        let noise = self.draw_noise(rng);
        Ok((self.apply(x, tuning_x, &noise)?, self.apply(y, tuning_y, &noise)?))
    }

    /// Distance between two states in the embedding metric.
    pub fn state_distance(&self, x: &State, y: &State) -> Result<f64> {
        let a = self.embed(x)?;
        let b = self.embed(y)?;
        Ok(a.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::EmpiricalMeasure;
    use crate::rng::make_stream;
    use crate::transport::sliced_w1;

    fn kernels() -> Vec<(KernelFamily, TuningParam, State)> {
        let quad = Potential::quadratic(PsdMatrix::diag(&[1.0, 2.0]).unwrap()).unwrap();
        let grid = RegularGrid::new(vec![-1.0], vec![0.2], vec![11]).unwrap();
        let rwm = DiscreteRwm::new(grid, |p| (-p[0] * p[0]).exp(), DEFAULT_TRUNC_TOL).unwrap();
        vec![
            (KernelFamily::DiscreteAr, TuningParam::DiscreteBase(3), State::Real(0.4)),
            (
                KernelFamily::GaussianAr(GaussianAr::new(PsdMatrix::diag(&[1.0, 0.5]).unwrap(), 0.95).unwrap()),
                TuningParam::ArCoef(0.6),
                State::vector(&[1.0, -1.0]),
            ),
            (
                KernelFamily::DiscreteRwm(rwm),
                TuningParam::MatrixScale(PsdMatrix::diag(&[0.1]).unwrap()),
                State::Grid(3),
            ),
            (
                KernelFamily::Ula(Ula::new(quad.clone(), 0.1).unwrap()),
                TuningParam::Langevin { m: PsdMatrix::identity(2), h: 0.2 },
                State::vector(&[0.5, 0.5]),
            ),
            (
                KernelFamily::Diffusion(Diffusion::new(quad, 8).unwrap()),
                TuningParam::MatrixScale(PsdMatrix::identity(2)),
                State::vector(&[0.5, 0.5]),
            ),
        ]
    }

    #[test]
    fn diagonal_coupling_is_identical() {
        for (k, g, x) in kernels() {
            let mut rng = make_stream(3, 0);
            let (a, b) = k.coupled_step(&x, &g, &x, &g, &mut rng).unwrap();
            assert_eq!(a, b, "{}", k.name());
        }
    }

    #[test]
    fn coupled_marginal_is_bitwise_single_step() {
        for (k, g, x) in kernels() {
            let mut r1 = make_stream(4, 0);
            let mut r2 = make_stream(4, 0);
            let y = x.clone();
            for _ in 0..50 {
                let single = k.step(&x, &g, &mut r1).unwrap();
                let (first, _) = k.coupled_step(&x, &g, &y, &g, &mut r2).unwrap();
                assert_eq!(single, first, "{}", k.name());
            }
        }
    }

    #[test]
    fn coupled_marginal_matches_single_step_law() {
        // independent streams for the two samples; sliced-W1 must sit at the MC floor
        let (k, g, x) = kernels().swap_remove(1);
        let y = State::vector(&[-3.0, 2.0]);
        let gy = TuningParam::ArCoef(0.3);
        let mut ra = make_stream(5, 0);
        let mut rb = make_stream(5, 1);
        let n = 100_000;
        let mut first = Vec::with_capacity(n);
        let mut single = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, _) = k.coupled_step(&x, &g, &y, &gy, &mut ra).unwrap();
            first.push(k.embed(&a).unwrap());
            single.push(k.embed(&k.step(&x, &g, &mut rb).unwrap()).unwrap());
        }
        let mu = EmpiricalMeasure::uniform(first).unwrap();
        let nu = EmpiricalMeasure::uniform(single).unwrap();
        let sw = sliced_w1(&mu, &nu, 32, &mut make_stream(5, 2)).unwrap();
        // two-sample W1 floor for n = 1e5 unit-scale samples is O(n^{-1/2})
        assert!(sw.cost < 0.02, "sliced W1 = {}", sw.cost);
    }

    #[test]
    fn variant_mismatch_is_reported() {
        let k = KernelFamily::DiscreteAr;
        let mut rng = make_stream(1, 0);
        let r = k.coupled_step(
            &State::Real(0.1),
            &TuningParam::DiscreteBase(2),
            &State::Real(0.1),
            &TuningParam::ArCoef(0.5),
            &mut rng,
        );
        assert!(matches!(r, Err(Error::VariantMismatch(_))));
        assert!(k.validate_tuning(&TuningParam::ArCoef(0.5)).is_err());
    }

    #[test]
    fn tuning_distance() {
        let a = TuningParam::MatrixScale(PsdMatrix::diag(&[1.0, 0.5]).unwrap());
        let b = TuningParam::MatrixScale(PsdMatrix::diag(&[0.7, 0.5]).unwrap());
        assert!((a.distance(&b).unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(TuningParam::DiscreteBase(2).distance(&TuningParam::DiscreteBase(4)).unwrap(), 2.0);
    }
}
