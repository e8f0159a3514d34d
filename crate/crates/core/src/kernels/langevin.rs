//! Langevin-type kernels: the unadjusted Langevin algorithm and the time-1
//! map of the preconditioned overdamped Langevin diffusion.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::TuningParam;
use crate::error::{Error, Result};
use crate::linalg::PsdMatrix;
use crate::rng::RngStream;

/// Default Euler–Maruyama substeps for the time-1 diffusion map.
pub const DEFAULT_SUBSTEPS: usize = 64;

/// Relative slack on the closed step-size interval.
const STEP_TOL: f64 = 1e-12;
/// Slack on the preconditioner spectrum box.
const SPECTRUM_TOL: f64 = 1e-9;

pub type GradientFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Gradient {
    /// `V(x) = ½ xᵀ A x`, `∇V(x) = A x`.
    Quadratic(DMatrix<f64>),
    Custom(GradientFn),
}

impl fmt::Debug for Gradient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gradient::Quadratic(a) => f.debug_tuple("Quadratic").field(a).finish(),
            Gradient::Custom(_) => f.write_str("Custom(<fn>)"),
        }
    }
}

/// A potential `V` with `α`-strongly convex, `β`-smooth gradient.
#[derive(Clone, Debug)]
pub struct Potential {
    dim: usize,
    gradient: Gradient,
    convexity: f64,
    lipschitz: f64,
}

impl Potential {
    /// Quadratic potential; `α` and `β` are the extreme Hessian eigenvalues.
    pub fn quadratic(hessian: PsdMatrix) -> Result<Self> {
        let (vals, _) = hessian.eigen();
        let alpha = vals.min();
        let beta = vals.max();
        if !(alpha > 0.0) {
            return Err(Error::ParamOutOfRange(format!(
                "quadratic potential needs a positive-definite Hessian (smallest eigenvalue {alpha})"
            )));
        }
        Ok(Self {
            dim: hessian.dim(),
            gradient: Gradient::Quadratic(hessian.into_matrix()),
            convexity: alpha,
            lipschitz: beta,
        })
    }

    /// Custom gradient with claimed constants. Use [`Potential::verify_constants`]
    /// before trusting them.
    pub fn custom(dim: usize, gradient: GradientFn, convexity: f64, lipschitz: f64) -> Result<Self> {
        if !(convexity > 0.0 && lipschitz >= convexity) {
            return Err(Error::ParamOutOfRange(format!(
                "need 0 < alpha <= beta, got alpha = {convexity}, beta = {lipschitz}"
            )));
        }
        Ok(Self {
            dim,
            gradient: Gradient::Custom(gradient),
            convexity,
            lipschitz,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Strong-convexity constant `α`.
    pub fn convexity(&self) -> f64 {
        self.convexity
    }

    /// Gradient Lipschitz constant `β`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn hessian(&self) -> Option<&DMatrix<f64>> {
        match &self.gradient {
            Gradient::Quadratic(a) => Some(a),
            Gradient::Custom(_) => None,
        }
    }

    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.gradient {
            Gradient::Quadratic(a) => a * x,
            Gradient::Custom(f) => f(x),
        }
    }

    /// Checks the Lipschitz-gradient and strong-monotonicity inequalities on
    /// `pairs` random pairs drawn from the cube `[-radius, radius]^d`.
    pub fn verify_constants(&self, pairs: usize, radius: f64, rng: &mut RngStream) -> Result<()> {
        for _ in 0..pairs {
            let x = DVector::from_fn(self.dim, |_, _| radius * (2.0 * rng.uniform() - 1.0));
            let y = DVector::from_fn(self.dim, |_, _| radius * (2.0 * rng.uniform() - 1.0));
            let dx = &y - &x;
            let dg = self.grad(&y) - self.grad(&x);
            let d2 = dx.norm_squared();
            if dg.norm() > self.lipschitz * dx.norm() * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::ParamOutOfRange(format!(
                    "gradient Lipschitz bound beta = {} violated: |dg| = {}, |dx| = {}",
                    self.lipschitz,
                    dg.norm(),
                    dx.norm()
                )));
            }
            if dg.dot(&dx) < self.convexity * d2 * (1.0 - 1e-9) - 1e-12 {
                return Err(Error::ParamOutOfRange(format!(
                    "strong convexity alpha = {} violated: <dg, dx> = {}, |dx|^2 = {d2}",
                    self.convexity,
                    dg.dot(&dx)
                )));
            }
        }
        Ok(())
    }

    /// The preconditioned drift `M ∇V(M x)`.
    pub fn preconditioned_drift(&self, m: &PsdMatrix, x: &DVector<f64>) -> DVector<f64> {
        m.mul_vec(&self.grad(&m.mul_vec(x)))
    }
}

fn check_matrix_box(m: &PsdMatrix, dim: usize, floor: f64) -> Result<()> {
    if m.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.dim(),
        });
    }
    if !m.spectrum_within(floor, 1.0, SPECTRUM_TOL) {
        return Err(Error::DomainError(format!(
            "preconditioner spectrum outside [{floor}, 1]"
        )));
    }
    Ok(())
}

fn check_vec(x: &DVector<f64>, dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.len(),
        });
    }
    Ok(())
}

/// Unadjusted Langevin kernel `x − h M∇V(Mx) + √(2h) z` with step sizes in
/// `H = [h_min, 1/(α+β)]`.
#[derive(Clone, Debug)]
pub struct Ula {
    potential: Potential,
    h_min: f64,
    eigen_floor: f64,
}

impl Ula {
    pub fn new(potential: Potential, h_min: f64) -> Result<Self> {
        let h_max = 1.0 / (potential.convexity() + potential.lipschitz());
        if !(h_min > 0.0 && h_min <= h_max * (1.0 + STEP_TOL)) {
            return Err(Error::ParamOutOfRange(format!(
                "h_min = {h_min} must lie in (0, 1/(alpha+beta)] = (0, {h_max}]"
            )));
        }
        Ok(Self {
            potential,
            h_min,
            eigen_floor: 0.0,
        })
    }

    /// Lower bound `λ*` on the preconditioner spectrum.
    pub fn with_eigen_floor(mut self, floor: f64) -> Self {
        self.eigen_floor = floor;
        self
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn h_max(&self) -> f64 {
        1.0 / (self.potential.convexity() + self.potential.lipschitz())
    }

    pub fn eigen_floor(&self) -> f64 {
        self.eigen_floor
    }

    /// Squared one-step contraction factor `1 − 2 h_min αβ/(α+β)` of the
    /// shared-noise coupling.
    pub fn contraction_sq(&self) -> f64 {
        let (a, b) = (self.potential.convexity(), self.potential.lipschitz());
        1.0 - 2.0 * self.h_min * a * b / (a + b)
    }

    pub(crate) fn check_step(&self, h: f64) -> Result<()> {
        let h_max = self.h_max();
        if !(h >= self.h_min * (1.0 - STEP_TOL) && h <= h_max * (1.0 + STEP_TOL)) {
            return Err(Error::StepSizeOutOfRange {
                h,
                h_min: self.h_min,
                h_max,
            });
        }
        Ok(())
    }

    pub(crate) fn check_matrix(&self, m: &PsdMatrix) -> Result<()> {
        check_matrix_box(m, self.potential.dim(), self.eigen_floor)
    }

    pub(super) fn apply(
        &self,
        x: &DVector<f64>,
        m: &PsdMatrix,
        h: f64,
        z: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        self.check_step(h)?;
        check_vec(x, self.potential.dim())?;
        if m.dim() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: m.dim(),
            });
        }
        let drift = self.potential.preconditioned_drift(m, x);
        Ok(x - drift * h + z * (2.0 * h).sqrt())
    }
}

/// One unadjusted Langevin step.
pub fn ula_step(
    x: &DVector<f64>,
    tuning: &TuningParam,
    kernel: &Ula,
    stream: &mut RngStream,
) -> Result<DVector<f64>> {
    match tuning {
        TuningParam::Langevin { m, h } => {
            kernel.check_step(*h)?;
            let z = stream.normal_vector(kernel.potential.dim());
            kernel.apply(x, m, *h, &z)
        }
        other => Err(Error::VariantMismatch(format!(
            "ULA expects a Langevin tuning, got {}",
            other.variant_name()
        ))),
    }
}

/// Exact `t`-step law of ULA on a quadratic potential with fixed `(M, h)`:
/// the chain is linear-Gaussian with `B = I − h M A M`.
pub fn ula_quadratic_moments(
    x: &DVector<f64>,
    m: &PsdMatrix,
    h: f64,
    hessian: &DMatrix<f64>,
    t: u32,
) -> Result<(DVector<f64>, PsdMatrix)> {
    let d = x.len();
    if hessian.nrows() != d || m.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: hessian.nrows(),
        });
    }
    let mm = m.as_matrix();
    let b = DMatrix::identity(d, d) - mm * hessian * mm * h;
    let mut mean = x.clone();
    let mut cov = DMatrix::zeros(d, d);
    for _ in 0..t {
        mean = &b * mean;
        cov = &b * cov * b.transpose() + DMatrix::identity(d, d) * (2.0 * h);
    }
    let cov = (&cov + cov.transpose()) * 0.5;
    Ok((mean, PsdMatrix::new(cov)?))
}

/// Time-1 map of `dX = −M∇V(MX) dt + √2 dW`, integrated by Euler–Maruyama
/// with a fixed number of substeps (weak bias `O(1/substeps)`).
#[derive(Clone, Debug)]
pub struct Diffusion {
    potential: Potential,
    substeps: usize,
    eigen_floor: f64,
}

impl Diffusion {
    pub fn new(potential: Potential, substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::ParamOutOfRange("substeps must be at least 1".into()));
        }
        Ok(Self {
            potential,
            substeps,
            eigen_floor: 0.0,
        })
    }

    pub fn with_eigen_floor(mut self, floor: f64) -> Self {
        self.eigen_floor = floor;
        self
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    pub fn eigen_floor(&self) -> f64 {
        self.eigen_floor
    }

    pub(crate) fn check_matrix(&self, m: &PsdMatrix) -> Result<()> {
        check_matrix_box(m, self.potential.dim(), self.eigen_floor)
    }

    pub(super) fn apply(
        &self,
        x: &DVector<f64>,
        m: &PsdMatrix,
        increments: &DMatrix<f64>,
    ) -> Result<DVector<f64>> {
        check_vec(x, self.potential.dim())?;
        if m.dim() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: m.dim(),
            });
        }
        let dt = 1.0 / self.substeps as f64;
        let noise_scale = (2.0 * dt).sqrt();
        let mut y = x.clone();
        for k in 0..self.substeps {
            let drift = self.potential.preconditioned_drift(m, &y);
            y -= drift * dt;
            y += increments.column(k) * noise_scale;
        }
        Ok(y)
    }
}

/// One time-1 diffusion transition.
pub fn diffusion_step(
    x: &DVector<f64>,
    tuning: &TuningParam,
    kernel: &Diffusion,
    stream: &mut RngStream,
) -> Result<DVector<f64>> {
    match tuning {
        TuningParam::MatrixScale(m) => {
            let d = kernel.potential.dim();
            let w = DMatrix::from_fn(d, kernel.substeps, |_, _| stream.standard_normal());
            kernel.apply(x, m, &w)
        }
        other => Err(Error::VariantMismatch(format!(
            "diffusion expects a MatrixScale tuning, got {}",
            other.variant_name()
        ))),
    }
}
