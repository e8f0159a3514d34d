//! Weighted point clouds standing in for marginal laws and reference measures.

use crate::error::{Error, Result};

/// Tolerance on the total mass of an empirical measure.
pub const MASS_TOL: f64 = 1e-12;

/// Compensated (Neumaier) sum of the weights.
pub fn mass(weights: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &w in weights {
        let t = sum + w;
        if sum.abs() >= w.abs() {
            comp += (sum - t) + w;
        } else {
            comp += (w - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A finitely supported probability measure. Points are stored unsorted.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    dim: usize,
    data: Vec<f64>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Builds a measure from points and nonnegative weights summing to 1
    /// within `MASS_TOL`; the weights are renormalized exactly.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidWeights("empty support".into()));
        }
        let dim = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        let data = points.into_iter().flatten().collect();
        Self::from_flat(dim, data, weights)
    }

    /// Builds a measure from row-major point coordinates.
    pub fn from_flat(dim: usize, data: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionError("zero-dimensional points".into()));
        }
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty support".into()));
        }
        if data.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * weights.len(),
                found: data.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights("negative or non-finite weight".into()));
        }
        let total = mass(&weights);
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let weights = if total == 1.0 {
            weights
        } else {
            weights.into_iter().map(|w| w / total).collect()
        };
        Ok(Self { dim, data, weights })
    }

    /// Normalizes arbitrary nonnegative weights with positive total.
    pub fn from_unnormalized(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let total = mass(&weights);
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidWeights(format!("total mass {total}")));
        }
        Self::new(points, weights.into_iter().map(|w| w / total).collect())
    }

    /// Uniform weights over the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidWeights("empty support".into()));
        }
        Self::new(points, vec![1.0 / n as f64; n])
    }

    /// Uniform measure over scalar atoms.
    pub fn uniform_1d(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::InvalidWeights("empty support".into()));
        }
        Self::from_flat(1, values.to_vec(), vec![1.0 / n as f64; n])
    }

    /// Weighted measure over scalar atoms.
    pub fn weighted_1d(values: &[f64], weights: Vec<f64>) -> Result<Self> {
        Self::from_flat(1, values.to_vec(), weights)
    }

    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        let dim = point.len();
        Self::from_flat(dim, point, vec![1.0])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points().zip(self.weights.iter().copied())
    }

    /// Scalar atoms of a one-dimensional measure.
    pub fn values_1d(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return Err(Error::DimensionError(format!(
                "expected 1-D points, got dimension {}",
                self.dim
            )));
        }
        Ok(&self.data)
    }

    /// Pushes the measure forward along `⟨direction, ·⟩`.
    pub fn project(&self, direction: &[f64]) -> Result<EmpiricalMeasure> {
        if direction.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: direction.len(),
            });
        }
        let data = self
            .points()
            .map(|p| p.iter().zip(direction).map(|(a, b)| a * b).sum())
            .collect();
        Ok(EmpiricalMeasure {
            dim: 1,
            data,
            weights: self.weights.clone(),
        })
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (p, w) in self.iter() {
            for (acc, v) in m.iter_mut().zip(p) {
                *acc += w * v;
            }
        }
        m
    }

    /// Weighted expectation of `f`.
    pub fn expect(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }

    /// The measure restricted to the given atom indices, renormalized.
    pub fn subset(&self, indices: &[usize]) -> Result<EmpiricalMeasure> {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        let weights: Vec<f64> = indices.iter().map(|&i| self.weights[i]).collect();
        let total = mass(&weights);
        if !(total > 0.0) {
            return Err(Error::InvalidWeights(format!("total mass {total}")));
        }
        Self::from_flat(self.dim, data, weights.into_iter().map(|w| w / total).collect())
    }
}
