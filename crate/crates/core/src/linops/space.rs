use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{OpError, Result};

#[derive(Clone, Debug)]
enum Weights {
    Uniform { dim: usize, w: f64 },
    Varying(Arc<[f64]>),
}

/// A labeled finite-dimensional real inner-product space.
///
/// The inner product is `<u, v> = sum_i w_i u_i v_i` with strictly positive
/// quadrature weights `w_i`. Two tags are interchangeable (and operators
/// compose across them) only when name, dimension and weights all agree.
#[derive(Clone, Debug)]
pub struct SpaceTag {
    name: Arc<str>,
    weights: Weights,
}

impl SpaceTag {
    pub fn new(name: impl Into<String>, weights: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if weights.is_empty() {
            return Err(OpError::InvalidSpace(format!("`{name}` has dimension 0")));
        }
        if let Some(bad) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(OpError::InvalidSpace(format!(
                "`{name}` has non-positive weight {bad}"
            )));
        }
        let first = weights[0];
        let weights = if weights.iter().all(|w| *w == first) {
            Weights::Uniform {
                dim: weights.len(),
                w: first,
            }
        } else {
            Weights::Varying(weights.into())
        };
        Ok(Self {
            name: name.into(),
            weights,
        })
    }

    pub fn uniform(name: impl Into<String>, dim: usize, weight: f64) -> Result<Self> {
        let name = name.into();
        if dim == 0 {
            return Err(OpError::InvalidSpace(format!("`{name}` has dimension 0")));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(OpError::InvalidSpace(format!(
                "`{name}` has non-positive weight {weight}"
            )));
        }
        Ok(Self {
            name: name.into(),
            weights: Weights::Uniform { dim, w: weight },
        })
    }

    /// Euclidean `R^dim` with unit weights.
    pub fn euclidean(name: impl Into<String>, dim: usize) -> Result<Self> {
        Self::uniform(name, dim, 1.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        match &self.weights {
            Weights::Uniform { dim, .. } => *dim,
            Weights::Varying(w) => w.len(),
        }
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Weights::Uniform { w, .. } => *w,
            Weights::Varying(w) => w[i],
        }
    }

    /// The common weight if all coordinates share one.
    pub fn uniform_weight(&self) -> Option<f64> {
        match &self.weights {
            Weights::Uniform { w, .. } => Some(*w),
            Weights::Varying(_) => None,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.weight(i)).collect()
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: Arc::from(name.into()),
            weights: self.weights.clone(),
        }
    }

    /// Orthogonal direct sum; weights are concatenated and names joined by `⊕`.
    pub fn direct_sum(parts: &[&SpaceTag]) -> Result<Self> {
        if parts.is_empty() {
            return Err(OpError::InvalidSpace("empty direct sum".into()));
        }
        if parts.len() == 1 {
            return Ok(parts[0].clone());
        }
        let name = parts.iter().map(|p| p.name()).collect::<Vec<_>>().join("⊕");
        let common = parts[0].uniform_weight();
        if let Some(w) = common.filter(|_| parts.iter().all(|p| p.uniform_weight() == common)) {
            let dim = parts.iter().map(|p| p.dim()).sum();
            return Self::uniform(name, dim, w);
        }
        let weights = parts.iter().flat_map(|p| p.weights()).collect();
        Self::new(name, weights)
    }

    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        debug_assert_eq!(u.len(), self.dim());
        debug_assert_eq!(v.len(), self.dim());
        match &self.weights {
            Weights::Uniform { w, .. } => w * u.dot(v),
            Weights::Varying(w) => u
                .iter()
                .zip(v.iter())
                .zip(w.iter())
                .map(|((a, b), w)| w * a * b)
                .sum(),
        }
    }

    pub fn norm(&self, u: &DVector<f64>) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    pub(crate) fn ensure_same(&self, other: &SpaceTag, context: &'static str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(OpError::TagMismatch {
                context,
                expected: self.to_string(),
                found: other.to_string(),
            })
        }
    }
}

impl PartialEq for SpaceTag {
    fn eq(&self, other: &Self) -> bool {
        if self.name != other.name || self.dim() != other.dim() {
            return false;
        }
        match (&self.weights, &other.weights) {
            (Weights::Uniform { w: a, .. }, Weights::Uniform { w: b, .. }) => a == b,
            _ => (0..self.dim()).all(|i| self.weight(i) == other.weight(i)),
        }
    }
}

impl fmt::Display for SpaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {})", self.name, self.dim())
    }
}
