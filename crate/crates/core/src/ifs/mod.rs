//! Metric domains, point maps, weak contractions and iterated function
//! systems.
//!
//! The contraction condition is required to hold on the domain's bounding
//! box; completeness of the ambient space is assumed.

mod map;
mod metric;
mod validate;

use thiserror::Error;

use crate::coeff::{CoeffError, EnvelopeFunction};
use crate::scene::expr::ExprError;

pub use map::{apply_map, fixed_point, PointMap, WeakContraction};
pub use metric::{distance, Metric, MetricDomain, Point};
pub use validate::{validate_weak_contraction, ValidationOptions, ValidationReport, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IfsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("an IFS needs at least 2 maps, got {0}")]
    TooFewMaps(usize),
    #[error("fixed-point iteration did not converge in {0} iterations")]
    NoConvergence(usize),
    #[error("map produced a non-finite coordinate")]
    NonFinite,
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// `m >= 2` weak contractions over a shared domain.
#[derive(Debug, Clone, PartialEq)]
pub struct IFSystem {
    domain: MetricDomain,
    maps: Vec<WeakContraction>,
}

impl IFSystem {
    pub fn new(domain: MetricDomain, maps: Vec<WeakContraction>) -> Result<Self, IfsError> {
        if maps.len() < 2 {
            return Err(IfsError::TooFewMaps(maps.len()));
        }
        for w in &maps {
            w.map.check_dim(domain.dim())?;
        }
        Ok(IFSystem { domain, maps })
    }

    pub fn domain(&self) -> &MetricDomain {
        &self.domain
    }

    pub fn maps(&self) -> &[WeakContraction] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn envelopes(&self) -> Result<Vec<EnvelopeFunction>, CoeffError> {
        self.maps.iter().map(|w| w.coefficient.envelope()).collect()
    }

    /// `inf_{t > 0} alpha_j(t)` for every map.
    pub fn infima(&self) -> Result<Vec<f64>, CoeffError> {
        Ok(self
            .envelopes()?
            .iter()
            .map(|e| e.value_at_zero())
            .collect())
    }
}
