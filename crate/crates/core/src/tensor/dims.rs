use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered tensor-factor dimensions; factor 0 is the slowest index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactoredDims {
    factors: Vec<usize>,
}

impl FactoredDims {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("at least one factor is required".into()));
        }
        if factors.contains(&0) {
            return Err(Error::InvalidArgument("factor dimensions must be positive".into()));
        }
        Ok(FactoredDims { factors })
    }

    /// Single-factor space of dimension `n` (`n ≥ 1`).
    pub fn single(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        FactoredDims { factors: vec![n] }
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }

    /// Dimensions of `self ⊗ other`.
    pub fn concat(&self, other: &FactoredDims) -> FactoredDims {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        FactoredDims { factors }
    }

    /// Dimensions of the sub-system made of the listed factors, in order.
    pub fn select(&self, keep: &[usize]) -> Result<FactoredDims> {
        let factors = keep
            .iter()
            .map(|&k| {
                self.factors
                    .get(k)
                    .copied()
                    .ok_or(Error::FactorOutOfRange { index: k, factors: self.factors.len() })
            })
            .collect::<Result<Vec<_>>>()?;
        FactoredDims::new(factors)
    }
}
