//! Pairs on the unit square.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Where a [`UniformSample`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    EmpiricalTransformed,
    Simulated,
}

/// Pairs `(u1, u2)` strictly inside the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSample {
    pairs: Vec<[f64; 2]>,
    provenance: Provenance,
}

impl UniformSample {
    pub fn new(pairs: Vec<[f64; 2]>, provenance: Provenance) -> Result<Self> {
        if let Some((i, p)) = pairs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p[0] > 0.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 1.0))
        {
            return domain(format!("pair {i} = ({}, {}) is not inside the open unit square", p[0], p[1]));
        }
        Ok(Self { pairs, provenance })
    }

    pub fn pairs(&self) -> &[[f64; 2]] {
        &self.pairs
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The same sample with coordinates exchanged in every pair.
    pub fn swapped(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(|p| [p[1], p[0]]).collect(),
            provenance: self.provenance,
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.pairs.iter().map(|p| p[j]).collect()
    }
}
