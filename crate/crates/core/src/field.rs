use std::ops::Index;

use crate::error::{BdgError, Result};
use crate::grid::RadialGrid;

/// What a [`RadialField`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Pairing,
    DensityUp,
    DensityDown,
    Coupling,
    Fluctuation,
}

/// A real function of r sampled on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub values: Vec<f64>,
    pub kind: FieldKind,
}

impl RadialField {
    pub fn new(kind: FieldKind, values: Vec<f64>) -> Self {
        RadialField { values, kind }
    }

    pub fn zeros(kind: FieldKind, len: usize) -> Self {
        RadialField {
            values: vec![0.0; len],
            kind,
        }
    }

    /// Samples `f(r)` at every grid node.
    pub fn from_fn(kind: FieldKind, grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        RadialField {
            values: grid.nodes.iter().map(|&r| f(r)).collect(),
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.values.len() == expected {
            Ok(())
        } else {
            Err(BdgError::DimensionMismatch {
                expected,
                found: self.values.len(),
            })
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sqrt(sum_i w_i r_i^2 v_i^2)`.
    pub fn norm_3d(&self, grid: &RadialGrid) -> f64 {
        self.values
            .iter()
            .zip(grid.nodes.iter().zip(&grid.weights))
            .map(|(v, (r, w))| w * r * r * v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn with_kind(mut self, kind: FieldKind) -> Self {
        self.kind = kind;
        self
    }
}

impl Index<usize> for RadialField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}
