//! Nearest-neighbour search in phase space.
//!
//! Points are the concatenation `(strain, stress)`, optionally with the
//! stress block divided by a scaling matrix. Distances are Euclidean.

mod kdforest;

use serde::{Deserialize, Serialize};

pub use kdforest::{KdForest, LEAF_SIZE};

use crate::phase::{DataSet, ScalingMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NnMode {
    BruteForce,
    RandomizedKdTrees { trees: usize, max_checks: usize },
}

impl Default for NnMode {
    fn default() -> Self {
        NnMode::BruteForce
    }
}

#[derive(Debug, Clone)]
pub struct NnIndex {
    dim: usize,
    points: Vec<f64>,
    stress_scale: Option<Vec<f64>>,
    forest: Option<KdForest>,
    max_checks: usize,
}

impl NnIndex {
    pub fn build(ds: &DataSet, mode: NnMode, seed: u64) -> Self {
        Self::build_scaled(ds, mode, None, seed)
    }

    /// `scale`, when given, divides each stress component before indexing.
    pub fn build_scaled(ds: &DataSet, mode: NnMode, scale: Option<&ScalingMatrix>, seed: u64) -> Self {
        let d = ds.dim();
        let inv: Option<Vec<f64>> = scale.map(|s| s.diag().iter().map(|v| 1.0 / v).collect());
        let mut points = Vec::with_capacity(ds.len() * 2 * d);
        for i in 0..ds.len() {
            points.extend_from_slice(ds.strain(i));
            match &inv {
                Some(w) => points.extend(ds.stress(i).iter().zip(w).map(|(s, w)| s * w)),
                None => points.extend_from_slice(ds.stress(i)),
            }
        }
        Self::from_matrix(2 * d, points, mode, seed).with_scale(inv)
    }

    /// Index over raw row-major points of width `dim`.
    pub fn from_matrix(dim: usize, points: Vec<f64>, mode: NnMode, seed: u64) -> Self {
        let (forest, max_checks) = match mode {
            NnMode::BruteForce => (None, 0),
            NnMode::RandomizedKdTrees { trees, max_checks } => {
                (Some(KdForest::build(dim, &points, trees.max(1), seed)), max_checks.max(1))
            }
        };
        Self {
            dim,
            points,
            stress_scale: None,
            forest,
            max_checks,
        }
    }

    fn with_scale(mut self, s: Option<Vec<f64>>) -> Self {
        self.stress_scale = s;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nearest stored point to a query of width `dim`.
    pub fn nearest(&self, q: &[f64]) -> Result<usize> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: q.len(),
            });
        }
        if self.is_empty() {
            return Err(Error::EmptyInput("nearest-neighbour index"));
        }
        Ok(match &self.forest {
            None => brute_force(self.dim, &self.points, q),
            Some(f) => f.nearest(&self.points, q, self.max_checks),
        })
    }

    /// Nearest point to the phase-space state `(strain, stress)`, applying
    /// the index's stress scaling.
    pub fn nearest_state(&self, strain: &[f64], stress: &[f64]) -> Result<usize> {
        let mut q = Vec::with_capacity(strain.len() + stress.len());
        q.extend_from_slice(strain);
        match &self.stress_scale {
            Some(w) => q.extend(stress.iter().zip(w).map(|(s, w)| s * w)),
            None => q.extend_from_slice(stress),
        }
        self.nearest(&q)
    }

    /// Exact nearest point regardless of mode.
    pub fn nearest_exact(&self, q: &[f64]) -> Result<usize> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: q.len(),
            });
        }
        if self.is_empty() {
            return Err(Error::EmptyInput("nearest-neighbour index"));
        }
        Ok(brute_force(self.dim, &self.points, q))
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact scan; ties go to the smallest index.
pub fn brute_force(dim: usize, points: &[f64], q: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.chunks_exact(dim).enumerate() {
        let d = dist2(p, q);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}
