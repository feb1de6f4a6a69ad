use serde::{Deserialize, Serialize};

use crate::nn::NnMode;
use crate::{Error, Result};

/// LP objective, minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "dof", rename_all = "snake_case")]
pub enum Objective {
    /// `p' U`, giving the comparable solution.
    Compliance,
    /// `U_i`, giving the lower bound of dof `i`.
    PlusDof(usize),
    /// `-U_i`, giving the upper bound of dof `i`.
    MinusDof(usize),
}

impl Objective {
    /// Cost vector over the displacement block.
    pub fn cost(&self, load: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; load.len()];
        match *self {
            Objective::Compliance => c.copy_from_slice(load),
            Objective::PlusDof(i) => c[i] = 1.0,
            Objective::MinusDof(i) => c[i] = -1.0,
        }
        c
    }

    pub fn value(&self, load: &[f64], u: &[f64]) -> f64 {
        self.cost(load).iter().zip(u).map(|(c, u)| c * u).sum()
    }

    pub fn dof(&self) -> Option<usize> {
        match *self {
            Objective::Compliance => None,
            Objective::PlusDof(i) | Objective::MinusDof(i) => Some(i),
        }
    }
}

/// Closed interval for every `lambda_ej`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaBounds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for LambdaBounds {
    fn default() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlpConfig {
    /// Points per local hull.
    pub n_c: usize,
    /// Initial hull size: an index stride for bars, a simplex edge length
    /// for 6-D points. `None` takes `floor((N_d - 1)/N_c)` for bars and
    /// `1.0` for 6-D points.
    pub l1: Option<f64>,
    pub rho: f64,
    /// Floor of the simplex edge length (6-D only).
    pub l_min: f64,
    /// Relative displacement change declaring convergence.
    pub tol: f64,
    pub lambda: LambdaBounds,
    pub max_iter: usize,
    pub objective: Objective,
    pub warm_start: bool,
    /// Search used to snap simplex vertices (6-D only).
    pub nn: NnMode,
    /// Divide stresses by the dataset scaling before nearest-neighbour
    /// search.
    pub nn_scaled: bool,
    pub seed: u64,
}

impl Default for SlpConfig {
    fn default() -> Self {
        Self {
            n_c: 5,
            l1: None,
            rho: 1.5,
            l_min: 0.0,
            tol: 0.01,
            lambda: LambdaBounds::default(),
            max_iter: 100,
            objective: Objective::Compliance,
            warm_start: true,
            nn: NnMode::BruteForce,
            nn_scaled: false,
            seed: 0,
        }
    }
}

/// Largest `N_c` in 6-D: the simplex plus its reflection.
pub const MAX_NC_6D: usize = 14;

impl SlpConfig {
    /// Defaults for 6-D runs: seven-point simplex hulls with relaxed
    /// `lambda`.
    pub fn continuum() -> Self {
        Self {
            n_c: 7,
            l1: Some(1.0),
            rho: 1.5,
            l_min: 0.2,
            tol: 0.005,
            lambda: LambdaBounds { lo: -0.5, hi: 1.5 },
            ..Self::default()
        }
    }

    pub fn with_objective(&self, objective: Objective) -> Self {
        Self {
            objective,
            ..self.clone()
        }
    }

    pub fn validate(&self, dim: usize, n_free: usize) -> Result<()> {
        let min_nc = if dim == 1 { 3 } else { 7 };
        if self.n_c < min_nc {
            return Err(Error::Config(format!("N_c = {} below the minimum {min_nc}", self.n_c)));
        }
        if dim == 6 && self.n_c > MAX_NC_6D {
            return Err(Error::Config(format!("N_c = {} above {MAX_NC_6D} in 6-D", self.n_c)));
        }
        if !(self.rho > 1.0) {
            return Err(Error::Config(format!("rho = {} must exceed 1", self.rho)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if !(self.l_min >= 0.0) {
            return Err(Error::Config("l_min must be non-negative".into()));
        }
        if let Some(l1) = self.l1 {
            let ok = if dim == 1 { l1 >= 1.0 && l1.fract() == 0.0 } else { l1 > 0.0 };
            if !ok {
                return Err(Error::Config(format!("invalid initial hull size {l1}")));
            }
        }
        if !(self.lambda.lo < self.lambda.hi) || !self.lambda.lo.is_finite() || !self.lambda.hi.is_finite() {
            return Err(Error::Config("lambda bounds must satisfy lo < hi".into()));
        }
        let n = self.n_c as f64;
        if self.lambda.lo * n > 1.0 || self.lambda.hi * n < 1.0 {
            return Err(Error::Config("lambda bounds admit no partition of unity".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if let Some(i) = self.objective.dof() {
            if i >= n_free {
                return Err(Error::Config(format!("dof {i} outside {n_free} free dofs")));
            }
        }
        Ok(())
    }
}
