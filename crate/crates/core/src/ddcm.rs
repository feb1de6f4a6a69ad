//! Classical distance-minimizing solver: alternate nearest-data assignment
//! and projection onto the compatible, equilibrated set.
//!
//! The distance of member `e` to data point `i` is
//! `w_e/2 * (sum_k c_k (eps_k - eps_ik)^2 + sum_k (sig_k - sig_ik)^2 / c_k)`
//! with a diagonal metric `c` shared by all members.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::StructModel;
use crate::nn::{NnIndex, NnMode};
use crate::phase::{estimate_scaling, DataSet};
use crate::{Error, Result};

/// Default cap on assignment sweeps.
pub const MAX_FP: usize = 500;

/// Projection of per-member centers onto the admissible set.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
}

/// Diagonal metric for dataset `ds`: the median `|stress/strain|` over all
/// components for bars, per-component medians for 6-D points.
pub fn default_metric(ds: &DataSet) -> Vec<f64> {
    if ds.dim() == 1 {
        vec![ds.median_modulus()]
    } else {
        let s = estimate_scaling((0..ds.len()).map(|i| (ds.strain(i), ds.stress(i))));
        s.diag().to_vec()
    }
}

fn metric_matrix(c: &[f64]) -> Vec<f64> {
    let d = c.len();
    let mut m = vec![0.0; d * d];
    for k in 0..d {
        m[k * d + k] = c[k];
    }
    m
}

/// Projects centers `(strain, stress)` (member-major) with metric `c`.
///
/// `U` solves `K U = sum_e w_e B_e' C eps_e`, `eta` solves
/// `K eta = p - sum_e w_e B_e' sig_e`, with `K = sum_e w_e B_e' C B_e`; the
/// result is `eps = B U`, `sig = sig~ + C B eta`.
pub fn ddcm_project(model: &StructModel, strain: &[f64], stress: &[f64], c: &[f64]) -> Result<Projection> {
    let d = model.dim;
    let len = model.n_members() * d;
    if strain.len() != len || stress.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: strain.len().min(stress.len()),
        });
    }
    if c.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: c.len() });
    }
    if c.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Config("metric entries must be positive".into()));
    }
    let cm = metric_matrix(c);
    let chol = model.factor(|_| cm.clone())?;
    let weighted: Vec<f64> = strain.iter().enumerate().map(|(k, e)| c[k % d] * e).collect();
    let u = chol.solve(&model.internal_force(&weighted));
    let f = model.internal_force(stress);
    let r: Vec<f64> = model.load.iter().zip(&f).map(|(p, f)| p - f).collect();
    let eta = chol.solve(&r);
    let strain_out = model.strains(&u);
    let be = model.strains(&eta);
    let stress_out = stress
        .iter()
        .zip(&be)
        .enumerate()
        .map(|(k, (s, b))| s + c[k % d] * b)
        .collect();
    Ok(Projection {
        u,
        eta,
        strain: strain_out,
        stress: stress_out,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DdcmOptions {
    pub max_fp: usize,
    /// Diagonal metric; `None` uses [`default_metric`].
    pub metric: Option<Vec<f64>>,
    pub nn: NnMode,
    pub seed: u64,
}

impl Default for DdcmOptions {
    fn default() -> Self {
        Self {
            max_fp: MAX_FP,
            metric: None,
            nn: NnMode::BruteForce,
            seed: 0,
        }
    }
}

/// Result of the fixed-point iteration. Data indices are 0-based into the
/// dataset as given.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DdcmState {
    pub assignment: Vec<usize>,
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Distance objective after each projection.
    pub objective: Vec<f64>,
    pub metric: Vec<f64>,
}

/// Weighted distance objective of a state against an assignment.
pub fn ddcm_objective(
    model: &StructModel,
    ds: &DataSet,
    c: &[f64],
    strain: &[f64],
    stress: &[f64],
    assignment: &[usize],
) -> f64 {
    let d = model.dim;
    model
        .members
        .iter()
        .enumerate()
        .map(|(e, m)| {
            let i = assignment[e];
            let (de, ds_) = (ds.strain(i), ds.stress(i));
            let mut s = 0.0;
            for k in 0..d {
                let a = strain[e * d + k] - de[k];
                let b = stress[e * d + k] - ds_[k];
                s += c[k] * a * a + b * b / c[k];
            }
            0.5 * m.weight * s
        })
        .sum()
}

/// Runs the fixed-point iteration from `init` (or the data points nearest
/// the zero state) until assignments repeat. On hitting `max_fp` the
/// lowest-objective state is returned with `converged = false`.
pub fn ddcm_solve(model: &StructModel, ds: &DataSet, init: Option<&[usize]>, opts: &DdcmOptions) -> Result<DdcmState> {
    let d = model.dim;
    let m = model.n_members();
    if ds.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: ds.dim() });
    }
    if ds.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    let c = opts.metric.clone().unwrap_or_else(|| default_metric(ds));
    if c.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: c.len() });
    }
    // Weighted coordinates make the member distance Euclidean.
    let sq: Vec<f64> = c.iter().map(|v| v.sqrt()).collect();
    let mut pts = Vec::with_capacity(ds.len() * 2 * d);
    for i in 0..ds.len() {
        pts.extend(ds.strain(i).iter().zip(&sq).map(|(e, s)| e * s));
        pts.extend(ds.stress(i).iter().zip(&sq).map(|(x, s)| x / s));
    }
    let index = NnIndex::from_matrix(2 * d, pts, opts.nn, opts.seed);
    let assign = |strain: &[f64], stress: &[f64]| -> Result<Vec<usize>> {
        (0..m)
            .into_par_iter()
            .map(|e| {
                let mut q = Vec::with_capacity(2 * d);
                q.extend((0..d).map(|k| strain[e * d + k] * sq[k]));
                q.extend((0..d).map(|k| stress[e * d + k] / sq[k]));
                index.nearest(&q)
            })
            .collect()
    };

    let mut assignment = match init {
        Some(a) => {
            if a.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: a.len() });
            }
            if let Some(&bad) = a.iter().find(|&&i| i >= ds.len()) {
                return Err(Error::Config(format!("initial assignment {bad} outside dataset")));
            }
            a.to_vec()
        }
        None => {
            let zero = vec![0.0; m * d];
            assign(&zero, &zero)?
        }
    };

    let mut history = Vec::new();
    let mut best: Option<(f64, Projection, Vec<usize>)> = None;
    for it in 1..=opts.max_fp.max(1) {
        let (se, ss) = gather(ds, &assignment, d);
        let proj = ddcm_project(model, &se, &ss, &c)?;
        let obj = ddcm_objective(model, ds, &c, &proj.strain, &proj.stress, &assignment);
        history.push(obj);
        let next = assign(&proj.strain, &proj.stress)?;
        if next == assignment {
            return Ok(DdcmState {
                assignment,
                u: proj.u,
                eta: proj.eta,
                strain: proj.strain,
                stress: proj.stress,
                iterations: it,
                converged: true,
                objective: history,
                metric: c,
            });
        }
        if best.as_ref().is_none_or(|b| obj < b.0) {
            best = Some((obj, proj, assignment));
        }
        assignment = next;
    }
    let (_, proj, assignment) = best.expect("at least one sweep");
    Ok(DdcmState {
        assignment,
        u: proj.u,
        eta: proj.eta,
        strain: proj.strain,
        stress: proj.stress,
        iterations: opts.max_fp.max(1),
        converged: false,
        objective: history,
        metric: c,
    })
}

/// Member-major strain and stress of the assigned points.
fn gather(ds: &DataSet, assignment: &[usize], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut se = Vec::with_capacity(assignment.len() * d);
    let mut ss = Vec::with_capacity(assignment.len() * d);
    for &i in assignment {
        se.extend_from_slice(ds.strain(i));
        ss.extend_from_slice(ds.stress(i));
    }
    (se, ss)
}
