//! Sequential linear programming over adaptive local hulls.
//!
//! Each iteration solves one LP in which every member state is a
//! `lambda`-combination of `N_c` data points, then re-selects those points
//! around the new state with a smaller hull. An infeasible LP falls back to
//! the projection of the hull centres and enlarges the hulls instead.
//!
//! Local sets index the canonically sorted dataset (0-based).

pub mod assemble;
pub mod config;
pub mod global;
pub mod hull;

use std::borrow::Cow;
use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use assemble::{assemble_lp, assemble_lp_full, centres, reconstruct};
pub use config::{LambdaBounds, Objective, SlpConfig};
pub use global::{convex_hull_2d, global_hull_solve};
pub use hull::{
    init_local_sets, next_edge, next_stride, relax_lambda_bounds, simplex_vertices, update_simplex_6d,
    update_window_1d,
};

use crate::ddcm::{ddcm_project, default_metric};
use crate::lp::{solve_with, Basis, LpStatus, SimplexOptions};
use crate::model::StructModel;
use crate::nn::{NnIndex, NnMode};
use crate::phase::{estimate_scaling, DataSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// `max_iter` reached after at least one feasible LP.
    MaxIter,
    /// No LP was ever feasible.
    Infeasible,
    /// The hulls, hull size and `lambda` bounds repeated an earlier
    /// iteration; the best feasible iterate of the cycle is reported.
    Cycling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub k: usize,
    /// LP optimum, or the objective at the fallback state.
    pub objective: Option<f64>,
    /// Hull size used by this iteration's LP.
    pub l: f64,
    pub feasible: bool,
    /// `||U_k - U_{k-1}|| / ||U_k||`, absent at `k = 1`.
    pub rel_du: Option<f64>,
    pub lp_iterations: usize,
    pub warm_started: bool,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub label: String,
    pub config: SlpConfig,
    pub status: SolveStatus,
    pub converged: bool,
    pub iterations: usize,
    pub objective_value: Option<f64>,
    pub ever_feasible: bool,
    pub u: Vec<f64>,
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
    /// `lambda` of the last LP, when it was feasible.
    pub lambda: Option<Vec<f64>>,
    /// Hulls of the last LP.
    pub local_sets: Vec<Vec<usize>>,
    pub final_l: f64,
    pub lambda_bounds: LambdaBounds,
    pub history: Vec<IterRecord>,
    pub wall_time: f64,
    pub lp_time: f64,
}

impl SolveReport {
    /// Whether the last iterate came from a feasible LP.
    pub fn last_feasible(&self) -> bool {
        self.history.last().is_some_and(|r| r.feasible)
    }

    /// Iteration history as CSV with a header row.
    pub fn history_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.history {
            w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// State of one iteration, kept to resolve cycles.
#[derive(Clone)]
struct Iterate {
    u: Vec<f64>,
    strain: Vec<f64>,
    stress: Vec<f64>,
    lambda: Option<Vec<f64>>,
    local: Vec<Vec<usize>>,
    objective: Option<f64>,
    l: f64,
    bounds: LambdaBounds,
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

fn sorted(ds: &DataSet) -> Result<Cow<'_, DataSet>> {
    Ok(if ds.is_sorted() {
        Cow::Borrowed(ds)
    } else {
        Cow::Owned(ds.sort_canonical()?)
    })
}

/// Runs the SLP iteration to convergence or `cfg.max_iter`.
///
/// Convergence needs a feasible LP at iteration `k > 1` whose displacement
/// moved by at most `cfg.tol` relative to the previous iterate.
pub fn slp_solve(model: &StructModel, ds: &DataSet, cfg: &SlpConfig) -> Result<SolveReport> {
    let t0 = Instant::now();
    cfg.validate(model.dim, model.n_free)?;
    if ds.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: ds.dim(),
        });
    }
    let ds = sorted(ds)?;
    let ds = ds.as_ref();
    let (n, m, d, n_d) = (model.n_free, model.n_members(), model.dim, ds.len());
    let metric = default_metric(ds);
    let scale = cfg
        .nn_scaled
        .then(|| estimate_scaling((0..n_d).map(|i| (ds.strain(i), ds.stress(i)))));
    let mode = if d == 1 { NnMode::BruteForce } else { cfg.nn };
    let nn = NnIndex::build_scaled(ds, mode, scale.as_ref(), cfg.seed);

    let mut local;
    let mut stride = 0usize;
    let mut edge = 0.0;
    let cap = hull::max_stride(n_d, cfg.n_c);
    if d == 1 {
        let s = cfg.l1.map(|v| v as usize);
        local = init_local_sets(n_d, cfg.n_c, s, m)?;
        stride = s.unwrap_or_else(|| hull::default_stride(n_d, cfg.n_c));
    } else {
        local = init_local_sets(n_d, cfg.n_c, None, m)?;
        edge = cfg.l1.unwrap_or(1.0);
    }
    let l1 = edge;

    let opts = SimplexOptions::default();
    let mut bounds = cfg.lambda;
    let mut warm: Option<Basis> = None;
    let mut u_prev: Option<Vec<f64>> = None;
    let mut history = Vec::new();
    let mut lp_time = 0.0;
    let mut ever_feasible = false;
    let mut status = None;
    let mut iterates: Vec<Iterate> = Vec::new();
    let mut seen: HashMap<(Vec<Vec<usize>>, u64, u64, u64), usize> = HashMap::new();

    let mut k = 0;
    loop {
        let l_now = if d == 1 { stride as f64 } else { edge };
        let key = (local.clone(), l_now.to_bits(), bounds.lo.to_bits(), bounds.hi.to_bits());
        // A feasible repeat of the previous iteration is left to converge.
        let cycle_start = seen
            .get(&key)
            .copied()
            .filter(|&j| j + 1 < k || iterates.last().is_some_and(|it| it.lambda.is_none()));
        if let Some(j) = cycle_start {
            status = Some(SolveStatus::Cycling);
            // keep the best feasible iterate of the cycle j..k
            let cycle = &iterates[j..];
            let best = cycle
                .iter()
                .enumerate()
                .filter(|(_, it)| it.lambda.is_some())
                .min_by(|a, b| a.1.objective.unwrap_or(f64::INFINITY).total_cmp(&b.1.objective.unwrap_or(f64::INFINITY)))
                .map(|(i, _)| j + i);
            if let Some(b) = best {
                let last = iterates.len() - 1;
                iterates.swap(b, last);
            }
            break;
        }
        seen.insert(key, k);
        k += 1;
        let (u, strain, stress, lambda, objective);
        let lp = assemble_lp(model, ds, &local, cfg.objective, bounds)?;
        let t = Instant::now();
        let sol = solve_with(&lp, &opts, warm.as_ref().filter(|_| cfg.warm_start))?;
        lp_time += t.elapsed().as_secs_f64();
        let feasible = sol.status == LpStatus::Optimal;
        if feasible {
            let x = sol.x.as_ref().expect("optimal solution carries x");
            u = x[..n].to_vec();
            let lam = x[n..].to_vec();
            (strain, stress) = reconstruct(ds, &local, &lam);
            lambda = Some(lam);
            objective = sol.objective;
            warm = sol.basis.clone();
            ever_feasible = true;
        } else {
            let (ce, cs) = centres(ds, &local);
            let p = ddcm_project(model, &ce, &cs, &metric)?;
            objective = Some(cfg.objective.value(&model.load, &p.u));
            (u, strain, stress, lambda) = (p.u, p.strain, p.stress, None);
        }
        let rel_du = u_prev.as_ref().map(|prev| {
            let du = norm(u.iter().zip(prev).map(|(a, b)| a - b));
            let nu = norm(u.iter().copied());
            if nu > 0.0 {
                du / nu
            } else {
                du
            }
        });
        history.push(IterRecord {
            k,
            objective,
            l: l_now,
            feasible,
            rel_du,
            lp_iterations: sol.iterations,
            warm_started: sol.warm_started,
            lambda_lo: bounds.lo,
            lambda_hi: bounds.hi,
        });
        iterates.push(Iterate {
            u: u.clone(),
            strain,
            stress,
            lambda,
            local: std::mem::take(&mut local),
            objective,
            l: l_now,
            bounds,
        });
        if feasible && rel_du.is_some_and(|r| r <= cfg.tol) {
            status = Some(SolveStatus::Converged);
            break;
        }
        if k >= cfg.max_iter {
            break;
        }
        let cur = iterates.last().expect("just pushed");
        if d == 1 {
            stride = next_stride(stride, cfg.rho, feasible, cap);
            local = update_window_1d(&nn, &cur.strain, &cur.stress, cfg.n_c, stride, n_d)?;
        } else {
            edge = next_edge(l1, cfg.rho, k, cfg.l_min, edge, feasible);
            local = update_simplex_6d(ds, &nn, &cur.local, &cur.strain, &cur.stress, edge)?;
            bounds = relax_lambda_bounds(bounds, cfg.lambda, feasible);
        }
        u_prev = Some(u);
    }
    let status = match status {
        _ if !ever_feasible => SolveStatus::Infeasible,
        Some(s) => s,
        None => SolveStatus::MaxIter,
    };
    // An unconverged run reports its last feasible iterate.
    if status != SolveStatus::Converged && iterates.last().is_some_and(|it| it.lambda.is_none()) {
        if let Some(i) = iterates.iter().rposition(|it| it.lambda.is_some()) {
            let last = iterates.len() - 1;
            iterates.swap(i, last);
        }
    }
    let fin = iterates.pop().expect("at least one iteration");
    Ok(SolveReport {
        label: model.label.clone(),
        config: cfg.clone(),
        status,
        converged: status == SolveStatus::Converged,
        iterations: k,
        objective_value: fin.objective,
        ever_feasible,
        u: fin.u,
        strain: fin.strain,
        stress: fin.stress,
        lambda: fin.lambda,
        local_sets: fin.local,
        final_l: fin.l,
        lambda_bounds: fin.bounds,
        history,
        wall_time: t0.elapsed().as_secs_f64(),
        lp_time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub dof: usize,
    pub lower: f64,
    pub comparable: f64,
    pub upper: f64,
    pub lower_report: SolveReport,
    pub comparable_report: SolveReport,
    pub upper_report: SolveReport,
}

impl BoundsReport {
    pub fn all_converged(&self) -> bool {
        self.lower_report.converged && self.comparable_report.converged && self.upper_report.converged
    }
}

/// Lower, comparable and upper values of dof `dof` from three independent
/// runs with objectives `U_i`, `p'U` and `-U_i`.
pub fn bounds(model: &StructModel, ds: &DataSet, cfg: &SlpConfig, dof: usize) -> Result<BoundsReport> {
    if dof >= model.n_free {
        return Err(Error::Config(format!("dof {dof} outside {} free dofs", model.n_free)));
    }
    let ds = sorted(ds)?;
    let ds = ds.as_ref();
    let run = |o| slp_solve(model, ds, &cfg.with_objective(o));
    let (lo, (cmp, hi)) = rayon::join(
        || run(Objective::PlusDof(dof)),
        || rayon::join(|| run(Objective::Compliance), || run(Objective::MinusDof(dof))),
    );
    let (lo, cmp, hi) = (lo?, cmp?, hi?);
    Ok(BoundsReport {
        dof,
        lower: lo.u[dof],
        comparable: cmp.u[dof],
        upper: hi.u[dof],
        lower_report: lo,
        comparable_report: cmp,
        upper_report: hi,
    })
}

/// Minimum and maximum of dof `dof` over the final hulls of `report`,
/// `None` when that LP is infeasible.
pub fn resolve_on_hulls(
    model: &StructModel,
    ds: &DataSet,
    report: &SolveReport,
    dof: usize,
) -> Result<Option<(f64, f64)>> {
    let ds = sorted(ds)?;
    let one = |o| -> Result<Option<f64>> {
        let lp = assemble_lp(model, ds.as_ref(), &report.local_sets, o, report.lambda_bounds)?;
        let s = solve_with(&lp, &SimplexOptions::default(), None)?;
        Ok(s.x.map(|x| x[dof]))
    };
    Ok(match (one(Objective::PlusDof(dof))?, one(Objective::MinusDof(dof))?) {
        (Some(a), Some(b)) => Some((a, b)),
        _ => None,
    })
}

#[cfg(test)]
mod tests;
