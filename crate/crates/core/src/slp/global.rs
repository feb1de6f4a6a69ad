use std::time::Instant;

use super::assemble::{assemble_lp, reconstruct};
use super::config::{LambdaBounds, Objective, SlpConfig};
use super::{IterRecord, SolveReport, SolveStatus};
use crate::lp::{solve, LpStatus};
use crate::model::StructModel;
use crate::phase::DataSet;
use crate::{Error, Result};

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Indices of the convex hull vertices of planar points, counter-clockwise
/// from the lowest-leftmost point, collinear points dropped. Duplicates
/// keep their first index; a degenerate set yields one or two vertices.
pub fn convex_hull_2d(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| {
        pts[a]
            .0
            .total_cmp(&pts[b].0)
            .then(pts[a].1.total_cmp(&pts[b].1))
            .then(a.cmp(&b))
    });
    order.dedup_by(|a, b| pts[*a] == pts[*b]);
    if order.len() < 3 {
        return order;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2
                && cross(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// One LP in which every bar state is a convex combination of the vertices
/// of the whole dataset's convex hull.
pub fn global_hull_solve(model: &StructModel, ds: &DataSet, objective: Objective) -> Result<SolveReport> {
    let t0 = Instant::now();
    if ds.dim() != 1 || model.dim != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: ds.dim().max(model.dim) });
    }
    if ds.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    let pts: Vec<(f64, f64)> = (0..ds.len()).map(|i| (ds.strain(i)[0], ds.stress(i)[0])).collect();
    let hull = convex_hull_2d(&pts);
    let local = vec![hull.clone(); model.n_members()];
    let lambda = LambdaBounds::default();
    let lp = assemble_lp(model, ds, &local, objective, lambda)?;
    let t_lp = Instant::now();
    let sol = solve(&lp)?;
    let lp_time = t_lp.elapsed().as_secs_f64();
    let feasible = sol.status == LpStatus::Optimal;
    let n = model.n_free;
    let (u, strain, stress, lam, obj) = match &sol.x {
        Some(x) if feasible => {
            let lam = x[n..].to_vec();
            let (e, s) = reconstruct(ds, &local, &lam);
            (x[..n].to_vec(), e, s, Some(lam), sol.objective)
        }
        _ => (Vec::new(), Vec::new(), Vec::new(), None, None),
    };
    let config = SlpConfig {
        n_c: hull.len(),
        objective,
        max_iter: 1,
        ..SlpConfig::default()
    };
    Ok(SolveReport {
        label: "global_hull".into(),
        config,
        converged: feasible,
        iterations: 1,
        objective_value: obj,
        history: vec![IterRecord {
            k: 1,
            objective: obj,
            l: hull.len() as f64,
            feasible,
            rel_du: None,
            lp_iterations: sol.iterations,
            warm_started: false,
            lambda_lo: lambda.lo,
            lambda_hi: lambda.hi,
        }],
        ever_feasible: feasible,
        u,
        strain,
        stress,
        lambda: lam,
        local_sets: local,
        final_l: hull.len() as f64,
        lambda_bounds: lambda,
        wall_time: t0.elapsed().as_secs_f64(),
        lp_time,
        status: if feasible { SolveStatus::Converged } else { SolveStatus::Infeasible },
    })
}
