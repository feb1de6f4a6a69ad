//! LP assembly over local hulls.
//!
//! Reduced variables are `[U (n_free, free) | lambda (m x N_c, bounded)]`,
//! member-major. Rows: `dim` compatibility rows per member, then `n_free`
//! equilibrium rows, then one partition row per member.

use super::config::{LambdaBounds, Objective};
use crate::lp::{LpBuilder, LpProblem};
use crate::model::StructModel;
use crate::phase::DataSet;
use crate::{Error, Result};

fn check(model: &StructModel, ds: &DataSet, local: &[Vec<usize>]) -> Result<()> {
    if ds.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: ds.dim(),
        });
    }
    if local.len() != model.n_members() {
        return Err(Error::DimensionMismatch {
            expected: model.n_members(),
            got: local.len(),
        });
    }
    if let Some(&i) = local.iter().flatten().find(|&&i| i >= ds.len()) {
        return Err(Error::Config(format!("local index {i} outside dataset of {}", ds.len())));
    }
    Ok(())
}

pub fn assemble_lp(
    model: &StructModel,
    ds: &DataSet,
    local: &[Vec<usize>],
    objective: Objective,
    lambda: LambdaBounds,
) -> Result<LpProblem> {
    check(model, ds, local)?;
    let n = model.n_free;
    let d = model.dim;
    let n_lambda: usize = local.iter().map(Vec::len).sum();
    let mut b = LpBuilder::new(n + n_lambda);
    for (j, c) in objective.cost(&model.load).into_iter().enumerate() {
        b.cost(j, c);
    }
    for j in n..n + n_lambda {
        b.bounds(j, lambda.lo, lambda.hi);
    }
    let mut col = n;
    for (m, set) in model.members.iter().zip(local) {
        for (k, row) in m.rows.iter().enumerate() {
            let coefs = set
                .iter()
                .enumerate()
                .map(|(j, &i)| (col + j, ds.strain(i)[k]))
                .chain(row.iter().map(|&(dof, v)| (dof, -v)));
            b.row(coefs, 0.0);
        }
        col += set.len();
    }
    let eq0 = b.n_rows();
    for &p in &model.load {
        b.row(std::iter::empty(), p);
    }
    let mut col = n;
    for (m, set) in model.members.iter().zip(local) {
        for (k, row) in m.rows.iter().enumerate() {
            for &(dof, v) in row {
                let wv = m.weight * v;
                for (j, &i) in set.iter().enumerate() {
                    b.add_to_row(eq0 + dof, col + j, wv * ds.stress(i)[k]);
                }
            }
        }
        col += set.len();
    }
    let mut col = n;
    for set in local {
        b.row((col..col + set.len()).map(|j| (j, 1.0)), 1.0);
        col += set.len();
    }
    debug_assert_eq!(b.n_rows(), model.n_members() * (d + 1) + n);
    Ok(b.build()?)
}

/// The same problem with explicit member strains and stresses:
/// `[U | eps | sigma | lambda]` with rows `eps = sum lambda eps_j`,
/// `sigma = sum lambda sigma_j`, `eps = B U`, equilibrium in `sigma`, and
/// the partition rows.
pub fn assemble_lp_full(
    model: &StructModel,
    ds: &DataSet,
    local: &[Vec<usize>],
    objective: Objective,
    lambda: LambdaBounds,
) -> Result<LpProblem> {
    check(model, ds, local)?;
    let n = model.n_free;
    let d = model.dim;
    let md = model.n_members() * d;
    let (e0, s0, l0) = (n, n + md, n + 2 * md);
    let n_lambda: usize = local.iter().map(Vec::len).sum();
    let mut b = LpBuilder::new(l0 + n_lambda);
    for (j, c) in objective.cost(&model.load).into_iter().enumerate() {
        b.cost(j, c);
    }
    for j in l0..l0 + n_lambda {
        b.bounds(j, lambda.lo, lambda.hi);
    }
    let mut col = l0;
    for (e, (m, set)) in model.members.iter().zip(local).enumerate() {
        for k in 0..d {
            let r = e * d + k;
            b.row(
                std::iter::once((e0 + r, 1.0)).chain(set.iter().enumerate().map(|(j, &i)| (col + j, -ds.strain(i)[k]))),
                0.0,
            );
            b.row(
                std::iter::once((s0 + r, 1.0)).chain(set.iter().enumerate().map(|(j, &i)| (col + j, -ds.stress(i)[k]))),
                0.0,
            );
            b.row(
                std::iter::once((e0 + r, 1.0)).chain(m.rows[k].iter().map(|&(dof, v)| (dof, -v))),
                0.0,
            );
        }
        b.row((col..col + set.len()).map(|j| (j, 1.0)), 1.0);
        col += set.len();
    }
    let eq0 = b.n_rows();
    for &p in &model.load {
        b.row(std::iter::empty(), p);
    }
    for (e, m) in model.members.iter().enumerate() {
        for (k, row) in m.rows.iter().enumerate() {
            for &(dof, v) in row {
                b.add_to_row(eq0 + dof, s0 + e * d + k, m.weight * v);
            }
        }
    }
    Ok(b.build()?)
}

/// Member-major `(strain, stress)` of the `lambda`-combinations.
pub fn reconstruct(ds: &DataSet, local: &[Vec<usize>], lambda: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = ds.dim();
    let mut strain = vec![0.0; local.len() * d];
    let mut stress = vec![0.0; local.len() * d];
    let mut col = 0;
    for (e, set) in local.iter().enumerate() {
        for &i in set {
            let l = lambda[col];
            for k in 0..d {
                strain[e * d + k] += l * ds.strain(i)[k];
                stress[e * d + k] += l * ds.stress(i)[k];
            }
            col += 1;
        }
    }
    (strain, stress)
}

/// Member-major geometric centres of the local hulls.
pub fn centres(ds: &DataSet, local: &[Vec<usize>]) -> (Vec<f64>, Vec<f64>) {
    let lambda: Vec<f64> = local
        .iter()
        .flat_map(|s| std::iter::repeat_n(1.0 / s.len() as f64, s.len()))
        .collect();
    reconstruct(ds, local, &lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve, LpStatus};
    use crate::model::truss::{Bar, TrussModel};
    use crate::phase::PhasePoint;
    use std::collections::BTreeMap;

    fn one_bar(load: f64) -> StructModel {
        TrussModel {
            nodes: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            bars: vec![Bar { a: 0, b: 1, area: 1.0 }],
            // axial dof of node 1 only
            fixed_dofs: vec![0, 1, 3],
            loads: BTreeMap::from([(2, load)]),
        }
        .build_operators()
        .unwrap()
    }

    fn line(eps: &[f64], e: f64) -> DataSet {
        let pts: Vec<_> = eps.iter().map(|&x| PhasePoint::scalar(x, e * x).unwrap()).collect();
        DataSet::from_points(&pts, "line").unwrap()
    }

    #[test]
    fn single_bar_lands_on_the_line() {
        let m = one_bar(0.3);
        let ds = line(&[-1.0, 0.0, 1.0], 1.0);
        let local = vec![vec![0, 1, 2]];
        for obj in [Objective::Compliance, Objective::PlusDof(0), Objective::MinusDof(0)] {
            let lp = assemble_lp(&m, &ds, &local, obj, LambdaBounds::default()).unwrap();
            let s = solve(&lp).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            let x = s.x.unwrap();
            assert!((x[0] - 0.3).abs() < 1e-9);
            let (e, sg) = reconstruct(&ds, &local, &x[1..]);
            assert!((e[0] - sg[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn load_outside_hull_is_infeasible() {
        let m = one_bar(3.0);
        let ds = line(&[-1.0, 0.0, 1.0], 1.0);
        let lp = assemble_lp(&m, &ds, &[vec![0, 1, 2]], Objective::Compliance, LambdaBounds::default()).unwrap();
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn reduced_and_full_agree() {
        let m = crate::model::structures::three_bar().build_operators().unwrap();
        let pts: Vec<_> = [(-1.0, -0.9), (-0.6, -0.7), (-0.4, -0.35), (-0.2, -0.25), (0.0, 0.05), (0.3, 0.35)]
            .iter()
            .map(|&(e, s)| PhasePoint::scalar(e, s).unwrap())
            .collect();
        let ds = DataSet::from_points(&pts, "pts").unwrap();
        let local = vec![vec![0, 2, 3, 4], vec![1, 2, 5, 4], vec![0, 1, 2, 4]];
        for obj in [Objective::Compliance, Objective::PlusDof(0), Objective::MinusDof(1)] {
            let a = solve(&assemble_lp(&m, &ds, &local, obj, LambdaBounds::default()).unwrap()).unwrap();
            let b = solve(&assemble_lp_full(&m, &ds, &local, obj, LambdaBounds::default()).unwrap()).unwrap();
            assert_eq!(a.status, LpStatus::Optimal);
            assert_eq!(b.status, LpStatus::Optimal);
            assert!((a.objective.unwrap() - b.objective.unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn centres_average_the_hull() {
        let ds = line(&[0.0, 1.0, 2.0, 3.0], 2.0);
        let (e, s) = centres(&ds, &[vec![0, 1], vec![1, 2, 3]]);
        assert_eq!(e, vec![0.5, 2.0]);
        assert_eq!(s, vec![1.0, 4.0]);
    }

    #[test]
    fn bad_local_index() {
        let m = one_bar(0.1);
        let ds = line(&[0.0, 1.0], 1.0);
        assert!(assemble_lp(&m, &ds, &[vec![0, 5]], Objective::Compliance, LambdaBounds::default()).is_err());
    }
}
