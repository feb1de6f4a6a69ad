use proptest::prelude::*;

use super::*;

const INF: f64 = f64::INFINITY;

fn lp(c: &[f64], rows: &[(&[f64], f64)], bounds: &[(f64, f64)]) -> LpProblem {
    let mut b = LpBuilder::new(c.len());
    for (j, &cj) in c.iter().enumerate() {
        b.cost(j, cj).bounds(j, bounds[j].0, bounds[j].1);
    }
    for (coefs, rhs) in rows {
        b.row(coefs.iter().copied().enumerate(), *rhs);
    }
    b.build().unwrap()
}

#[test]
fn fixed_by_equality() {
    let s = solve(&lp(&[1.0], &[(&[1.0], 1.0)], &[(0.0, 2.0)])).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.x.unwrap()[0] - 1.0).abs() < 1e-12);
    assert!((s.objective.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn bound_active_without_rows() {
    let p = LpProblem::new(
        vec![-1.0],
        CscMatrix::from_triplets(0, 1, &[]),
        vec![],
        vec![0.0],
        vec![3.0],
    )
    .unwrap();
    let s = solve(&p).unwrap();
    assert_eq!(s.x.unwrap(), vec![3.0]);
    assert_eq!(s.objective.unwrap(), -3.0);
}

#[test]
fn slack_fixed_at_zero() {
    let p = lp(
        &[1.0, 1.0, 0.0],
        &[(&[1.0, 1.0, -1.0], 2.0)],
        &[(0.0, 5.0), (0.0, 5.0), (0.0, 0.0)],
    );
    let s = solve(&p).unwrap();
    assert!((s.objective.unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn contradictory_rows_are_infeasible() {
    let p = lp(&[0.0], &[(&[1.0], 1.0), (&[1.0], 2.0)], &[(-INF, INF)]);
    assert_eq!(solve(&p).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn unbounded_direction() {
    let p = lp(&[-1.0, 0.0], &[(&[1.0, -1.0], 0.0)], &[(0.0, INF), (0.0, INF)]);
    assert_eq!(solve(&p).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn free_variables_stay_free() {
    // min x0 - x1 with x0 free, x1 in [-1, 4], x0 + x1 = 3
    let p = lp(&[1.0, -1.0], &[(&[1.0, 1.0], 3.0)], &[(-INF, INF), (-1.0, 4.0)]);
    let s = solve(&p).unwrap();
    let x = s.x.unwrap();
    assert!((x[0] + 1.0).abs() < 1e-12 && (x[1] - 4.0).abs() < 1e-12);
}

#[test]
fn malformed_problems_are_rejected() {
    let a = CscMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]);
    assert!(matches!(
        LpProblem::new(vec![0.0], a.clone(), vec![1.0], vec![0.0], vec![1.0]),
        Err(LpError::Construction(_))
    ));
    assert!(LpProblem::new(vec![0.0; 2], a.clone(), vec![1.0], vec![1.0, 0.0], vec![0.0; 2]).is_err());
    let empty_row = CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]);
    assert!(LpProblem::new(vec![0.0; 2], empty_row, vec![1.0, 0.0], vec![0.0; 2], vec![1.0; 2]).is_err());
}

#[test]
fn warm_start_reuses_basis() {
    let p = lp(
        &[1.0, 2.0, 0.0, -1.0],
        &[(&[1.0, 1.0, 1.0, 0.0], 4.0), (&[1.0, -1.0, 0.0, 1.0], 1.0)],
        &[(0.0, 3.0), (0.0, 3.0), (0.0, 3.0), (0.0, 2.0)],
    );
    let cold = solve(&p).unwrap();
    let warm = solve_with(&p, &SimplexOptions::default(), cold.basis.as_ref()).unwrap();
    assert!(warm.warm_started);
    assert_eq!(warm.iterations, 0);
    assert!((warm.objective.unwrap() - cold.objective.unwrap()).abs() < 1e-12);

    let stale = Basis { n_vars: 9, n_rows: 1, basic: vec![0], at_upper: vec![false; 9] };
    let s = solve_with(&p, &SimplexOptions::default(), Some(&stale)).unwrap();
    assert!(!s.warm_started);
}

#[test]
fn degenerate_cycling_example_terminates() {
    // Beale's cycling example in equality form with explicit slacks.
    let c = [-0.75, 150.0, -0.02, 6.0, 0.0, 0.0, 0.0];
    let rows: [(&[f64], f64); 3] = [
        (&[0.25, -60.0, -0.04, 9.0, 1.0, 0.0, 0.0], 0.0),
        (&[0.5, -90.0, -0.02, 3.0, 0.0, 1.0, 0.0], 0.0),
        (&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 1.0),
    ];
    let bounds = [(0.0, INF); 7];
    let s = solve(&lp(&c, &rows, &bounds)).unwrap();
    assert!((s.objective.unwrap() + 0.05).abs() < 1e-10);
}

/// Exhaustive vertex enumeration: every choice of basic set with the
/// remaining variables at either bound.
pub(crate) fn enumerate_vertices(p: &LpProblem) -> Option<f64> {
    let n = p.n_vars();
    let m = p.n_rows();
    let a = p.matrix();
    let dense: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (r, v) = a.col(j);
                    r.iter().position(|&x| x == i).map_or(0.0, |k| v[k])
                })
                .collect()
        })
        .collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << n) {
        let basic: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        if basic.len() > m {
            continue;
        }
        let nonbasic: Vec<usize> = (0..n).filter(|j| mask & (1 << j) == 0).collect();
        for choice in 0u32..(1 << nonbasic.len()) {
            let mut x = vec![0.0; n];
            for (k, &j) in nonbasic.iter().enumerate() {
                x[j] = if choice & (1 << k) != 0 { p.upper()[j] } else { p.lower()[j] };
            }
            // least squares on the basic columns
            let r: Vec<f64> = (0..m)
                .map(|i| p.rhs()[i] - (0..n).map(|j| dense[i][j] * x[j]).sum::<f64>())
                .collect();
            let ab = nalgebra::DMatrix::from_fn(m, basic.len(), |i, k| dense[i][basic[k]]);
            if !basic.is_empty() {
                let svd = ab.clone().svd(true, true);
                let Ok(sol) = svd.solve(&nalgebra::DVector::from_vec(r.clone()), 1e-12) else {
                    continue;
                };
                for (k, &j) in basic.iter().enumerate() {
                    x[j] = sol[k];
                }
            }
            if p.residual_inf(&x) <= 1e-9 && p.bound_violation(&x) <= 1e-9 {
                let obj = p.objective_at(&x);
                best = Some(best.map_or(obj, |b: f64| b.min(obj)));
            }
        }
    }
    best
}

fn random_lp() -> impl Strategy<Value = LpProblem> {
    (1usize..=6, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-3i32..=3, n),
            prop::collection::vec(prop::collection::vec(-3i32..=3, n), m),
            prop::collection::vec(-4i32..=4, m),
            prop::collection::vec((-3i32..=0, 0i32..=3), n),
        )
            .prop_filter_map("empty row", move |(c, a, b, bnd)| {
                if a.iter().any(|row| row.iter().all(|&v| v == 0)) {
                    return None;
                }
                let mut bl = LpBuilder::new(n);
                for j in 0..n {
                    bl.cost(j, c[j] as f64).bounds(j, bnd[j].0 as f64, bnd[j].1 as f64);
                }
                for (row, &rhs) in a.iter().zip(&b) {
                    bl.row(row.iter().enumerate().map(|(j, &v)| (j, v as f64)), rhs as f64);
                }
                bl.build().ok()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_vertex_enumeration(p in random_lp()) {
        let s = solve(&p).unwrap();
        match enumerate_vertices(&p) {
            None => prop_assert_eq!(s.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(s.status, LpStatus::Optimal);
                prop_assert!((s.objective.unwrap() - best).abs() <= 1e-8 * (1.0 + best.abs()));
            }
        }
    }

    #[test]
    fn optimal_points_are_basic(p in random_lp()) {
        let s = solve(&p).unwrap();
        if let Some(x) = s.x {
            let interior = x.iter().enumerate()
                .filter(|&(j, &v)| v > p.lower()[j] + 1e-9 && v < p.upper()[j] - 1e-9)
                .count();
            prop_assert!(interior <= p.n_rows());
            prop_assert!(p.residual_inf(&x) <= 1e-9);
        }
    }

    #[test]
    fn cost_scaling_scales_objective(p in random_lp(), alpha in 0.1f64..10.0) {
        let s = solve(&p).unwrap();
        let scaled = LpProblem::new(
            p.cost().iter().map(|c| c * alpha).collect(),
            p.matrix().clone(), p.rhs().to_vec(), p.lower().to_vec(), p.upper().to_vec(),
        ).unwrap();
        let t = solve(&scaled).unwrap();
        prop_assert_eq!(s.status, t.status);
        if let (Some(a), Some(b)) = (s.objective, t.objective) {
            prop_assert!((a * alpha - b).abs() <= 1e-8 * (1.0 + b.abs()));
        }
    }
}
