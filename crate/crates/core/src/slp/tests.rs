use super::*;
use crate::datagen::{gen_linear_noisy, gen_regularized};
use crate::model::structures::three_bar;
use crate::phase::PhasePoint;

fn three_bar_model() -> StructModel {
    three_bar().build_operators().unwrap()
}

fn paper_cfg() -> SlpConfig {
    SlpConfig {
        n_c: 5,
        l1: Some(25.0),
        rho: 1.5,
        tol: 0.01,
        ..SlpConfig::default()
    }
}

#[test]
fn regularized_three_bar_bounds() {
    let m = three_bar_model();
    let ds = gen_regularized(201, [-1.0, 1.0], &[0.8, 1.2]).unwrap();
    let b = bounds(&m, &ds, &paper_cfg(), 0).unwrap();
    assert!(b.all_converged());
    assert!((b.lower - 5.0 / 12.0).abs() < 5e-3, "lower {}", b.lower);
    assert!((b.upper - 0.625).abs() < 5e-3, "upper {}", b.upper);
    assert!(b.lower <= b.comparable && b.comparable <= b.upper);
}

#[test]
fn noisy_comparable_inside_bounds() {
    let m = three_bar_model();
    for seed in 0..5 {
        let ds = gen_linear_noisy(201, [-1.0, 1.0], 1.0, 0.1, seed).unwrap();
        let b = bounds(&m, &ds, &paper_cfg(), 0).unwrap();
        assert!(b.lower <= b.upper + 1e-9, "seed {seed}: {} > {}", b.lower, b.upper);
        let r = resolve_on_hulls(&m, &ds, &b.comparable_report, 0).unwrap().unwrap();
        assert!(r.0 <= b.comparable + 1e-9 && b.comparable <= r.1 + 1e-9);
    }
}

#[test]
fn feasible_iterates_satisfy_lp_rows() {
    let m = three_bar_model();
    let ds = gen_linear_noisy(201, [-1.0, 1.0], 1.0, 0.1, 3).unwrap();
    let r = slp_solve(&m, &ds, &paper_cfg()).unwrap();
    assert!(r.last_feasible());
    let lam = r.lambda.as_ref().unwrap();
    for set in lam.chunks(5) {
        assert!((set.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(set.iter().all(|&l| (-1e-9..=1.0 + 1e-9).contains(&l)));
    }
    let eps = m.strains(&r.u);
    for (a, b) in eps.iter().zip(&r.strain) {
        assert!((a - b).abs() < 1e-9);
    }
    for (a, b) in m.internal_force(&r.stress).iter().zip(&m.load) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn stationary_hull_converges_at_second_iterate() {
    let m = three_bar_model();
    // Six points on sigma = eps: the initial hulls already hold the exact
    // linear state, and N_d = 6 pins the stride to 1.
    let pts: Vec<_> = [-1.0, -0.6, -0.2, 0.2, 0.6, 1.0]
        .iter()
        .map(|&e| PhasePoint::scalar(e, e).unwrap())
        .collect();
    let ds = DataSet::from_points(&pts, "line").unwrap();
    let cfg = SlpConfig { n_c: 5, ..SlpConfig::default() };
    let r = slp_solve(&m, &ds, &cfg).unwrap();
    assert!(r.converged);
    assert_eq!(r.iterations, 2);
    assert!((r.u[0] - 0.5).abs() < 1e-9 && r.u[1].abs() < 1e-9);
}

#[test]
fn never_feasible_is_flagged() {
    let m = three_bar_model();
    // stresses all positive: no state balances the load direction
    let pts: Vec<_> = (0..30)
        .map(|i| PhasePoint::scalar(i as f64 * 0.01, 1.0 + i as f64 * 0.01).unwrap())
        .collect();
    let ds = DataSet::from_points(&pts, "bad").unwrap();
    let cfg = SlpConfig { max_iter: 5, ..SlpConfig::default() };
    let r = slp_solve(&m, &ds, &cfg).unwrap();
    assert_eq!(r.status, SolveStatus::Infeasible);
    assert!(!r.converged);
    assert!(r.history.len() <= 5);
    assert!(r.history.iter().all(|h| !h.feasible));
    assert!(r.history.windows(2).all(|w| w[1].l >= w[0].l));
}

#[test]
fn global_hull_is_wider_than_local() {
    let m = three_bar_model();
    let ds = gen_linear_noisy(201, [-1.0, 1.0], 1.0, 0.1, 11).unwrap();
    let g_lo = global_hull_solve(&m, &ds, Objective::PlusDof(0)).unwrap();
    let g_hi = global_hull_solve(&m, &ds, Objective::MinusDof(0)).unwrap();
    let b = bounds(&m, &ds, &paper_cfg(), 0).unwrap();
    assert!(g_lo.u[0] <= b.lower + 1e-9);
    assert!(g_hi.u[0] >= b.upper - 1e-9);
}

#[test]
fn symmetric_truss_symmetric_bounds() {
    use crate::model::truss::{Bar, TrussModel};
    use std::collections::BTreeMap;
    // two free nodes mirrored about x = 0, loaded symmetrically downward
    let t = TrussModel {
        nodes: vec![
            vec![-1.0, 0.0],
            vec![1.0, 0.0],
            vec![-2.0, 1.0],
            vec![2.0, 1.0],
            vec![-1.0, 1.0],
            vec![1.0, 1.0],
        ],
        bars: vec![
            Bar { a: 2, b: 0, area: 1.0 },
            Bar { a: 3, b: 1, area: 1.0 },
            Bar { a: 4, b: 0, area: 1.0 },
            Bar { a: 5, b: 1, area: 1.0 },
        ],
        fixed_dofs: (4..12).collect(),
        loads: BTreeMap::from([(1, -0.3), (3, -0.3)]),
    };
    let m = t.build_operators().unwrap();
    let ds = gen_linear_noisy(201, [-1.0, 1.0], 1.0, 0.1, 5).unwrap();
    let a = bounds(&m, &ds, &paper_cfg(), 1).unwrap();
    let b = bounds(&m, &ds, &paper_cfg(), 3).unwrap();
    assert!((a.lower - b.lower).abs() < 1e-9, "{} {}", a.lower, b.lower);
    assert!((a.upper - b.upper).abs() < 1e-9, "{} {}", a.upper, b.upper);
}

#[test]
fn config_validation() {
    let m = three_bar_model();
    let ds = gen_regularized(21, [-1.0, 1.0], &[1.0]).unwrap();
    let bad = [
        SlpConfig { n_c: 2, ..SlpConfig::default() },
        SlpConfig { rho: 1.0, ..SlpConfig::default() },
        SlpConfig { objective: Objective::PlusDof(9), ..SlpConfig::default() },
        SlpConfig { l1: Some(2.5), ..SlpConfig::default() },
    ];
    for cfg in bad {
        assert!(matches!(slp_solve(&m, &ds, &cfg), Err(Error::Config(_))), "{cfg:?}");
    }
}

#[test]
fn history_csv_has_header_and_rows() {
    let m = three_bar_model();
    let ds = gen_linear_noisy(101, [-1.0, 1.0], 1.0, 0.1, 1).unwrap();
    let r = slp_solve(&m, &ds, &paper_cfg()).unwrap();
    let csv = r.history_csv().unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert!(lines[0].starts_with("k,objective,l,feasible"));
    assert_eq!(lines.len(), r.history.len() + 1);
    let back: SolveReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}
