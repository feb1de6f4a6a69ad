use proptest::prelude::*;

use ddbounds::datagen::{derive_seed, gen_linear_noisy, gen_regularized, Stream};
use ddbounds::ddcm::{ddcm_solve, DdcmOptions};
use ddbounds::lp::{self, LpBuilder, LpStatus};
use ddbounds::model::structures::three_bar;
use ddbounds::nn::{brute_force, KdForest};
use ddbounds::phase::{DataSet, PhasePoint};
use ddbounds::slp::{bounds, slp_solve, SlpConfig};

fn three_bar_cfg() -> SlpConfig {
    SlpConfig {
        n_c: 5,
        l1: Some(25.0),
        rho: 1.5,
        tol: 0.01,
        ..SlpConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// An LP built around a known feasible point is solved to a feasible
    /// point at least as good.
    #[test]
    fn lp_optimum_is_feasible_and_no_worse(seed in any::<u64>(), n in 2usize..10, m in 0usize..5) {
        let m = m.min(n - 1);
        let mut rng = Stream::new(seed);
        let x0: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
        let mut b = LpBuilder::new(n);
        for j in 0..n {
            b.cost(j, 2.0 * rng.uniform() - 1.0).bounds(j, 0.0, 1.0);
        }
        for _ in 0..m {
            let row: Vec<(usize, f64)> = (0..n).map(|j| (j, 2.0 * rng.uniform() - 1.0)).collect();
            let rhs = row.iter().map(|&(j, a)| a * x0[j]).sum();
            b.row(row, rhs);
        }
        let p = b.build().unwrap();
        let s = lp::solve(&p).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        let x = s.x.unwrap();
        prop_assert!(p.residual_inf(&x) < 1e-9);
        prop_assert!(p.bound_violation(&x) < 1e-9);
        prop_assert!(p.objective_at(&x) <= p.objective_at(&x0) + 1e-9);
    }

    #[test]
    fn canonical_sort_is_a_permutation(seed in any::<u64>(), n in 1usize..60) {
        let mut rng = Stream::new(seed);
        let pts: Vec<PhasePoint> = (0..n)
            .map(|_| PhasePoint::scalar(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0).unwrap())
            .collect();
        let ds = DataSet::from_points(&pts, "random").unwrap();
        let sorted = ds.sort_canonical().unwrap();
        prop_assert!(sorted.is_sorted());
        let key = |p: &PhasePoint| (p.strain[0].to_bits(), p.stress[0].to_bits());
        let mut a: Vec<_> = ds.points().map(|p| key(&p)).collect();
        let mut b: Vec<_> = sorted.points().map(|p| key(&p)).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip_is_exact(seed in any::<u64>(), n in 2usize..50) {
        let ds = gen_linear_noisy(n, [-1.0, 1.0], 1.3, 0.1, seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        ds.save(&path).unwrap();
        let back = DataSet::load(&path).unwrap();
        prop_assert_eq!(back.len(), ds.len());
        for i in 0..ds.len() {
            prop_assert_eq!(back.strain(i)[0].to_bits(), ds.strain(i)[0].to_bits());
            prop_assert_eq!(back.stress(i)[0].to_bits(), ds.stress(i)[0].to_bits());
        }
    }

    /// With every leaf allowed, the forest search is exhaustive.
    #[test]
    fn forest_with_unlimited_checks_is_exact(seed in any::<u64>(), dim in 1usize..8) {
        let n = 500;
        let mut rng = Stream::new(seed);
        let pts: Vec<f64> = (0..n * dim).map(|_| rng.uniform()).collect();
        let forest = KdForest::build(dim, &pts, 4, derive_seed(seed, &[1]));
        for _ in 0..20 {
            let q: Vec<f64> = (0..dim).map(|_| rng.uniform()).collect();
            let a = forest.nearest(&pts, &q, usize::MAX);
            let b = brute_force(dim, &pts, &q);
            let d = |i: usize| (0..dim).map(|k| (pts[i * dim + k] - q[k]).powi(2)).sum::<f64>();
            prop_assert_eq!(d(a), d(b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ddcm_distance_never_increases(seed in any::<u64>(), cap in 0.0f64..0.2) {
        let m = three_bar().build_operators().unwrap();
        let ds = gen_linear_noisy(101, [-1.0, 1.0], 1.0, cap, seed).unwrap();
        let s = ddcm_solve(&m, &ds, None, &DdcmOptions::default()).unwrap();
        for w in s.objective.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    /// Hulls of data enveloped by two lines cannot leave the interval
    /// spanned by the two linear solutions, `0.5 / E`.
    #[test]
    fn regularized_bounds_stay_inside_the_envelope(soft in 0.5f64..0.95, stiff in 1.05f64..1.5) {
        let m = three_bar().build_operators().unwrap();
        let ds = gen_regularized(201, [-1.0, 1.0], &[soft, stiff]).unwrap();
        let b = bounds(&m, &ds, &three_bar_cfg(), 0).unwrap();
        prop_assert!(b.lower <= b.comparable + 1e-12 && b.comparable <= b.upper + 1e-12);
        prop_assert!(b.lower >= 0.5 / stiff - 1e-9, "lower {} below {}", b.lower, 0.5 / stiff);
        prop_assert!(b.upper <= 0.5 / soft + 1e-9, "upper {} above {}", b.upper, 0.5 / soft);
    }

    /// Every feasible iterate equilibrates the load and matches the
    /// compatible strains.
    #[test]
    fn solution_satisfies_field_equations(seed in any::<u64>()) {
        let m = three_bar().build_operators().unwrap();
        let ds = gen_linear_noisy(201, [-1.0, 1.0], 1.0, 0.1, seed).unwrap();
        let r = slp_solve(&m, &ds, &three_bar_cfg()).unwrap();
        prop_assume!(r.last_feasible());
        for (a, b) in m.strains(&r.u).iter().zip(&r.strain) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in m.internal_force(&r.stress).iter().zip(&m.load) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
