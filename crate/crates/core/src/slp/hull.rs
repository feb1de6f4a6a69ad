//! Local hull selection and update rules. Data indices are 0-based into the
//! canonically sorted dataset.

use rayon::prelude::*;

use super::config::LambdaBounds;
use crate::nn::NnIndex;
use crate::phase::{estimate_scaling, DataSet};
use crate::{Error, Result};

/// Stride used to seed the hulls: `floor((N_d - 1)/N_c)`.
pub fn default_stride(n_d: usize, n_c: usize) -> usize {
    n_d.saturating_sub(1) / n_c
}

/// Largest stride for which a window of `n_c` points fits in the dataset.
pub fn max_stride(n_d: usize, n_c: usize) -> usize {
    (n_d.saturating_sub(1) / (n_c - 1)).max(1)
}

/// Every member starts from `{0, L, 2L, ..., (N_c - 1) L}`. `stride = None`
/// takes [`default_stride`].
pub fn init_local_sets(n_d: usize, n_c: usize, stride: Option<usize>, m: usize) -> Result<Vec<Vec<usize>>> {
    let l = stride.unwrap_or_else(|| default_stride(n_d, n_c));
    if l == 0 {
        return Err(Error::DatasetTooSmall {
            required: n_c + 1,
            available: n_d,
        });
    }
    let required = 1 + (n_c - 1) * l;
    if n_d < required {
        return Err(Error::DatasetTooSmall {
            required,
            available: n_d,
        });
    }
    let set: Vec<usize> = (0..n_c).map(|j| j * l).collect();
    Ok(vec![set; m])
}

/// Window of `n_c` indices with stride `l` around `center`, offsets
/// `(j - floor(n_c/2)) l`, shifted inward to stay within `[0, n_d)`.
/// `l` must not exceed [`max_stride`].
pub fn window(center: usize, n_c: usize, l: usize, n_d: usize) -> Vec<usize> {
    let t = n_c / 2;
    let span = (n_c - 1) * l;
    debug_assert!(span < n_d);
    let lo = center.saturating_sub(t * l).min(n_d - 1 - span);
    (0..n_c).map(|j| lo + j * l).collect()
}

/// Next stride: `max(1, floor(L/rho))` after a feasible LP, `L + 1`
/// otherwise, capped so the window fits.
pub fn next_stride(l: usize, rho: f64, feasible: bool, cap: usize) -> usize {
    let next = if feasible {
        ((l as f64 / rho).floor() as usize).max(1)
    } else {
        l + 1
    };
    next.min(cap)
}

/// Re-centres every member's window on the data point nearest its current
/// state.
pub fn update_window_1d(
    nn: &NnIndex,
    strain: &[f64],
    stress: &[f64],
    n_c: usize,
    l: usize,
    n_d: usize,
) -> Result<Vec<Vec<usize>>> {
    (0..strain.len())
        .into_par_iter()
        .map(|e| {
            let id = nn.nearest_state(&strain[e..e + 1], &stress[e..e + 1])?;
            Ok(window(id, n_c, l, n_d))
        })
        .collect()
}

/// Edge parameters `(p, q, gamma)` of the regular simplex with edge `l`.
pub fn simplex_params(l: f64) -> (f64, f64, f64) {
    let s7 = 7f64.sqrt();
    let k = l / (6.0 * 2f64.sqrt());
    let p = k * (5.0 + s7);
    let q = k * (s7 - 1.0);
    (p, q, (5.0 * q + p) / 7.0)
}

/// The seven vertices of the regular simplex of edge `l` centred on
/// `(strain, stress)`. Stress offsets are the strain offsets premultiplied
/// by `scale`.
pub fn simplex_vertices(strain: &[f64], stress: &[f64], l: f64, scale: &[f64]) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Config(format!("simplex edge {l} must be positive")));
    }
    for v in [strain.len(), stress.len(), scale.len()] {
        if v != 6 {
            return Err(Error::DimensionMismatch { expected: 6, got: v });
        }
    }
    let (p, q, g) = simplex_params(l);
    let offset = |j: usize| -> [f64; 6] {
        let mut o = [-g; 6];
        if j > 0 {
            for (k, x) in o.iter_mut().enumerate() {
                *x += if k == j - 1 { p } else { q };
            }
        }
        o
    };
    Ok((0..7)
        .map(|j| {
            let o = offset(j);
            let e = (0..6).map(|k| strain[k] + o[k]).collect();
            let s = (0..6).map(|k| stress[k] + scale[k] * o[k]).collect();
            (e, s)
        })
        .collect())
}

/// Next simplex edge: `max(L1/rho^k, L_min)` after feasible iteration `k`,
/// `1.1 L` otherwise.
pub fn next_edge(l1: f64, rho: f64, k: usize, l_min: f64, l: f64, feasible: bool) -> f64 {
    if feasible {
        (l1 / rho.powi(k as i32)).max(l_min)
    } else {
        1.1 * l
    }
}

/// Snaps the simplex around each member state to its nearest data points.
/// `n_c > 7` adds vertices of the simplex reflected through the state.
pub fn update_simplex_6d(
    ds: &DataSet,
    nn: &NnIndex,
    local: &[Vec<usize>],
    strain: &[f64],
    stress: &[f64],
    l: f64,
) -> Result<Vec<Vec<usize>>> {
    local
        .par_iter()
        .enumerate()
        .map(|(e, set)| {
            let n_c = set.len();
            let scale = estimate_scaling(set.iter().map(|&i| (ds.strain(i), ds.stress(i))));
            let (se, ss) = (&strain[6 * e..6 * e + 6], &stress[6 * e..6 * e + 6]);
            let mut verts = simplex_vertices(se, ss, l, scale.diag())?;
            for j in 0..n_c.saturating_sub(7) {
                let (ve, vs) = &verts[j];
                let re = se.iter().zip(ve).map(|(c, v)| 2.0 * c - v).collect();
                let rs = ss.iter().zip(vs).map(|(c, v)| 2.0 * c - v).collect();
                verts.push((re, rs));
            }
            verts.iter().take(n_c).map(|(ve, vs)| nn.nearest_state(ve, vs)).collect()
        })
        .collect()
}

/// Widens the bounds by one on each side after an infeasible LP; otherwise
/// moves each halfway back to nominal, snapping once within 0.05.
pub fn relax_lambda_bounds(cur: LambdaBounds, nominal: LambdaBounds, feasible: bool) -> LambdaBounds {
    if !feasible {
        return LambdaBounds {
            lo: cur.lo - 1.0,
            hi: cur.hi + 1.0,
        };
    }
    let back = |c: f64, n: f64| {
        let h = 0.5 * (c + n);
        if (h - n).abs() <= 0.05 {
            n
        } else {
            h
        }
    };
    LambdaBounds {
        lo: back(cur.lo, nominal.lo),
        hi: back(cur.hi, nominal.hi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn initial_sets() {
        let s = init_local_sets(201, 5, None, 2).unwrap();
        assert_eq!(s, vec![vec![0, 40, 80, 120, 160]; 2]);
        let s = init_local_sets(6, 5, None, 1).unwrap();
        assert_eq!(s[0], vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn too_small_dataset() {
        match init_local_sets(5, 5, None, 1) {
            Err(Error::DatasetTooSmall { required, available }) => assert_eq!((required, available), (6, 5)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            init_local_sets(100, 5, Some(25), 1),
            Err(Error::DatasetTooSmall { required: 101, .. })
        ));
    }

    #[test]
    fn stride_updates() {
        assert_eq!(next_stride(4, 1.5, true, 100), 2);
        assert_eq!(next_stride(1, 2.0, true, 100), 1);
        assert_eq!(next_stride(3, 1.5, false, 100), 4);
        assert_eq!(next_stride(30, 1.5, false, 30), 30);
        assert_eq!(window(50, 5, 2, 201), vec![46, 48, 50, 52, 54]);
    }

    #[test]
    fn window_shifts_inward() {
        assert_eq!(window(1, 5, 1, 100), vec![0, 1, 2, 3, 4]);
        assert_eq!(window(99, 5, 3, 100), vec![87, 90, 93, 96, 99]);
        assert_eq!(window(5, 4, 2, 100), vec![1, 3, 5, 7]);
    }

    #[test]
    fn simplex_parameters() {
        let (p, q, _) = simplex_params(6.0 * 2f64.sqrt());
        assert!((p - (5.0 + 7f64.sqrt())).abs() < 1e-12);
        assert!((p - 7.645751).abs() < 1e-6 && (q - 1.645751).abs() < 1e-6);
        assert!(simplex_vertices(&[0.0; 6], &[0.0; 6], 0.0, &[1.0; 6]).is_err());
    }

    #[test]
    fn edge_updates() {
        assert!((next_edge(1.0, 1.5, 2, 0.2, 0.5, true) - 1.0 / 2.25).abs() < 1e-15);
        assert_eq!(next_edge(1.0, 1.5, 10, 0.2, 0.3, true), 0.2);
        assert!((next_edge(1.0, 1.5, 3, 0.2, 1.0, false) - 1.1).abs() < 1e-15);
    }

    #[test]
    fn lambda_relaxation() {
        let nom = LambdaBounds { lo: -0.5, hi: 1.5 };
        assert_eq!(relax_lambda_bounds(nom, nom, false), LambdaBounds { lo: -1.5, hi: 2.5 });
        assert_eq!(
            relax_lambda_bounds(LambdaBounds { lo: -1.5, hi: 2.5 }, nom, true),
            LambdaBounds { lo: -1.0, hi: 2.0 }
        );
        assert_eq!(relax_lambda_bounds(LambdaBounds { lo: -0.52, hi: 1.52 }, nom, true), nom);
    }

    proptest! {
        #[test]
        fn simplex_is_regular_and_centred(
            c in prop::collection::vec(-1.0f64..1.0, 6),
            s in prop::collection::vec(-1.0f64..1.0, 6),
            d in prop::collection::vec(0.1f64..10.0, 6),
            l in 1e-3f64..10.0,
        ) {
            let v = simplex_vertices(&c, &s, l, &d).unwrap();
            for a in 0..7 {
                for b in a + 1..7 {
                    let dist = v[a].0.iter().zip(&v[b].0).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                    prop_assert!((dist - l).abs() <= 1e-12 * l.max(1.0));
                }
            }
            for k in 0..6 {
                let m = v.iter().map(|x| x.0[k]).sum::<f64>() / 7.0;
                prop_assert!((m - c[k]).abs() <= 1e-12);
                let ms = v.iter().map(|x| x.1[k]).sum::<f64>() / 7.0;
                prop_assert!((ms - s[k]).abs() <= 1e-12 * (1.0 + d[k]));
            }
        }

        #[test]
        fn windows_stay_inside(n_d in 5usize..500, n_c in 3usize..9, c in 0usize..500, l in 1usize..100) {
            prop_assume!(n_d > n_c);
            let l = l.min(max_stride(n_d, n_c));
            let w = window(c % n_d, n_c, l, n_d);
            prop_assert_eq!(w.len(), n_c);
            prop_assert!(w.iter().all(|&i| i < n_d));
            prop_assert!(w.windows(2).all(|p| p[1] - p[0] == l));
        }
    }
}
