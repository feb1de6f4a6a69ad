//! Bounds from one LP over the global convex hull of the data, compared
//! with the adaptive local hulls.

use ddbounds::datagen::gen_linear_noisy;
use ddbounds::model::structures::three_bar;
use ddbounds::slp::{bounds, global_hull_solve, Objective, SlpConfig};

fn main() -> ddbounds::Result<()> {
    let m = three_bar().build_operators()?;
    let ds = gen_linear_noisy(201, [-1.0, 1.0], 1.0, 0.1, 1)?;
    let lo = global_hull_solve(&m, &ds, Objective::PlusDof(0))?;
    let hi = global_hull_solve(&m, &ds, Objective::MinusDof(0))?;
    println!("global hull: U1 in [{:.4}, {:.4}]", lo.u[0], hi.u[0]);
    let cfg = SlpConfig { n_c: 5, l1: Some(25.0), rho: 1.5, tol: 0.01, ..SlpConfig::default() };
    let b = bounds(&m, &ds, &cfg, 0)?;
    println!("local hulls: U1 in [{:.4}, {:.4}], comparable {:.4}", b.lower, b.upper, b.comparable);
    Ok(())
}
