//! Displacement bounds of the three-bar truss from data enveloped by the
//! lines `sigma = 0.8 eps` and `sigma = 1.2 eps`. The exact bounds are the
//! all-stiff and all-soft linear responses, 5/12 and 5/8.

use ddbounds::datagen::gen_regularized;
use ddbounds::model::structures::three_bar;
use ddbounds::slp::{bounds, SlpConfig};

fn main() -> ddbounds::Result<()> {
    let model = three_bar().build_operators()?;
    let data = gen_regularized(201, [-1.0, 1.0], &[0.8, 1.2])?;
    let cfg = SlpConfig { n_c: 5, l1: Some(25.0), rho: 1.5, tol: 0.01, ..SlpConfig::default() };
    let b = bounds(&model, &data, &cfg, 0)?;
    for (name, r) in [("lower", &b.lower_report), ("comparable", &b.comparable_report), ("upper", &b.upper_report)] {
        let path: Vec<String> = r.history.iter().filter_map(|h| h.objective).map(|v| format!("{:.4}", v.abs())).collect();
        println!("{name:<10} U1 = {:.4}  {:?} in {} iterations: {}", r.u[0], r.status, r.iterations, path.join(" "));
    }
    println!("exact: [{:.4}, {:.4}]", 5.0 / 12.0, 0.625);
    Ok(())
}
