//! Bounds of the tip deflection of the hexahedral cantilever from a noisy
//! 6-D elastic dataset. Takes a minute or two.
//!
//! `cargo run --release --example continuum_bounds -- [per_axis] [noise_std]`

use ddbounds::datagen::GenSpec;
use ddbounds::metrics::{compute_errors, Fields};
use ddbounds::model::structures::{cantilever, cantilever_tip_dof, CANTILEVER_LOAD};
use ddbounds::model::Reference;
use ddbounds::slp::{bounds, SlpConfig};

fn main() -> ddbounds::Result<()> {
    let mut args = std::env::args().skip(1);
    let per_axis = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let noise = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.005);
    let mesh = cantilever(CANTILEVER_LOAD);
    let m = mesh.build_gauss_operators()?;
    let reference = Reference::Elastic { modulus: 1.0, poisson: 0.3 }.solve(&m)?;
    let data = GenSpec::Gauss6d {
        per_axis,
        range: [-0.1, 0.1],
        noise,
        noise_is_std: true,
        modulus: 1.0,
        poisson: 0.3,
        seed: 1,
    }
    .generate()?;
    let tip = cantilever_tip_dof(&mesh);
    let cfg = SlpConfig { max_iter: 15, ..SlpConfig::continuum() };
    let b = bounds(&m, &data, &cfg, tip)?;
    println!("{} Gauss points, {} data points", m.n_members(), data.len());
    for (name, r) in [("lower", &b.lower_report), ("comparable", &b.comparable_report), ("upper", &b.upper_report)] {
        let e = compute_errors(
            Fields::new(&r.u, &r.strain, &r.stress),
            Fields::new(&reference.u, &reference.strain, &reference.stress),
            m.n_members(),
        )?;
        println!(
            "{name:<10} tip {:.5}  U_RE {:.4}  sigma_RMS {:.4}  {:?} after {} iterations, LP {:.1} s",
            r.u[tip], e.u_re, e.sigma_rms, r.status, r.iterations, r.lp_time
        );
    }
    println!("reference  tip {:.5}", reference.u[tip]);
    Ok(())
}
