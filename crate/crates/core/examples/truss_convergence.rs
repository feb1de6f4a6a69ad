//! Error of the 80-bar tower against the Newton reference as noiseless
//! cube-root data is refined.

use ddbounds::datagen::gen_cuberoot_noisy;
use ddbounds::metrics::{compute_errors, Fields};
use ddbounds::model::structures::tower;
use ddbounds::model::Reference;
use ddbounds::slp::{slp_solve, SlpConfig};

fn main() -> ddbounds::Result<()> {
    let m = tower().build_operators()?;
    let r = Reference::CubeRoot.solve(&m)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>5}", "N_d", "U_RE", "eps_RMS", "sig_RMS", "iter");
    for nd in [41, 101, 1001, 10001] {
        let ds = gen_cuberoot_noisy(nd, [-1.5, 1.5], 0.0, 0)?;
        let cfg = SlpConfig { n_c: 5, l1: Some((nd / 5 + 1) as f64), rho: 2.0, tol: 1e-3, ..SlpConfig::default() };
        let s = slp_solve(&m, &ds, &cfg)?;
        let e = compute_errors(Fields::new(&s.u, &s.strain, &s.stress), Fields::new(&r.u, &r.strain, &r.stress), m.n_members())?;
        println!("{nd:>6} {:>10.3e} {:>10.3e} {:>10.3e} {:>5}", e.u_re, e.eps_rms, e.sigma_rms, s.iterations);
    }
    Ok(())
}
