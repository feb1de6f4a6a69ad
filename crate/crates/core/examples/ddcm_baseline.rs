//! Classical distance-minimizing fixed point on clean and noisy truss data.

use ddbounds::datagen::gen_linear_noisy;
use ddbounds::ddcm::{ddcm_solve, DdcmOptions};
use ddbounds::metrics::{compute_errors, Fields};
use ddbounds::model::structures::tower;
use ddbounds::model::Reference;

fn main() -> ddbounds::Result<()> {
    let m = tower().build_operators()?;
    let r = Reference::Linear { modulus: 1.0 }.solve(&m)?;
    let reach = 1.2 * r.strain.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    for cap in [0.0, 0.02] {
        let ds = gen_linear_noisy(2001, [-reach, reach], 1.0, cap, 4)?;
        let s = ddcm_solve(&m, &ds, None, &DdcmOptions::default())?;
        let e = compute_errors(Fields::new(&s.u, &s.strain, &s.stress), Fields::new(&r.u, &r.strain, &r.stress), m.n_members())?;
        println!(
            "noise cap {cap}: converged {} in {} sweeps, U_RE {:.2e}, distance {:.3e} -> {:.3e}",
            s.converged,
            s.iterations,
            e.u_re,
            s.objective[0],
            s.objective[s.objective.len() - 1]
        );
    }
    Ok(())
}
