//! Replicate experiment over noise levels with common random numbers,
//! written as CSV to stdout.

use ddbounds::datagen::GenSpec;
use ddbounds::model::structures::Structure;
use ddbounds::model::Reference;
use ddbounds::slp::SlpConfig;
use ddbounds::sweep::{run_sweep, SweepSpec};

fn main() -> ddbounds::Result<()> {
    let spec = SweepSpec {
        structure: Structure::ThreeBar,
        reference: Some(Reference::Linear { modulus: 1.0 }),
        data: GenSpec::Linear { n_d: 201, range: [-1.0, 1.0], modulus: 1.0, cap: 0.1, seed: 0 },
        noise: vec![0.02, 0.05, 0.1],
        outliers: vec![0, 8],
        factors: vec![1.2],
        replicates: 10,
        seed: 3,
        slp: SlpConfig { n_c: 5, l1: Some(25.0), rho: 1.5, tol: 0.01, ..SlpConfig::default() },
        dof: Some(0),
    };
    let report = run_sweep(&spec, None)?;
    print!("{}", report.to_csv()?);
    Ok(())
}
