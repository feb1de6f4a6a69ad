//! Generates each synthetic dataset kind and writes it as CSV plus sidecar.
//!
//! `cargo run --example generate_data -- out-dir`

use std::path::PathBuf;

use ddbounds::datagen::{inject_outliers, GenSpec};

fn main() -> ddbounds::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "ddbounds-data".into()));
    std::fs::create_dir_all(&dir).map_err(|e| ddbounds::Error::Io { path: dir.clone(), source: e })?;
    let specs = [
        GenSpec::Linear { n_d: 201, range: [-1.0, 1.0], modulus: 1.0, cap: 0.1, seed: 1 },
        GenSpec::CubeRoot { n_d: 121, range: [-1.5, 1.5], theta0: 0.04, seed: 1 },
        GenSpec::Regularized { per_line: 201, range: [-1.0, 1.0], moduli: vec![0.8, 1.2] },
        GenSpec::Gauss6d {
            per_axis: 3,
            range: [-0.1, 0.1],
            noise: 0.005,
            noise_is_std: true,
            modulus: 1.0,
            poisson: 0.3,
            seed: 1,
        },
    ];
    for spec in &specs {
        let ds = spec.generate()?;
        let path = dir.join(format!("{}.csv", spec.label()));
        ds.save(&path)?;
        println!("{:<12} {:>6} points of dimension {} -> {}", spec.label(), ds.len(), ds.dim(), path.display());
    }
    let noisy = specs[1].generate()?;
    let dirty = inject_outliers(&noisy, 16, 1.2, 99)?;
    dirty.save(&dir.join("cuberoot_outliers.csv"))?;
    println!("cuberoot with 16 outliers scaled by 1.2 written");
    Ok(())
}
