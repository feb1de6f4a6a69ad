//! Seeded synthetic stress-strain datasets.
//!
//! All randomness comes from ChaCha8 seeded through `seed_from_u64`.
//! Uniform variates take the top 53 bits of `next_u64`; normal variates use
//! the Marsaglia polar method, consuming both outputs of each accepted pair.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::model::{isotropic_elastic, mat_vec};
use crate::phase::{DataSet, Provenance};
use crate::{Error, Result};

/// Deterministic variate source.
pub struct Stream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for a path of counters under `base`, e.g.
/// `derive_seed(seed, &[replicate, member])`. Each step is one SplitMix64
/// finalization of the running state xor-ed with the counter.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix(base), |acc, &k| splitmix(acc ^ splitmix(k.wrapping_add(1))))
}

fn default_linear_range() -> [f64; 2] {
    [-1.0, 1.0]
}
fn default_cuberoot_range() -> [f64; 2] {
    [-1.5, 1.5]
}
fn default_gauss_range() -> [f64; 2] {
    [-0.1, 0.1]
}
fn default_cap() -> f64 {
    0.1
}
fn one() -> f64 {
    1.0
}
fn default_nu() -> f64 {
    0.3
}

/// Generator parameters. Serialized into the dataset sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenSpec {
    /// `sigma = E eps - t + 2 t U(0,1)` with `t = min(|E eps|, cap)`.
    Linear {
        n_d: usize,
        #[serde(default = "default_linear_range")]
        range: [f64; 2],
        #[serde(default = "one")]
        modulus: f64,
        #[serde(default = "default_cap")]
        cap: f64,
        seed: u64,
    },
    /// `sigma = cbrt(eps) - t + 2 t U(0,1)` with `t = min(theta0, |cbrt(eps)|)`.
    CubeRoot {
        n_d: usize,
        #[serde(default = "default_cuberoot_range")]
        range: [f64; 2],
        theta0: f64,
        seed: u64,
    },
    /// Noise-free points on the lines `sigma = E_k eps`, `per_line` each,
    /// with the origin stored once.
    Regularized {
        per_line: usize,
        #[serde(default = "default_linear_range")]
        range: [f64; 2],
        moduli: Vec<f64>,
    },
    /// Tensor grid of Voigt strains with isotropic elastic stresses, plus
    /// independent normal noise on every component.
    Gauss6d {
        per_axis: usize,
        #[serde(default = "default_gauss_range")]
        range: [f64; 2],
        /// Variance of the noise unless `noise_is_std` is set.
        noise: f64,
        #[serde(default)]
        noise_is_std: bool,
        #[serde(default = "one")]
        modulus: f64,
        #[serde(default = "default_nu")]
        poisson: f64,
        seed: u64,
    },
}

impl GenSpec {
    pub fn seed(&self) -> Option<u64> {
        match *self {
            GenSpec::Linear { seed, .. }
            | GenSpec::CubeRoot { seed, .. }
            | GenSpec::Gauss6d { seed, .. } => Some(seed),
            GenSpec::Regularized { .. } => None,
        }
    }

    /// The same spec with its seed replaced. Regularized data has none.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            GenSpec::Linear { seed: s, .. } | GenSpec::CubeRoot { seed: s, .. } | GenSpec::Gauss6d { seed: s, .. } => {
                *s = seed
            }
            GenSpec::Regularized { .. } => {}
        }
        out
    }

    /// The noise level: `cap`, `theta0` or the Gaussian parameter.
    pub fn noise(&self) -> Option<f64> {
        match *self {
            GenSpec::Linear { cap, .. } => Some(cap),
            GenSpec::CubeRoot { theta0, .. } => Some(theta0),
            GenSpec::Gauss6d { noise, .. } => Some(noise),
            GenSpec::Regularized { .. } => None,
        }
    }

    /// The same spec at another noise level.
    pub fn with_noise(&self, level: f64) -> Result<Self> {
        let mut out = self.clone();
        match &mut out {
            GenSpec::Linear { cap: v, .. } | GenSpec::CubeRoot { theta0: v, .. } | GenSpec::Gauss6d { noise: v, .. } => {
                *v = level
            }
            GenSpec::Regularized { .. } => {
                return Err(Error::Config("regularized data has no noise level".into()));
            }
        }
        Ok(out)
    }

    pub fn label(&self) -> &'static str {
        match self {
            GenSpec::Linear { .. } => "linear",
            GenSpec::CubeRoot { .. } => "cuberoot",
            GenSpec::Regularized { .. } => "regularized",
            GenSpec::Gauss6d { .. } => "gauss6d",
        }
    }

    pub fn generate(&self) -> Result<DataSet> {
        let mut ds = match self {
            GenSpec::Linear {
                n_d,
                range,
                modulus,
                cap,
                seed,
            } => gen_linear_noisy(*n_d, *range, *modulus, *cap, *seed)?,
            GenSpec::CubeRoot {
                n_d,
                range,
                theta0,
                seed,
            } => gen_cuberoot_noisy(*n_d, *range, *theta0, *seed)?,
            GenSpec::Regularized {
                per_line,
                range,
                moduli,
            } => gen_regularized(*per_line, *range, moduli)?,
            GenSpec::Gauss6d {
                per_axis,
                range,
                noise,
                noise_is_std,
                modulus,
                poisson,
                seed,
            } => {
                let std = if *noise_is_std { *noise } else { noise.sqrt() };
                gen_gauss6d(*per_axis, *range, std, *modulus, *poisson, *seed)?
            }
        };
        ds.label = self.label().to_string();
        ds.provenance = Provenance {
            generator: Some(serde_json::to_value(self)?),
            seed: self.seed(),
        };
        Ok(ds)
    }
}

fn spaced(n: usize, range: [f64; 2]) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::DatasetTooSmall {
            required: 2,
            available: n,
        });
    }
    if !(range[0] < range[1]) || !range[0].is_finite() || !range[1].is_finite() {
        return Err(Error::Config(format!("invalid strain range {range:?}")));
    }
    let step = (range[1] - range[0]) / (n - 1) as f64;
    Ok((0..n).map(|j| range[0] + step * j as f64).collect())
}

pub fn gen_linear_noisy(n_d: usize, range: [f64; 2], modulus: f64, cap: f64, seed: u64) -> Result<DataSet> {
    let mut rng = Stream::new(seed);
    let strain = spaced(n_d, range)?;
    let stress = strain
        .iter()
        .map(|&e| {
            let s = modulus * e;
            let t = s.abs().min(cap);
            s - t + 2.0 * t * rng.uniform()
        })
        .collect();
    DataSet::from_flat(1, strain, stress, "linear")
}

pub fn gen_cuberoot_noisy(n_d: usize, range: [f64; 2], theta0: f64, seed: u64) -> Result<DataSet> {
    let mut rng = Stream::new(seed);
    let strain = spaced(n_d, range)?;
    let stress = strain
        .iter()
        .map(|&e| {
            let s = e.cbrt();
            let t = theta0.min(s.abs());
            s - t + 2.0 * t * rng.uniform()
        })
        .collect();
    DataSet::from_flat(1, strain, stress, "cuberoot")
}

pub fn gen_regularized(per_line: usize, range: [f64; 2], moduli: &[f64]) -> Result<DataSet> {
    if moduli.is_empty() {
        return Err(Error::EmptyInput("moduli"));
    }
    let grid = spaced(per_line, range)?;
    let mut strain = Vec::new();
    let mut stress = Vec::new();
    let mut origin = false;
    for &m in moduli {
        for &e in &grid {
            if e == 0.0 {
                if origin {
                    continue;
                }
                origin = true;
            }
            strain.push(e);
            stress.push(m * e);
        }
    }
    DataSet::from_flat(1, strain, stress, "regularized")
}

/// Grid order: component 1 varies slowest, component 6 fastest.
pub fn gen_gauss6d(
    per_axis: usize,
    range: [f64; 2],
    noise_std: f64,
    modulus: f64,
    poisson: f64,
    seed: u64,
) -> Result<DataSet> {
    let axis = spaced(per_axis, range)?;
    if !(noise_std >= 0.0) {
        return Err(Error::Config(format!("noise {noise_std}")));
    }
    let c = isotropic_elastic(modulus, poisson)?;
    let n = per_axis.pow(6);
    let mut rng = Stream::new(seed);
    let mut strain = Vec::with_capacity(6 * n);
    let mut stress = Vec::with_capacity(6 * n);
    let mut idx = [0usize; 6];
    for _ in 0..n {
        let e: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
        let s = mat_vec(&c, &e);
        strain.extend(e.iter().map(|v| v + noise_std * rng.standard_normal()));
        stress.extend(s.iter().map(|v| v + noise_std * rng.standard_normal()));
        for k in (0..6).rev() {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
        }
    }
    DataSet::from_flat(6, strain, stress, "gauss6d")
}

/// Scales the stress of `k` distinct random points by `factor`.
pub fn inject_outliers(ds: &DataSet, k: usize, factor: f64, seed: u64) -> Result<DataSet> {
    let n = ds.len();
    if k > n {
        return Err(Error::Config(format!("{k} outliers requested from {n} points")));
    }
    let mut out = ds.clone();
    let mut rng = Stream::new(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.below(n - i);
        order.swap(i, j);
        out.scale_stress(order[i], factor);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_noise_vanishes_at_origin() {
        let ds = gen_linear_noisy(201, [-1.0, 1.0], 1.0, 0.1, 3).unwrap();
        assert_eq!(ds.strain(100), &[0.0]);
        assert_eq!(ds.stress(100), &[0.0]);
    }

    #[test]
    fn linear_noise_band() {
        let ds = gen_linear_noisy(401, [-1.0, 1.0], 1.0, 0.1, 11).unwrap();
        for i in 0..ds.len() {
            let (e, s) = (ds.strain(i)[0], ds.stress(i)[0]);
            assert!((s - e).abs() <= e.abs().min(0.1) + 1e-15);
        }
        // e = 0.05 lands in [0, 0.1], e = 0.5 in [0.4, 0.6]
        let i = (0..ds.len()).find(|&i| (ds.strain(i)[0] - 0.05).abs() < 1e-12).unwrap();
        assert!((0.0..=0.1).contains(&ds.stress(i)[0]));
        let i = (0..ds.len()).find(|&i| (ds.strain(i)[0] - 0.5).abs() < 1e-12).unwrap();
        assert!((0.4..=0.6).contains(&ds.stress(i)[0]));
    }

    #[test]
    fn cuberoot_band_and_noise_free_path() {
        let ds = gen_cuberoot_noisy(121, [-1.5, 1.5], 0.04, 7).unwrap();
        for i in 0..ds.len() {
            let (e, s) = (ds.strain(i)[0], ds.stress(i)[0]);
            assert!((s - e.cbrt()).abs() <= 0.04f64.min(e.cbrt().abs()) + 1e-15);
        }
        let i = (0..ds.len()).find(|&i| (ds.strain(i)[0] - 1.0).abs() < 1e-12).unwrap();
        assert!((0.96..=1.04).contains(&ds.stress(i)[0]));
        let exact = gen_cuberoot_noisy(41, [-1.5, 1.5], 0.0, 7).unwrap();
        for i in 0..exact.len() {
            assert_eq!(exact.stress(i)[0], exact.strain(i)[0].cbrt());
        }
    }

    #[test]
    fn regularized_keeps_one_origin() {
        let ds = gen_regularized(201, [-1.0, 1.0], &[0.8, 1.2]).unwrap();
        assert_eq!(ds.len(), 401);
        assert_eq!((0..ds.len()).filter(|&i| ds.strain(i)[0] == 0.0).count(), 1);
    }

    #[test]
    fn gauss6d_counts_and_noise_free_manifold() {
        let ds = gen_gauss6d(3, [-0.1, 0.1], 0.0, 1.0, 0.3, 1).unwrap();
        assert_eq!(ds.len(), 729);
        let c = isotropic_elastic(1.0, 0.3).unwrap();
        for i in 0..ds.len() {
            let s = mat_vec(&c, ds.strain(i));
            for k in 0..6 {
                assert!((s[k] - ds.stress(i)[k]).abs() < 1e-12);
            }
        }
        let spec = GenSpec::Gauss6d {
            per_axis: 5,
            range: [-0.1, 0.1],
            noise: 0.005,
            noise_is_std: false,
            modulus: 1.0,
            poisson: 0.3,
            seed: 1,
        };
        assert_eq!(spec.generate().unwrap().len(), 15625);
    }

    #[test]
    fn gaussian_moments() {
        let mut s = Stream::new(5);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01 && (var - 1.0).abs() < 0.02);
    }

    #[test]
    fn outliers_touch_exactly_k_rows() {
        // strictly positive strains, so every stress is nonzero
        let ds = gen_cuberoot_noisy(121, [0.05, 1.5], 0.04, 9).unwrap();
        let out = inject_outliers(&ds, 32, 1.2, 4).unwrap();
        let changed: Vec<usize> = (0..ds.len()).filter(|&i| ds.stress(i) != out.stress(i)).collect();
        assert_eq!(changed.len(), 32);
        for &i in &changed {
            assert!((out.stress(i)[0] - 1.2 * ds.stress(i)[0]).abs() < 1e-15);
            assert_eq!(out.strain(i), ds.strain(i));
        }
        assert_eq!(inject_outliers(&ds, 0, 1.2, 4).unwrap(), ds);
        assert_eq!(inject_outliers(&ds, 50, 1.0, 4).unwrap().stress(3), ds.stress(3));
        assert!(inject_outliers(&ds, 122, 1.2, 4).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, &[0, 0]);
        assert_ne!(a, derive_seed(7, &[0, 1]));
        assert_ne!(a, derive_seed(7, &[1, 0]));
        assert_eq!(a, derive_seed(7, &[0, 0]));
    }

    proptest! {
        #[test]
        fn same_seed_same_bits(seed in any::<u64>(), n in 2usize..200) {
            let a = gen_linear_noisy(n, [-1.0, 1.0], 1.0, 0.1, seed).unwrap();
            let b = gen_linear_noisy(n, [-1.0, 1.0], 1.0, 0.1, seed).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
