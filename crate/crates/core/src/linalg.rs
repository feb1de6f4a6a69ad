//! Symmetric positive definite systems in skyline (profile) storage.

use crate::{Error, Result};

/// Upper triangle stored column by column from the first structurally
/// nonzero row down to the diagonal.
#[derive(Debug, Clone)]
pub struct SkylineMatrix {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl SkylineMatrix {
    /// `first[j]` is the smallest row index that may be nonzero in column
    /// `j`; it must not exceed `j`.
    pub fn with_profile(first: Vec<usize>) -> Self {
        let n = first.len();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for (j, &f) in first.iter().enumerate() {
            debug_assert!(f <= j);
            start.push(start[j] + (j - f + 1));
        }
        let len = start[n];
        Self {
            n,
            first,
            start,
            vals: vec![0.0; len],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        (i >= self.first[j]).then(|| self.start[j] + (i - self.first[j]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.vals[k])
    }

    /// Adds `v` to entry `(i, j)` (and by symmetry `(j, i)`).
    ///
    /// # Panics
    /// If the entry lies outside the profile.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry outside skyline profile");
        self.vals[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            for i in self.first[j]..=j {
                let a = self.vals[self.start[j] + i - self.first[j]];
                y[i] += a * x[j];
                if i != j {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place `A = U'U`.
    pub fn cholesky(mut self) -> Result<Cholesky> {
        let n = self.n;
        for j in 0..n {
            let fj = self.first[j];
            for i in fj..=j {
                let fi = self.first[i];
                let lo = fi.max(fj);
                let mut s = self.vals[self.start[j] + i - fj];
                let ci = self.start[i] - fi;
                let cj = self.start[j] - fj;
                for k in lo..i {
                    s -= self.vals[ci + k] * self.vals[cj + k];
                }
                if i < j {
                    let d = self.vals[self.start[i] + i - fi];
                    self.vals[cj + i] = s / d;
                } else {
                    let orig = self.diag_scale(j);
                    if !(s > 1e-12 * orig) {
                        return Err(Error::Singular { pivot: j });
                    }
                    self.vals[cj + j] = s.sqrt();
                }
            }
        }
        Ok(Cholesky { u: self })
    }

    // Largest squared entry of the factored column so far plus the current
    // diagonal; a cheap scale for the pivot test.
    fn diag_scale(&self, j: usize) -> f64 {
        let c = self.start[j] - self.first[j];
        let mut s = self.vals[c + j].abs();
        for k in self.first[j]..j {
            s += self.vals[c + k] * self.vals[c + k];
        }
        s.max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone)]
pub struct Cholesky {
    u: SkylineMatrix,
}

impl Cholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let u = &self.u;
        let n = u.n;
        let mut y = b.to_vec();
        // U' y = b
        for j in 0..n {
            let c = u.start[j] - u.first[j];
            let mut s = y[j];
            for k in u.first[j]..j {
                s -= u.vals[c + k] * y[k];
            }
            y[j] = s / u.vals[c + j];
        }
        // U x = y
        for j in (0..n).rev() {
            let c = u.start[j] - u.first[j];
            let xj = y[j] / u.vals[c + j];
            y[j] = xj;
            for k in u.first[j]..j {
                y[k] -= u.vals[c + k] * xj;
            }
        }
        y
    }
}
