use serde::{Deserialize, Serialize};

use super::LpError;

/// Compressed sparse column matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl CscMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; ncols + 1];
        for &(_, c, _) in triplets {
            counts[c + 1] += 1;
        }
        for c in 0..ncols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let k = next[c];
            rows[k] = r;
            vals[k] = v;
            next[c] += 1;
        }
        let mut col_ptr = Vec::with_capacity(ncols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut out_vals = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for c in 0..ncols {
            entries.clear();
            entries.extend((counts[c]..counts[c + 1]).map(|k| (rows[k], vals[k])));
            entries.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < entries.len() {
                let r = entries[k].0;
                let mut v = 0.0;
                while k < entries.len() && entries[k].0 == r {
                    v += entries[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    row_idx.push(r);
                    out_vals.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            vals: out_vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[a..b], &self.vals[a..b])
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate().take(self.ncols) {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                y[r] += v * xj;
            }
        }
        y
    }

    pub fn row_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.nrows];
        for &r in &self.row_idx {
            c[r] += 1;
        }
        c
    }
}

/// `min c'x  s.t.  A x = b,  lo <= x <= hi`. Bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub(crate) c: Vec<f64>,
    pub(crate) a: CscMatrix,
    pub(crate) b: Vec<f64>,
    pub(crate) lo: Vec<f64>,
    pub(crate) hi: Vec<f64>,
}

impl LpProblem {
    pub fn new(
        c: Vec<f64>,
        a: CscMatrix,
        b: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Result<Self, LpError> {
        let n = c.len();
        if a.ncols() != n || lo.len() != n || hi.len() != n {
            return Err(LpError::Construction(format!(
                "{n} costs but A has {} columns and bounds have {}/{} entries",
                a.ncols(),
                lo.len(),
                hi.len()
            )));
        }
        if a.nrows() != b.len() {
            return Err(LpError::Construction(format!(
                "A has {} rows but b has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if l.is_nan() || h.is_nan() || l > h || *l == f64::INFINITY || *h == f64::NEG_INFINITY {
                return Err(LpError::Construction(format!(
                    "invalid bounds [{l}, {h}] on variable {i}"
                )));
            }
        }
        if c.iter().chain(&b).chain(&a.vals).any(|v| !v.is_finite()) {
            return Err(LpError::Construction("non-finite coefficient".into()));
        }
        if let Some(r) = a.row_counts().iter().position(|&k| k == 0) {
            return Err(LpError::Construction(format!("row {r} of A is empty")));
        }
        Ok(Self { c, a, b, lo, hi })
    }

    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn cost(&self) -> &[f64] {
        &self.c
    }

    pub fn matrix(&self) -> &CscMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn lower(&self) -> &[f64] {
        &self.lo
    }

    pub fn upper(&self) -> &[f64] {
        &self.hi
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// `max_i |(A x - b)_i|`
    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        self.a
            .mul_vec(x)
            .iter()
            .zip(&self.b)
            .map(|(ax, b)| (ax - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest bound violation of `x`.
    pub fn bound_violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&l, &h))| (l - v).max(v - h).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Incremental construction of an [`LpProblem`].
#[derive(Debug, Clone)]
pub struct LpBuilder {
    c: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    triplets: Vec<(usize, usize, f64)>,
    b: Vec<f64>,
}

impl LpBuilder {
    /// All variables start free with zero cost.
    pub fn new(n_vars: usize) -> Self {
        Self {
            c: vec![0.0; n_vars],
            lo: vec![f64::NEG_INFINITY; n_vars],
            hi: vec![f64::INFINITY; n_vars],
            triplets: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn cost(&mut self, j: usize, v: f64) -> &mut Self {
        self.c[j] = v;
        self
    }

    pub fn bounds(&mut self, j: usize, lo: f64, hi: f64) -> &mut Self {
        self.lo[j] = lo;
        self.hi[j] = hi;
        self
    }

    /// Appends the equality `sum coef_j x_j = rhs` and returns its row index.
    pub fn row<I: IntoIterator<Item = (usize, f64)>>(&mut self, coefs: I, rhs: f64) -> usize {
        let r = self.b.len();
        self.triplets
            .extend(coefs.into_iter().map(|(j, v)| (r, j, v)));
        self.b.push(rhs);
        r
    }

    /// Adds to an existing row.
    pub fn add_to_row(&mut self, r: usize, j: usize, v: f64) {
        self.triplets.push((r, j, v));
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn build(self) -> Result<LpProblem, LpError> {
        if let Some(&(_, j, _)) = self.triplets.iter().find(|t| t.1 >= self.c.len()) {
            return Err(LpError::Construction(format!(
                "coefficient references variable {j} of {}",
                self.c.len()
            )));
        }
        let a = CscMatrix::from_triplets(self.b.len(), self.c.len(), &self.triplets);
        LpProblem::new(self.c, a, self.b, self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A simplex basis, reusable as a warm start for a problem of the same shape.
///
/// Entries of `basic` at or above `n_vars` denote the artificial column of
/// row `entry - n_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub n_vars: usize,
    pub n_rows: usize,
    pub basic: Vec<usize>,
    pub at_upper: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values, present iff `status == Optimal`.
    pub x: Option<Vec<f64>>,
    /// Objective value, present iff `status == Optimal`.
    pub objective: Option<f64>,
    pub iterations: usize,
    pub basis: Option<Basis>,
    pub warm_started: bool,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
