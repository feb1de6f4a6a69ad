//! Sparse LU factorization of a simplex basis (left-looking, threshold
//! partial pivoting with a row-count tie break) and product-form updates.

/// Relative pivot threshold: a candidate must be at least this fraction of
/// the largest entry in its column.
const PIVOT_THRESHOLD: f64 = 0.1;
/// Columns whose largest remaining entry falls below this (relative to the
/// original column) make the basis singular.
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SingularBasis {
    pub position: usize,
}

pub(crate) struct LuFactor {
    m: usize,
    /// Row chosen at elimination step k.
    prow: Vec<usize>,
    /// Basis position eliminated at step k.
    pcol: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    /// Off-diagonal U entries of step k, indexed by earlier step.
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
}

impl LuFactor {
    /// Factorizes the `m x m` matrix whose column `p` is `cols[p]` (sparse
    /// `(row, value)` pairs).
    pub fn new(m: usize, cols: &[Vec<(usize, f64)>]) -> Result<Self, SingularBasis> {
        let mut row_count = vec![0usize; m];
        for c in cols {
            for &(r, _) in c {
                row_count[r] += 1;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| cols[p].len());

        let mut f = LuFactor {
            m,
            prow: Vec::with_capacity(m),
            pcol: Vec::with_capacity(m),
            l_start: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_start: vec![0],
            u_idx: Vec::new(),
            u_val: Vec::new(),
            u_diag: Vec::with_capacity(m),
        };
        // step at which a row was pivoted, usize::MAX if not yet
        let mut step_of_row = vec![usize::MAX; m];
        let mut x = vec![0.0; m];
        let mut mark = vec![false; m];
        let mut nz: Vec<usize> = Vec::new();

        for (k, &p) in order.iter().enumerate() {
            let mut col_max: f64 = 0.0;
            for &(r, v) in &cols[p] {
                x[r] += v;
                col_max = col_max.max(v.abs());
                if !mark[r] {
                    mark[r] = true;
                    nz.push(r);
                }
            }
            // forward elimination with the partial L, in step order
            for j in 0..k {
                let v = x[f.prow[j]];
                if v == 0.0 {
                    continue;
                }
                for t in f.l_start[j]..f.l_start[j + 1] {
                    let i = f.l_idx[t];
                    if !mark[i] {
                        mark[i] = true;
                        nz.push(i);
                    }
                    x[i] -= f.l_val[t] * v;
                }
            }
            let mut best_abs: f64 = 0.0;
            for &i in &nz {
                if step_of_row[i] == usize::MAX {
                    best_abs = best_abs.max(x[i].abs());
                }
            }
            if best_abs <= SINGULAR_TOL * col_max.max(1e-300) || best_abs == 0.0 {
                return Err(SingularBasis { position: p });
            }
            let mut pivot_row = usize::MAX;
            for &i in &nz {
                if step_of_row[i] == usize::MAX
                    && x[i].abs() >= PIVOT_THRESHOLD * best_abs
                    && (pivot_row == usize::MAX
                        || row_count[i] < row_count[pivot_row]
                        || (row_count[i] == row_count[pivot_row]
                            && x[i].abs() > x[pivot_row].abs()))
                {
                    pivot_row = i;
                }
            }
            let piv = x[pivot_row];
            for &i in &nz {
                let v = x[i];
                if v == 0.0 || i == pivot_row {
                    continue;
                }
                let s = step_of_row[i];
                if s == usize::MAX {
                    f.l_idx.push(i);
                    f.l_val.push(v / piv);
                } else {
                    f.u_idx.push(s);
                    f.u_val.push(v);
                }
            }
            f.l_start.push(f.l_idx.len());
            f.u_start.push(f.u_idx.len());
            f.u_diag.push(piv);
            f.prow.push(pivot_row);
            f.pcol.push(p);
            step_of_row[pivot_row] = k;
            for &i in &nz {
                x[i] = 0.0;
                mark[i] = false;
            }
            nz.clear();
        }
        Ok(f)
    }

    /// Solves `B z = a` in place: `a` is indexed by row on input and by
    /// basis position on output.
    pub fn solve(&self, a: &mut [f64], work: &mut [f64]) {
        let m = self.m;
        // L forward; work[k] gets the value of step k
        for k in 0..m {
            let v = a[self.prow[k]];
            work[k] = v;
            if v != 0.0 {
                for t in self.l_start[k]..self.l_start[k + 1] {
                    a[self.l_idx[t]] -= self.l_val[t] * v;
                }
            }
        }
        // U backward
        for k in (0..m).rev() {
            let v = work[k] / self.u_diag[k];
            work[k] = v;
            if v != 0.0 {
                for t in self.u_start[k]..self.u_start[k + 1] {
                    work[self.u_idx[t]] -= self.u_val[t] * v;
                }
            }
        }
        for k in 0..m {
            a[self.pcol[k]] = work[k];
        }
    }

    /// Solves `B' y = c` in place: `c` is indexed by basis position on input
    /// and by row on output.
    pub fn solve_transpose(&self, c: &mut [f64], work: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let mut v = c[self.pcol[k]];
            for t in self.u_start[k]..self.u_start[k + 1] {
                v -= self.u_val[t] * work[self.u_idx[t]];
            }
            work[k] = v / self.u_diag[k];
        }
        for k in (0..m).rev() {
            let mut v = work[k];
            for t in self.l_start[k]..self.l_start[k + 1] {
                v -= self.l_val[t] * c[self.l_idx[t]];
            }
            c[self.prow[k]] = v;
        }
    }
}

/// One product-form update: basis position `pos` replaced by a column whose
/// representation in the previous basis is `alpha`.
pub(crate) struct Eta {
    pub pos: usize,
    pub pivot: f64,
    pub entries: Vec<(usize, f64)>,
}

impl Eta {
    pub fn new(pos: usize, alpha: &[f64]) -> Self {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i != pos && v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        Eta {
            pos,
            pivot: alpha[pos],
            entries,
        }
    }

    /// `z <- E^{-1} z`
    pub fn apply(&self, z: &mut [f64]) {
        let zp = z[self.pos] / self.pivot;
        z[self.pos] = zp;
        if zp != 0.0 {
            for &(i, v) in &self.entries {
                z[i] -= v * zp;
            }
        }
    }

    /// `z <- E^{-T} z`
    pub fn apply_transpose(&self, z: &mut [f64]) {
        let mut v = z[self.pos];
        for &(i, a) in &self.entries {
            v -= a * z[i];
        }
        z[self.pos] = v / self.pivot;
    }
}
