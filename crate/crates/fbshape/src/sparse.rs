//! Compressed sparse row matrices and a Jacobi-preconditioned conjugate
//! gradient solver for the symmetric positive-definite FEM systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct Triplets<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> Triplets<T> {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        self.entries.push((i, j, v));
    }

    pub fn to_csr(&self) -> Csr<T> {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in &self.entries {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; self.entries.len()];
        let mut vals = vec![T::zero(); self.entries.len()];
        let mut next = counts.clone();
        for &(i, j, v) in &self.entries {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }
        // sort each row and merge duplicates
        let mut indptr = vec![0usize; n + 1];
        let mut out_cols = Vec::with_capacity(cols.len());
        let mut out_vals = Vec::with_capacity(vals.len());
        for i in 0..n {
            let lo = counts[i];
            let hi = counts[i + 1];
            let mut row: Vec<(usize, T)> =
                (lo..hi).map(|p| (cols[p], vals[p])).collect();
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    let k = out_vals.len() - 1;
                    out_vals[k] += v;
                } else {
                    out_cols.push(c);
                    out_vals.push(v);
                    last = Some(c);
                }
            }
            indptr[i + 1] = out_cols.len();
        }
        Csr { n, indptr, indices: out_cols, data: out_vals }
    }
}

#[derive(Debug, Clone)]
pub struct Csr<T> {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Real> Csr<T> {
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        for i in 0..self.n {
            let mut s = T::zero();
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[p] * x[self.indices[p]];
            }
            y[i] = s;
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for i in 0..self.n {
            for p in self.indptr[i]..self.indptr[i + 1] {
                if self.indices[p] == i {
                    d[i] = self.data[p];
                }
            }
        }
        d
    }

    /// x^T A x
    pub fn quadratic_form(&self, x: &[T]) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            let mut row = T::zero();
            for p in self.indptr[i]..self.indptr[i + 1] {
                row += self.data[p] * x[self.indices[p]];
            }
            s += x[i] * row;
        }
        s
    }
}

fn dotv<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Jacobi-preconditioned CG. Converges to ‖r‖ ≤ tol_rel·‖b‖.
pub fn solve_cg<T: Real>(
    a: &Csr<T>,
    b: &[T],
    x0: Option<&[T]>,
    tol_rel: T,
    max_iter: usize,
) -> Result<Vec<T>> {
    let n = a.n;
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![T::zero(); n]);
    let norm_b = dotv(b, b).sqrt();
    if norm_b == T::zero() {
        return Ok(vec![T::zero(); n]);
    }
    let tol = tol_rel * norm_b;
    let diag = a.diagonal();
    let mut inv_diag = vec![T::zero(); n];
    for i in 0..n {
        if diag[i] <= T::zero() {
            return Err(Error::SolverFailure("non-positive diagonal in SPD solve".into()));
        }
        inv_diag[i] = T::one() / diag[i];
    }
    let mut r = b.to_vec();
    let ax = a.apply(&x);
    for i in 0..n {
        r[i] -= ax[i];
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dotv(&r, &z);
    let mut ap = vec![T::zero(); n];
    for _ in 0..max_iter {
        if dotv(&r, &r).sqrt() <= tol {
            return Ok(x);
        }
        a.matvec(&p, &mut ap);
        let alpha = rz / dotv(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dotv(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if dotv(&r, &r).sqrt() <= tol {
        Ok(x)
    } else {
        Err(Error::SolverFailure(format!(
            "CG did not reach tolerance in {max_iter} iterations"
        )))
    }
}
