//! Minimal dense linear algebra for the small systems appearing in the
//! harmonic-polynomial algebra (dimensions stay below ~100).

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DMat { rows, cols, data: vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let mut acc = 0.0;
            for c in 0..self.cols {
                acc += self.get(r, c) * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// self^T * self, the Gram matrix of the columns.
    pub fn gram(&self) -> DMat {
        let mut g = DMat::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = 0.0;
                for r in 0..self.rows {
                    acc += self.get(r, i) * self.get(r, j);
                }
                g.set(i, j, acc);
                g.set(j, i, acc);
            }
        }
        g
    }
}

/// Kernel basis of a rectangular matrix by Gaussian elimination with
/// partial pivoting. `tol` is relative to the largest entry.
pub fn nullspace(mat: &DMat, tol: f64) -> Vec<Vec<f64>> {
    let (m, n) = (mat.rows, mat.cols);
    let mut a = mat.data.clone();
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let eps = tol * scale;
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        // find pivot
        let mut best = row;
        for r in row..m {
            if a[r * n + col].abs() > a[best * n + col].abs() {
                best = r;
            }
        }
        if row >= m || a[best * n + col].abs() <= eps {
            continue;
        }
        if best != row {
            for c in 0..n {
                a.swap(row * n + c, best * n + c);
            }
        }
        let p = a[row * n + col];
        for c in 0..n {
            a[row * n + c] /= p;
        }
        for r in 0..m {
            if r != row {
                let f = a[r * n + col];
                if f != 0.0 {
                    for c in 0..n {
                        a[r * n + c] -= f * a[row * n + c];
                    }
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    let mut kernel = Vec::new();
    let mut is_pivot = vec![false; n];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    for free in 0..n {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![0.0; n];
        v[free] = 1.0;
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a[r * n + free];
        }
        kernel.push(v);
    }
    kernel
}

/// Symmetric eigendecomposition by cyclic Jacobi. Returns eigenvalues in
/// descending order and eigenvectors as columns of the returned matrix.
pub fn jacobi_eigh(s: &DMat) -> (Vec<f64>, DMat) {
    debug_assert_eq!(s.rows, s.cols);
    let n = s.rows;
    let mut a = s.clone();
    let mut q = DMat::zeros(n, n);
    for d in 0..n {
        q.set(d, d, 1.0);
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for r in (p + 1)..n {
                off += a.get(p, r) * a.get(p, r);
            }
        }
        if off <= 1e-28 * (n as f64) {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                if a.get(p, r).abs() <= 1e-20 {
                    continue;
                }
                let theta = 0.5 * math::atan2(2.0 * a.get(p, r), a.get(r, r) - a.get(p, p));
                let (c, sn) = (math::cos(theta), math::sin(theta));
                for k in 0..n {
                    let (akp, akr) = (a.get(k, p), a.get(k, r));
                    a.set(k, p, c * akp - sn * akr);
                    a.set(k, r, sn * akp + c * akr);
                }
                for k in 0..n {
                    let (apk, ark) = (a.get(p, k), a.get(r, k));
                    a.set(p, k, c * apk - sn * ark);
                    a.set(r, k, sn * apk + c * ark);
                }
                for k in 0..n {
                    let (qkp, qkr) = (q.get(k, p), q.get(k, r));
                    q.set(k, p, c * qkp - sn * qkr);
                    q.set(k, r, sn * qkp + c * qkr);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let mut vals = Vec::with_capacity(n);
    let mut vecs = DMat::zeros(n, n);
    for (slot, &idx) in order.iter().enumerate() {
        vals.push(a.get(idx, idx));
        for k in 0..n {
            vecs.set(k, slot, q.get(k, idx));
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_row() {
        // kernel of [1 1 1] is 2-dimensional
        let mut m = DMat::zeros(1, 3);
        for c in 0..3 {
            m.set(0, c, 1.0);
        }
        let k = nullspace(&m, 1e-12);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s: f64 = v.iter().sum();
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_recovers_spectrum() {
        let mut s = DMat::zeros(4, 4);
        let diag = [5.0, 3.0, 1.0, -2.0];
        for (i, d) in diag.iter().enumerate() {
            s.set(i, i, *d);
        }
        s.set(0, 1, 0.5);
        s.set(1, 0, 0.5);
        s.set(2, 3, 0.25);
        s.set(3, 2, 0.25);
        let (vals, vecs) = jacobi_eigh(&s);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        // residual check
        for slot in 0..4 {
            let v: Vec<f64> = (0..4).map(|k| vecs.get(k, slot)).collect();
            let sv = s.apply(&v);
            for k in 0..4 {
                assert!((sv[k] - vals[slot] * v[k]).abs() < 1e-12);
            }
        }
    }
}
