//! Points, small symmetric matrices and affine subspaces in dimensions 2/3.
//!
//! Points are always stored as `[f64; 3]`; 2-dimensional data keeps the last
//! component at zero and every routine takes the ambient dimension
//! explicitly.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

pub type Point = [f64; 3];

pub const ORIGIN: Point = [0.0, 0.0, 0.0];

pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Point) -> f64 {
    math::sqrt(dot(a, a))
}

pub fn dist(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

pub fn axis(d: usize) -> Point {
    let mut e = ORIGIN;
    e[d] = 1.0;
    e
}

pub fn normalized(a: &Point) -> Result<Point> {
    let n = norm(a);
    if n <= 0.0 {
        return Err(Error::NonUnitVector(n));
    }
    Ok(scale(a, 1.0 / n))
}

/// Symmetric matrix on the first `dim` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat {
    pub dim: usize,
    pub m: [[f64; 3]; 3],
}

impl SymMat {
    pub fn identity(dim: usize) -> Self {
        let mut m = [[0.0; 3]; 3];
        for d in 0..3 {
            m[d][d] = 1.0;
        }
        SymMat { dim, m }
    }

    pub fn zeros(dim: usize) -> Self {
        SymMat { dim, m: [[0.0; 3]; 3] }
    }

    pub fn diagonal(dim: usize, d: &Point) -> Self {
        let mut s = Self::zeros(dim);
        for i in 0..dim {
            s.m[i][i] = d[i];
        }
        // keep the unused trailing block at the identity so `apply` is a
        // no-op there
        for i in dim..3 {
            s.m[i][i] = 1.0;
        }
        s
    }

    pub fn from_rows(dim: usize, rows: &[[f64; 3]]) -> Result<Self> {
        let mut s = Self::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                s.m[i][j] = rows[i][j];
            }
        }
        s.check_symmetric(1e-14)?;
        Ok(s)
    }

    pub fn apply(&self, v: &Point) -> Point {
        let mut out = ORIGIN;
        for i in 0..3 {
            for j in 0..3 {
                out[i] += self.m[i][j] * v[j];
            }
        }
        out
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.m[i][j] - self.m[j][i]).abs());
            }
        }
        worst
    }

    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        let a = self.asymmetry();
        if a > tol {
            return Err(Error::NotSymmetric(a));
        }
        Ok(())
    }

    pub fn max_offdiag(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    worst = worst.max(self.m[i][j].abs());
                }
            }
        }
        worst
    }

    /// Eigendecomposition by cyclic Jacobi rotations; returns eigenvalues in
    /// descending order with matching orthonormal eigenvector columns.
    pub fn eigh(&self) -> (Point, [[f64; 3]; 3]) {
        let n = self.dim;
        let mut a = self.m;
        let mut q = [[0.0; 3]; 3];
        for d in 0..3 {
            q[d][d] = 1.0;
        }
        for _sweep in 0..64 {
            let mut off = 0.0;
            for p in 0..n {
                for r in (p + 1)..n {
                    off += a[p][r] * a[p][r];
                }
            }
            if off <= 1e-30 {
                break;
            }
            for p in 0..n {
                for r in (p + 1)..n {
                    if a[p][r].abs() <= 1e-18 {
                        continue;
                    }
                    let theta = 0.5 * math::atan2(2.0 * a[p][r], a[r][r] - a[p][p]);
                    let (c, s) = (math::cos(theta), math::sin(theta));
                    for k in 0..n {
                        let (akp, akr) = (a[k][p], a[k][r]);
                        a[k][p] = c * akp - s * akr;
                        a[k][r] = s * akp + c * akr;
                    }
                    for k in 0..n {
                        let (apk, ark) = (a[p][k], a[r][k]);
                        a[p][k] = c * apk - s * ark;
                        a[r][k] = s * apk + c * ark;
                    }
                    for k in 0..3 {
                        let (qkp, qkr) = (q[k][p], q[k][r]);
                        q[k][p] = c * qkp - s * qkr;
                        q[k][r] = s * qkp + c * qkr;
                    }
                }
            }
        }
        let mut order = [0usize, 1, 2];
        let vals = [a[0][0], a[1][1], a[2][2]];
        order[..n].sort_unstable_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap());
        let mut evals = [0.0; 3];
        let mut evecs = [[0.0; 3]; 3];
        for (slot, &idx) in order[..n].iter().enumerate() {
            evals[slot] = vals[idx];
            for k in 0..3 {
                evecs[k][slot] = q[k][idx];
            }
        }
        // unused trailing slots stay harmless
        for slot in n..3 {
            evals[slot] = 1.0;
            evecs[slot][slot] = 1.0;
        }
        (evals, evecs)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = self.eigh();
        vals[..self.dim].iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        let (vals, _) = self.eigh();
        vals[..self.dim].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Operator-norm distance to another symmetric matrix.
    pub fn op_dist(&self, other: &SymMat) -> f64 {
        let mut d = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                d.m[i][j] = self.m[i][j] - other.m[i][j];
            }
        }
        let (vals, _) = d.eigh();
        vals[..self.dim].iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Symmetric positive-definite square root via eigendecomposition; this is
/// the normalizing transform applied to leading coefficients at a point.
pub fn matrix_sqrt(a: &SymMat) -> Result<SymMat> {
    a.check_symmetric(1e-14)?;
    let (vals, vecs) = a.eigh();
    let min = vals[..a.dim].iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite(min));
    }
    let mut s = SymMat::identity(a.dim);
    for i in 0..a.dim {
        for j in 0..a.dim {
            let mut acc = 0.0;
            for k in 0..a.dim {
                acc += vecs[i][k] * math::sqrt(vals[k]) * vecs[j][k];
            }
            s.m[i][j] = acc;
        }
    }
    Ok(s)
}

/// A linear subspace of R^dim given by an orthonormal basis, optionally
/// anchored at a base point (affine use).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    pub dim: usize,
    pub base: Point,
    pub basis: Vec<Point>,
}

impl Subspace {
    pub fn trivial(dim: usize) -> Self {
        Subspace { dim, base: ORIGIN, basis: Vec::new() }
    }

    pub fn span(dim: usize, vectors: &[Point]) -> Self {
        let mut basis: Vec<Point> = Vec::new();
        for v in vectors {
            let mut w = *v;
            for b in &basis {
                let c = dot(&w, b);
                w = sub(&w, &scale(b, c));
            }
            // second Gram-Schmidt pass for orthogonality at machine level
            for b in &basis {
                let c = dot(&w, b);
                w = sub(&w, &scale(b, c));
            }
            let n = norm(&w);
            if n > 1e-12 {
                basis.push(scale(&w, 1.0 / n));
            }
        }
        Subspace { dim, base: ORIGIN, basis }
    }

    pub fn anchored(mut self, base: Point) -> Self {
        self.base = base;
        self
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    /// Projection of `x - base` onto the subspace directions.
    pub fn project(&self, x: &Point) -> Point {
        let v = sub(x, &self.base);
        let mut out = ORIGIN;
        for b in &self.basis {
            out = add(&out, &scale(b, dot(&v, b)));
        }
        out
    }

    /// Component of `x - base` orthogonal to the subspace.
    pub fn reject(&self, x: &Point) -> Point {
        let v = sub(x, &self.base);
        sub(&v, &self.project(x))
    }

    /// Distance from `x` to the affine plane `base + span(basis)`.
    pub fn distance(&self, x: &Point) -> f64 {
        norm(&self.reject(x))
    }

    /// An orthonormal basis of the orthogonal complement within R^dim.
    pub fn complement(&self) -> Subspace {
        let mut vecs: Vec<Point> = Vec::new();
        for d in 0..self.dim {
            let mut w = axis(d);
            for b in &self.basis {
                w = sub(&w, &scale(b, dot(&w, b)));
            }
            for b in &vecs {
                w = sub(&w, &scale(b, dot(&w, b)));
            }
            let n = norm(&w);
            if n > 1e-9 {
                vecs.push(scale(&w, 1.0 / n));
            }
        }
        vecs.truncate(self.dim - self.k());
        Subspace { dim: self.dim, base: self.base, basis: vecs }
    }
}

/// Top-k principal directions of a point cloud (second moments about the
/// centroid), used to fit approximating planes.
pub fn principal_directions(dim: usize, pts: &[Point], k: usize) -> Result<Subspace> {
    if pts.is_empty() {
        return Err(Error::EmptyInput("principal_directions".into()));
    }
    let nf = pts.len() as f64;
    let mut centroid = ORIGIN;
    for p in pts {
        centroid = add(&centroid, p);
    }
    centroid = scale(&centroid, 1.0 / nf);
    let mut cov = SymMat::zeros(dim);
    for p in pts {
        let v = sub(p, &centroid);
        for i in 0..dim {
            for j in 0..dim {
                cov.m[i][j] += v[i] * v[j] / nf;
            }
        }
    }
    let (_, vecs) = cov.eigh();
    let mut basis = Vec::new();
    for slot in 0..k.min(dim) {
        let mut v = ORIGIN;
        for r in 0..dim {
            v[r] = vecs[r][slot];
        }
        basis.push(v);
    }
    Ok(Subspace { dim, base: centroid, basis })
}

/// Singular values (descending) of the centered point matrix, scaled by
/// 1/sqrt(count); these are the square roots of the covariance eigenvalues.
pub fn centered_singular_values(dim: usize, pts: &[Point]) -> Vec<f64> {
    if pts.is_empty() {
        return Vec::new();
    }
    let nf = pts.len() as f64;
    let mut centroid = ORIGIN;
    for p in pts {
        centroid = add(&centroid, p);
    }
    centroid = scale(&centroid, 1.0 / nf);
    let mut cov = SymMat::zeros(dim);
    for p in pts {
        let v = sub(p, &centroid);
        for i in 0..dim {
            for j in 0..dim {
                cov.m[i][j] += v[i] * v[j] / nf;
            }
        }
    }
    let (vals, _) = cov.eigh();
    let mut out = Vec::new();
    for v in &vals[..dim] {
        out.push(math::sqrt(v.max(0.0)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_identity() {
        let s = matrix_sqrt(&SymMat::identity(2)).unwrap();
        assert!(s.op_dist(&SymMat::identity(2)) < 1e-14);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let a = SymMat::diagonal(2, &[4.0, 1.0, 0.0]);
        let s = matrix_sqrt(&a).unwrap();
        assert!((s.m[0][0] - 2.0).abs() < 1e-13);
        assert!((s.m[1][1] - 1.0).abs() < 1e-13);
        assert!(s.m[0][1].abs() < 1e-13);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = SymMat::from_rows(2, &[[2.0, 1.0, 0.0], [1.0, 2.0, 0.0]]).unwrap();
        let s = matrix_sqrt(&a).unwrap();
        let mut s2 = SymMat::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    s2.m[i][j] += s.m[i][k] * s.m[k][j];
                }
            }
        }
        assert!(s2.op_dist(&a) < 1e-12, "S^2 != a");
        assert!(s.min_eigenvalue() > 0.0);
    }

    #[test]
    fn sqrt_commutes_with_orthogonal_conjugation() {
        // rotate a diagonal matrix, take the root, rotate back
        let th = 0.7;
        let (c, s) = (math::cos(th), math::sin(th));
        let q = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let d = SymMat::diagonal(2, &[3.0, 0.5, 0.0]);
        let mut a = SymMat::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        a.m[i][j] += q[i][k] * d.m[k][l] * q[j][l];
                    }
                }
            }
        }
        let root = matrix_sqrt(&a).unwrap();
        let droot = matrix_sqrt(&d).unwrap();
        let mut expect = SymMat::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        expect.m[i][j] += q[i][k] * droot.m[k][l] * q[j][l];
                    }
                }
            }
        }
        assert!(root.op_dist(&expect) < 1e-12);
    }

    #[test]
    fn sqrt_rejects_bad_input() {
        let a = SymMat::diagonal(2, &[1.0, -0.5, 0.0]);
        assert!(matches!(matrix_sqrt(&a), Err(Error::NotPositiveDefinite(_))));
        let mut b = SymMat::identity(2);
        b.m[0][1] = 0.5;
        assert!(matches!(matrix_sqrt(&b), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn eigh_3x3() {
        let a = SymMat::from_rows(
            3,
            &[[2.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 1.0]],
        )
        .unwrap();
        let (vals, vecs) = a.eigh();
        // residual ||A v - lambda v|| per eigenpair
        for s in 0..3 {
            let v = [vecs[0][s], vecs[1][s], vecs[2][s]];
            let av = a.apply(&v);
            let r = sub(&av, &scale(&v, vals[s]));
            assert!(norm(&r) < 1e-12, "residual {}", norm(&r));
        }
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
    }

    #[test]
    fn subspace_projection() {
        let v = Subspace::span(3, &[[0.0, 0.0, 2.0]]);
        assert_eq!(v.k(), 1);
        let p = [1.0, 2.0, 3.0];
        assert!((v.distance(&p) - math::sqrt(5.0)).abs() < 1e-14);
        let c = v.complement();
        assert_eq!(c.k(), 2);
        for b in &c.basis {
            assert!(dot(b, &v.basis[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn principal_directions_of_line_cloud() {
        let mut pts = Vec::new();
        for i in 0..20 {
            let t = (i as f64) / 19.0 - 0.5;
            pts.push([0.01 * t, t, 0.02 * t * t]);
        }
        let s = principal_directions(3, &pts, 1).unwrap();
        assert!(s.basis[0][1].abs() > 0.99);
    }
}
