//! Sparse polynomials in two or three variables with exact sphere and ball
//! moments. These closed-form moments are the oracle the rest of the crate
//! is tested against, so inner products here never fall back to quadrature.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geom::Point;
use crate::math;
use crate::{Error, Result};

pub type Exps = [u8; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub dim: usize,
    pub terms: BTreeMap<Exps, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        if c != 0.0 {
            p.terms.insert([0, 0, 0], c);
        }
        p
    }

    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut e = [0u8; 3];
        e[axis] = 1;
        let mut p = Self::zero(dim);
        p.terms.insert(e, 1.0);
        p
    }

    pub fn from_terms(dim: usize, terms: &[(Exps, f64)]) -> Self {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            p.add_term(*e, *c);
        }
        p
    }

    pub fn add_term(&mut self, e: Exps, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, *c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -*c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(*e, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn derivative(&self, axis: usize) -> Polynomial {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[axis] == 0 {
                continue;
            }
            let mut d = *e;
            d[axis] -= 1;
            out.add_term(d, c * e[axis] as f64);
        }
        out
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dim).map(|a| self.derivative(a)).collect()
    }

    /// v . grad P as a polynomial.
    pub fn directional_derivative(&self, v: &Point) -> Polynomial {
        let mut out = Self::zero(self.dim);
        for (a, comp) in v.iter().enumerate().take(self.dim) {
            if *comp != 0.0 {
                out = out.add(&self.derivative(a).scale(*comp));
            }
        }
        out
    }

    pub fn laplacian(&self) -> Polynomial {
        let mut out = Self::zero(self.dim);
        for a in 0..self.dim {
            out = out.add(&self.derivative(a).derivative(a));
        }
        out
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            acc += c
                * math::powi(x[0], e[0] as i32)
                * math::powi(x[1], e[1] as i32)
                * math::powi(x[2], e[2] as i32);
        }
        acc
    }

    pub fn eval_gradient(&self, x: &Point) -> Point {
        let mut g = [0.0; 3];
        for (a, slot) in g.iter_mut().enumerate().take(self.dim) {
            *slot = self.derivative(a).eval(x);
        }
        g
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e[0] as usize + e[1] as usize + e[2] as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.abs() <= tol)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Coefficient residual of the Euler identity d P = x . grad P; zero iff
    /// P is homogeneous of degree d about the origin.
    pub fn homogeneity_residual(&self, d: usize) -> f64 {
        let mut euler = Polynomial::zero(self.dim);
        for a in 0..self.dim {
            euler = euler.add(&self.derivative(a).mul(&Polynomial::coordinate(self.dim, a)));
        }
        euler.sub(&self.scale(d as f64)).max_coeff()
    }

    /// Restrict to the terms of one total degree.
    pub fn homogeneous_part(&self, d: usize) -> Polynomial {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[0] as usize + e[1] as usize + e[2] as usize == d {
                out.add_term(*e, *c);
            }
        }
        out
    }
}

/// Average of x^a y^b z^c over the unit sphere in R^dim; closed form via
/// double factorials, zero when any exponent is odd.
pub fn sphere_moment(dim: usize, e: &Exps) -> f64 {
    debug_assert!(dim == 2 || dim == 3);
    if dim == 2 && e[2] != 0 {
        return 0.0;
    }
    if e.iter().any(|&k| k % 2 == 1) {
        return 0.0;
    }
    let mut num = 1.0;
    let mut total = 0usize;
    for &k in e.iter().take(dim) {
        let m = k as usize / 2;
        total += m;
        let mut j = 1.0;
        let mut acc = 1.0;
        for _ in 0..m {
            acc *= 2.0 * j - 1.0;
            j += 1.0;
        }
        num *= acc;
    }
    let mut den = 1.0;
    for j in 0..total {
        den *= (dim + 2 * j) as f64;
    }
    num / den
}

/// Average of x^a y^b z^c over the unit ball in R^dim.
pub fn ball_moment(dim: usize, e: &Exps) -> f64 {
    let total = e[0] as usize + e[1] as usize + e[2] as usize;
    sphere_moment(dim, e) * dim as f64 / (dim + total) as f64
}

/// Exact sphere-average inner product of two polynomials.
pub fn sphere_inner(p: &Polynomial, q: &Polynomial) -> Result<f64> {
    if p.dim != q.dim {
        return Err(Error::DimMismatch(p.dim, q.dim));
    }
    let mut acc = 0.0;
    for (ea, ca) in &p.terms {
        for (eb, cb) in &q.terms {
            let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
            let m = sphere_moment(p.dim, &e);
            if m != 0.0 {
                acc += ca * cb * m;
            }
        }
    }
    Ok(acc)
}

/// Exact ball-average inner product of two polynomials.
pub fn ball_inner(p: &Polynomial, q: &Polynomial) -> Result<f64> {
    if p.dim != q.dim {
        return Err(Error::DimMismatch(p.dim, q.dim));
    }
    let mut acc = 0.0;
    for (ea, ca) in &p.terms {
        for (eb, cb) in &q.terms {
            let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
            let m = ball_moment(p.dim, &e);
            if m != 0.0 {
                acc += ca * cb * m;
            }
        }
    }
    Ok(acc)
}

pub fn sphere_norm(p: &Polynomial) -> f64 {
    math::sqrt(sphere_inner(p, p).expect("same dim").max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x2_minus_y2(dim: usize) -> Polynomial {
        Polynomial::from_terms(dim, &[([2, 0, 0], 1.0), ([0, 2, 0], -1.0)])
    }

    #[test]
    fn moments_match_quadrature() {
        use crate::quad::SphereRule;
        for dim in [2usize, 3] {
            let rule = SphereRule::new(dim);
            for e in [[2u8, 0, 0], [4, 2, 0], [2, 2, 2], [1, 2, 0], [6, 0, 0]] {
                if dim == 2 && e[2] != 0 {
                    continue;
                }
                let exact = sphere_moment(dim, &e);
                let quad = rule.average(&[0.0; 3], 1.0, |p| {
                    math::powi(p[0], e[0] as i32)
                        * math::powi(p[1], e[1] as i32)
                        * math::powi(p[2], e[2] as i32)
                });
                assert!((exact - quad).abs() < 1e-13, "dim={dim} e={e:?}");
            }
        }
    }

    #[test]
    fn inner_product_examples() {
        // <x, x> = 1/2 in 2D
        let x = Polynomial::coordinate(2, 0);
        assert!((sphere_inner(&x, &x).unwrap() - 0.5).abs() < 1e-15);
        // <x, y> = 0
        let y = Polynomial::coordinate(2, 1);
        assert!(sphere_inner(&x, &y).unwrap().abs() < 1e-15);
        // <x^2-y^2, y^2-z^2> = -2/15 in 3D
        let p = x2_minus_y2(3);
        let q = Polynomial::from_terms(3, &[([0, 2, 0], 1.0), ([0, 0, 2], -1.0)]);
        assert!((sphere_inner(&p, &q).unwrap() + 2.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_to_ball_ratio() {
        // avg_sphere P^2 / avg_ball P^2 = (n + 2d)/n for homogeneous P
        for dim in [2usize, 3] {
            let p = x2_minus_y2(dim);
            let s = sphere_inner(&p, &p).unwrap();
            let b = ball_inner(&p, &p).unwrap();
            let expect = (dim as f64 + 4.0) / dim as f64;
            assert!((s / b - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn laplacian_and_homogeneity() {
        let p = x2_minus_y2(2);
        assert!(p.laplacian().is_zero(0.0));
        assert!(p.homogeneity_residual(2) == 0.0);
        assert!(p.homogeneity_residual(1) > 0.0);
        let q = Polynomial::from_terms(2, &[([2, 0, 0], 1.0), ([0, 2, 0], 1.0)]);
        assert!((q.laplacian().eval(&[0.0; 3]) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn eval_and_gradient() {
        let p = x2_minus_y2(2);
        assert!((p.eval(&[1.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        let g = p.eval_gradient(&[1.0, 0.0, 0.0]);
        assert!((g[0] - 2.0).abs() < 1e-15 && g[1].abs() < 1e-15);
    }
}
