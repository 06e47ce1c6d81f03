//! Homogeneous harmonic polynomials: orthonormal bases under the
//! sphere-average inner product, gradient identities, invariant
//! decompositions and the cone-splitting predicates.

pub mod linalg;

use alloc::format;
use alloc::vec::Vec;

use crate::geom::{norm, Point, Subspace};
use crate::math;
use crate::poly::{sphere_inner, sphere_norm, Polynomial};
use crate::{Error, Result};

use linalg::{jacobi_eigh, nullspace, DMat};

/// Largest supported degree; moment arithmetic stays well-conditioned in
/// double precision up to here and the growth bounds at desk scale never
/// need more.
pub const MAX_DEGREE: usize = 12;

/// A homogeneous harmonic polynomial of fixed degree.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicPolynomial {
    pub dim: usize,
    pub degree: usize,
    pub poly: Polynomial,
}

impl HarmonicPolynomial {
    /// Validates homogeneity (structurally) and harmonicity (coefficient
    /// residual of the Laplacian).
    pub fn new(poly: Polynomial) -> Result<Self> {
        let degree = poly.total_degree();
        let scale = poly.max_coeff().max(1e-300);
        for e in poly.terms.keys() {
            let td = e[0] as usize + e[1] as usize + e[2] as usize;
            if td != degree {
                return Err(Error::NotHomogeneous((degree - td) as f64));
            }
        }
        let lap = poly.laplacian().max_coeff();
        let tol = 1e-9 * scale * ((degree * degree).max(1) as f64);
        if lap > tol {
            return Err(Error::NotHarmonic(lap / scale));
        }
        Ok(HarmonicPolynomial { dim: poly.dim, degree, poly })
    }

    pub fn norm(&self) -> f64 {
        sphere_norm(&self.poly)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 0.0 {
            return Err(Error::ZeroPolynomial);
        }
        Ok(HarmonicPolynomial { dim: self.dim, degree: self.degree, poly: self.poly.scale(1.0 / n) })
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.poly.eval(x)
    }

    pub fn eval_gradient(&self, x: &Point) -> Point {
        self.poly.eval_gradient(x)
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        sphere_inner(&self.poly, &other.poly)
    }
}

/// Exact sphere-average inner product of two harmonic polynomials.
pub fn inner(p1: &HarmonicPolynomial, p2: &HarmonicPolynomial) -> Result<f64> {
    p1.inner(p2)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn basis_2d(d: usize) -> Vec<HarmonicPolynomial> {
    if d == 0 {
        return alloc::vec![HarmonicPolynomial::new(Polynomial::constant(2, 1.0)).unwrap()];
    }
    // sqrt(2) Re((x+iy)^d), sqrt(2) Im((x+iy)^d)
    let mut re = Polynomial::zero(2);
    let mut im = Polynomial::zero(2);
    let s = math::sqrt(2.0);
    for j in 0..=d {
        let c = binomial(d, j);
        let e = [(d - j) as u8, j as u8, 0];
        match j % 4 {
            0 => re.add_term(e, s * c),
            1 => im.add_term(e, s * c),
            2 => re.add_term(e, -s * c),
            _ => im.add_term(e, -s * c),
        }
    }
    alloc::vec![
        HarmonicPolynomial::new(re).unwrap(),
        HarmonicPolynomial::new(im).unwrap(),
    ]
}

fn monomials_of_degree(d: usize) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=(d - a)).rev() {
            out.push([a as u8, b as u8, (d - a - b) as u8]);
        }
    }
    out
}

fn basis_3d(d: usize) -> Vec<HarmonicPolynomial> {
    if d == 0 {
        return alloc::vec![HarmonicPolynomial::new(Polynomial::constant(3, 1.0)).unwrap()];
    }
    let monos = monomials_of_degree(d);
    let kernel = if d >= 2 {
        let targets = monomials_of_degree(d - 2);
        let mut l = DMat::zeros(targets.len(), monos.len());
        for (c, e) in monos.iter().enumerate() {
            for axis in 0..3usize {
                if e[axis] >= 2 {
                    let mut t = *e;
                    t[axis] -= 2;
                    let row = targets.iter().position(|x| *x == t).unwrap();
                    let k = e[axis] as f64;
                    l.set(row, c, l.get(row, c) + k * (k - 1.0));
                }
            }
        }
        nullspace(&l, 1e-12)
    } else {
        (0..monos.len())
            .map(|i| {
                let mut v = alloc::vec![0.0; monos.len()];
                v[i] = 1.0;
                v
            })
            .collect()
    };
    // modified Gram-Schmidt with a second pass, under the exact inner product
    let mut polys: Vec<Polynomial> = Vec::new();
    for coeffs in kernel {
        let mut p = Polynomial::zero(3);
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(monos[i], *c);
        }
        for _pass in 0..2 {
            for q in &polys {
                let c = sphere_inner(&p, q).unwrap();
                p = p.sub(&q.scale(c));
            }
        }
        let n = sphere_norm(&p);
        if n > 1e-10 {
            polys.push(p.scale(1.0 / n));
        }
    }
    debug_assert_eq!(polys.len(), 2 * d + 1);
    polys.into_iter().map(|p| HarmonicPolynomial::new(p).unwrap()).collect()
}

/// Orthonormal basis of the degree-d homogeneous harmonic polynomials under
/// the sphere-average inner product (dimension 2 for d >= 1 in 2D, 2d+1 in
/// 3D).
pub fn basis(dim: usize, d: usize) -> Result<Vec<HarmonicPolynomial>> {
    if dim != 2 && dim != 3 {
        return Err(Error::BadDim(dim));
    }
    if d > MAX_DEGREE {
        return Err(Error::BadParameter(format!("degree {d} exceeds max {MAX_DEGREE}")));
    }
    Ok(match dim {
        2 => basis_2d(d),
        _ => basis_3d(d),
    })
}

/// Basis of one degree together with the matrices of the coordinate
/// derivatives into the degree-(d-1) basis.
#[derive(Debug, Clone)]
pub struct DegreeBasis {
    pub dim: usize,
    pub degree: usize,
    pub polys: Vec<HarmonicPolynomial>,
    /// deriv[a]: coefficients of d/dx_a from this degree into degree-1; rows
    /// index the lower basis, columns this basis. Empty for degree 0.
    pub deriv: Vec<DMat>,
}

/// Bases for all degrees 0..=d_max of one ambient dimension, with derivative
/// matrices, shared across fits so the construction cost is paid once.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub dim: usize,
    pub degrees: Vec<DegreeBasis>,
}

impl BasisSet {
    pub fn new(dim: usize, d_max: usize) -> Result<Self> {
        let mut degrees: Vec<DegreeBasis> = Vec::new();
        for d in 0..=d_max {
            let polys = basis(dim, d)?;
            let deriv = if d == 0 {
                Vec::new()
            } else {
                let lower: &DegreeBasis = &degrees[d - 1];
                let mut mats = Vec::with_capacity(dim);
                for a in 0..dim {
                    let mut m = DMat::zeros(lower.polys.len(), polys.len());
                    for (c, p) in polys.iter().enumerate() {
                        let dp = p.poly.derivative(a);
                        for (r, q) in lower.polys.iter().enumerate() {
                            m.set(r, c, sphere_inner(&dp, &q.poly)?);
                        }
                    }
                    mats.push(m);
                }
                mats
            };
            degrees.push(DegreeBasis { dim, degree: d, polys, deriv });
        }
        Ok(BasisSet { dim, degrees })
    }

    pub fn degree(&self, d: usize) -> &DegreeBasis {
        &self.degrees[d]
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.len() - 1
    }

    /// Matrix of v . grad from degree d into degree d-1, in the orthonormal
    /// bases.
    pub fn directional_matrix(&self, d: usize, v: &Point) -> DMat {
        let db = self.degree(d);
        let rows = if d == 0 { 0 } else { self.degree(d - 1).polys.len() };
        let cols = db.polys.len();
        let mut m = DMat::zeros(rows, cols);
        for a in 0..self.dim {
            if v[a] == 0.0 {
                continue;
            }
            for r in 0..rows {
                for c in 0..cols {
                    m.set(r, c, m.get(r, c) + v[a] * db.deriv[a].get(r, c));
                }
            }
        }
        m
    }

    /// Coefficient vector of P in the degree-d orthonormal basis.
    pub fn coefficients(&self, p: &HarmonicPolynomial) -> Result<Vec<f64>> {
        let db = self.degree(p.degree);
        db.polys.iter().map(|b| sphere_inner(&p.poly, &b.poly)).collect()
    }

    /// Polynomial from coefficients in the degree-d basis.
    pub fn combine(&self, d: usize, coeffs: &[f64]) -> HarmonicPolynomial {
        let db = self.degree(d);
        let mut p = Polynomial::zero(self.dim);
        for (c, b) in coeffs.iter().zip(db.polys.iter()) {
            if *c != 0.0 {
                p = p.add(&b.poly.scale(*c));
            }
        }
        HarmonicPolynomial { dim: self.dim, degree: d, poly: p }
    }

    /// Orthonormal basis (as coefficient vectors in the degree-d basis) of
    /// the subspace invariant along every direction in `dirs`.
    pub fn invariant_kernel(&self, d: usize, dirs: &[Point]) -> Vec<Vec<f64>> {
        let n = self.degree(d).polys.len();
        if d == 0 || dirs.is_empty() {
            // constants are invariant along everything
            let mut out = Vec::new();
            for i in 0..n {
                let mut v = alloc::vec![0.0; n];
                v[i] = 1.0;
                out.push(v);
            }
            return out;
        }
        let mut s = DMat::zeros(n, n);
        for v in dirs {
            let m = self.directional_matrix(d, v);
            let g = m.gram();
            for i in 0..n * n {
                s.data[i] += g.data[i];
            }
        }
        let (vals, vecs) = jacobi_eigh(&s);
        let lmax = vals.first().cloned().unwrap_or(0.0).max(1e-30);
        let mut kernel = Vec::new();
        for (slot, lam) in vals.iter().enumerate() {
            if *lam <= 1e-12 * lmax.max(1.0) {
                kernel.push((0..n).map(|k| vecs.get(k, slot)).collect());
            }
        }
        kernel
    }
}

/// Returns (lhs, rhs) of the gradient identity
/// <grad P1, grad P2> = d(2d + n - 2) <P1, P2>.
pub fn gradient_identity_check(
    p1: &HarmonicPolynomial,
    p2: &HarmonicPolynomial,
) -> Result<(f64, f64)> {
    if p1.dim != p2.dim {
        return Err(Error::DimMismatch(p1.dim, p2.dim));
    }
    if p1.degree != p2.degree {
        return Err(Error::BadParameter(format!(
            "gradient identity needs equal degrees, got {} and {}",
            p1.degree, p2.degree
        )));
    }
    let mut lhs = 0.0;
    for a in 0..p1.dim {
        lhs += sphere_inner(&p1.poly.derivative(a), &p2.poly.derivative(a))?;
    }
    let d = p1.degree as f64;
    let n = p1.dim as f64;
    let rhs = d * (2.0 * d + n - 2.0) * sphere_inner(&p1.poly, &p2.poly)?;
    Ok((lhs, rhs))
}

/// Deterministic dense sample of the unit sphere used for sup norms;
/// includes the coordinate axes exactly.
pub fn sphere_samples(dim: usize) -> Vec<Point> {
    let mut out = Vec::new();
    match dim {
        2 => {
            let n = 4096usize;
            for j in 0..n {
                let th = 2.0 * math::PI * (j as f64) / (n as f64);
                out.push([math::cos(th), math::sin(th), 0.0]);
            }
        }
        _ => {
            let n = 32768usize;
            let golden = (1.0 + math::sqrt(5.0)) / 2.0;
            for i in 0..n {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let r = math::sqrt((1.0 - z * z).max(0.0));
                let phi = 2.0 * math::PI * (i as f64 / golden - math::floor(i as f64 / golden));
                out.push([r * math::cos(phi), r * math::sin(phi), z]);
            }
            for a in 0..3 {
                let mut e = [0.0; 3];
                e[a] = 1.0;
                out.push(e);
                e[a] = -1.0;
                out.push(e);
            }
        }
    }
    out
}

/// sup_{B_1} |P| / ||P||; homogeneity puts the max on the sphere, which is
/// sampled densely.
pub fn sup_norm_ratio(p: &HarmonicPolynomial) -> Result<f64> {
    if p.degree == 0 {
        return Err(Error::BadParameter("sup_norm_ratio needs degree >= 1".into()));
    }
    let nrm = p.norm();
    if nrm <= 0.0 {
        return Err(Error::ZeroPolynomial);
    }
    let mut sup = 0.0f64;
    for s in sphere_samples(p.dim) {
        sup = sup.max(p.eval(&s).abs());
    }
    Ok(sup / nrm)
}

/// Splits P into its v-invariant part and the orthogonal complement within
/// P_d; a projection, so applying it twice to the invariant part is the
/// identity.
pub fn decompose_invariant(
    p: &HarmonicPolynomial,
    v: &Point,
    set: &BasisSet,
) -> Result<(HarmonicPolynomial, HarmonicPolynomial)> {
    let nv = norm(v);
    if (nv - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitVector(nv));
    }
    let d = p.degree;
    let kernel = set.invariant_kernel(d, core::slice::from_ref(v));
    let coeffs = set.coefficients(p)?;
    let n = coeffs.len();
    let mut inv = alloc::vec![0.0; n];
    for k in &kernel {
        let c: f64 = k.iter().zip(coeffs.iter()).map(|(a, b)| a * b).sum();
        for i in 0..n {
            inv[i] += c * k[i];
        }
    }
    let p_inv = set.combine(d, &inv);
    let p_perp = HarmonicPolynomial {
        dim: p.dim,
        degree: d,
        poly: p.poly.sub(&p_inv.poly),
    };
    Ok((p_inv, p_perp))
}

/// ||v . grad P|| under the sphere inner product (an element of P_{d-1}).
pub fn directional_norm(p: &HarmonicPolynomial, v: &Point) -> f64 {
    sphere_norm(&p.poly.directional_derivative(v))
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub splits: bool,
    /// Residual of the 0-symmetry test at x0 (coefficient scale).
    pub residual: f64,
    /// Residual of grad P . x0 = 0 when the split holds.
    pub invariance_residual: f64,
    pub direction_added: Subspace,
}

/// Cone-splitting test for polynomials: P homogeneous about the origin and
/// 0-symmetric about x0 forces invariance along x0, extending V by one
/// dimension.
pub fn polynomial_split_test(
    p: &Polynomial,
    x0: &Point,
    v: &Subspace,
) -> Result<SplitResult> {
    let d = p.total_degree();
    let scale = p.max_coeff().max(1e-300);
    let hres = p.homogeneity_residual(d);
    if hres > 1e-10 * scale {
        return Err(Error::NotHomogeneous(hres / scale));
    }
    if v.k() > 0 && v.distance(x0) <= 1e-12 * norm(x0).max(1.0) {
        return Err(Error::BadParameter("x0 lies in V".into()));
    }
    // residual of d (P - P(x0)) = grad P . (y - x0)
    let shifted = p.sub(&Polynomial::constant(p.dim, p.eval(x0))).scale(d as f64);
    let mut rhs = Polynomial::zero(p.dim);
    for a in 0..p.dim {
        let da = p.derivative(a);
        rhs = rhs.add(&da.mul(&Polynomial::coordinate(p.dim, a)));
        rhs = rhs.sub(&da.scale(x0[a]));
    }
    let residual = shifted.sub(&rhs).max_coeff() / scale;
    let splits = residual <= 1e-10;
    let mut invariance_residual = 0.0;
    let mut direction_added = v.clone();
    if splits {
        invariance_residual = p.directional_derivative(x0).max_coeff() / scale;
        let mut gens = v.basis.clone();
        gens.push(*x0);
        direction_added = Subspace::span(p.dim, &gens);
    }
    Ok(SplitResult { splits, residual, invariance_residual, direction_added })
}

#[derive(Debug, Clone)]
pub struct AlmostInvariantReport {
    pub p1: HarmonicPolynomial,
    pub p2: HarmonicPolynomial,
    /// ||P1|| / ||P||, to compare against 1 - sqrt(eps)/8.
    pub ratio: f64,
    /// max over directions of ||dP/dv||^2 / ||grad P||^2.
    pub observed_eps: f64,
    /// Whether observed_eps <= the eps the caller claimed.
    pub hypothesis_ok: bool,
}

/// Decomposition of an almost-invariant polynomial into an exactly invariant
/// part and a remainder, with the norm ratio reported for comparison against
/// the (1 - sqrt(eps)/8) bound. Hypothesis failure is reported, not fatal.
pub fn almost_invariant_decomposition(
    p: &HarmonicPolynomial,
    dirs: &[Point],
    eps: f64,
    set: &BasisSet,
) -> Result<AlmostInvariantReport> {
    let d = p.degree;
    let mut grad_sq = 0.0;
    for a in 0..p.dim {
        grad_sq += sphere_inner(&p.poly.derivative(a), &p.poly.derivative(a))?;
    }
    let mut observed_eps = 0.0f64;
    for v in dirs {
        let dn = directional_norm(p, v);
        if grad_sq > 0.0 {
            observed_eps = observed_eps.max(dn * dn / grad_sq);
        }
    }
    let kernel = set.invariant_kernel(d, dirs);
    let coeffs = set.coefficients(p)?;
    let n = coeffs.len();
    let mut inv = alloc::vec![0.0; n];
    for k in &kernel {
        let c: f64 = k.iter().zip(coeffs.iter()).map(|(a, b)| a * b).sum();
        for i in 0..n {
            inv[i] += c * k[i];
        }
    }
    let p1 = set.combine(d, &inv);
    let p2 = HarmonicPolynomial { dim: p.dim, degree: d, poly: p.poly.sub(&p1.poly) };
    let ratio = p1.norm() / p.norm().max(1e-300);
    Ok(AlmostInvariantReport { p1, p2, ratio, observed_eps, hypothesis_ok: observed_eps <= eps })
}

/// Normalized zonal harmonic of degree k about the axis w (3D): the
/// building block of the kernel expansion.
pub fn zonal(k: usize, w: &Point) -> Result<HarmonicPolynomial> {
    let wn = norm(w);
    if wn <= 0.0 {
        return Err(Error::NonUnitVector(wn));
    }
    let axis = [w[0] / wn, w[1] / wn, w[2] / wn];
    // |x|^k P_k(x.w/|x|) = sum_m l_{k,m} (x.w)^{k-2m} (x.x)^m
    let xw = Polynomial::from_terms(
        3,
        &[([1, 0, 0], axis[0]), ([0, 1, 0], axis[1]), ([0, 0, 1], axis[2])],
    );
    let xx = Polynomial::from_terms(3, &[([2, 0, 0], 1.0), ([0, 2, 0], 1.0), ([0, 0, 2], 1.0)]);
    let mut fact = alloc::vec![1.0f64; 2 * k + 1];
    for i in 1..=2 * k {
        fact[i] = fact[i - 1] * i as f64;
    }
    let mut p = Polynomial::zero(3);
    let mut m = 0usize;
    while 2 * m <= k {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let l = sign * fact[2 * k - 2 * m]
            / (math::powi(2.0, k as i32) * fact[m] * fact[k - m] * fact[k - 2 * m]);
        let mut term = Polynomial::constant(3, l);
        for _ in 0..(k - 2 * m) {
            term = term.mul(&xw);
        }
        for _ in 0..m {
            term = term.mul(&xx);
        }
        p = p.add(&term);
        m += 1;
    }
    let hp = HarmonicPolynomial::new(p)?;
    hp.normalized()
}

/// Deterministic random element of P_d (not normalized).
pub fn random_hhp(
    dim: usize,
    d: usize,
    rng: &mut impl rand::Rng,
) -> Result<HarmonicPolynomial> {
    let b = basis(dim, d)?;
    let mut p = Polynomial::zero(dim);
    for q in &b {
        let c: f64 = rng.gen_range(-1.0..1.0);
        p = p.add(&q.poly.scale(c));
    }
    HarmonicPolynomial::new(p)
}
