//! Coefficient fields satisfying the ellipticity and Hölder assumptions,
//! plus exact analytic reference solutions.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use rand::SeedableRng as _;
use rand_chacha::ChaCha8Rng;

use crate::geom::{self, dist, Point, SymMat};
use crate::hhp::HarmonicPolynomial;
use crate::math;
use crate::poly::Polynomial;
use crate::{Error, Result};

/// Anything that can play the role of the solution u: analytic oracles and
/// discrete PDE solutions both implement it. `clearance` is the radius of
/// the ball around `x` on which value and gradient stay evaluable.
pub trait Solution: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Point;
    fn clearance(&self, x: &Point) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    Identity,
    RadialBump,
    RandomSmoothed,
}

#[derive(Debug, Clone)]
struct Wave {
    k: Point,
    phase: f64,
    amp: f64,
}

/// Diagonal leading coefficients a, drift b and potential c with ellipticity
/// constant lambda and Hölder exponent alpha. The generated a is kept
/// diagonal so the five/seven-point flux scheme stays consistent with the
/// continuum operator.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub dim: usize,
    pub mode: FieldMode,
    pub seed: u64,
    pub lambda: f64,
    pub alpha: f64,
    /// Bump center for radial_bump (the C^alpha-but-not-Lipschitz point).
    pub center: Point,
    /// Constant potential term, zero unless explicitly requested.
    pub c_const: f64,
    a_waves: Vec<Vec<Wave>>,
    b_waves: Vec<Vec<Wave>>,
    b_const: Point,
}

impl CoefficientField {
    pub fn identity(dim: usize) -> Self {
        CoefficientField {
            dim,
            mode: FieldMode::Identity,
            seed: 0,
            lambda: 0.0,
            alpha: 0.5,
            center: geom::ORIGIN,
            c_const: 0.0,
            a_waves: Vec::new(),
            b_waves: Vec::new(),
            b_const: geom::ORIGIN,
        }
    }

    /// Constant diagonal leading part, for composition checks.
    pub fn constant_diagonal(dim: usize, diag: &Point, lambda: f64) -> Self {
        let mut f = Self::identity(dim);
        f.lambda = lambda;
        // encode as zero-frequency waves
        let mut a_waves = Vec::new();
        for d in 0..dim {
            a_waves.push(alloc::vec![Wave {
                k: geom::ORIGIN,
                phase: math::PI / 2.0,
                amp: diag[d] - 1.0
            }]);
        }
        f.mode = FieldMode::RandomSmoothed;
        f.a_waves = a_waves;
        f
    }

    pub fn with_potential(mut self, c: f64) -> Self {
        self.c_const = c;
        self
    }

    pub fn with_constant_drift(mut self, b: Point) -> Self {
        self.b_const = b;
        self
    }

    fn bump(&self, x: &Point) -> f64 {
        let r = dist(x, &self.center);
        math::powf(r, self.alpha).min(1.0)
    }

    /// Leading coefficients at x (diagonal symmetric matrix).
    pub fn a(&self, x: &Point) -> SymMat {
        match self.mode {
            FieldMode::Identity => SymMat::identity(self.dim),
            FieldMode::RadialBump => {
                let mut d = [1.0, 1.0, 1.0];
                d[0] = 1.0 + self.lambda * self.bump(x);
                SymMat::diagonal(self.dim, &d)
            }
            FieldMode::RandomSmoothed => {
                let lo = 1.0 / (1.0 + self.lambda) - 1.0;
                let hi = self.lambda;
                let mut d = [1.0, 1.0, 1.0];
                for (axis, waves) in self.a_waves.iter().enumerate() {
                    let mut g = 0.0;
                    for w in waves {
                        g += w.amp * math::sin(geom::dot(&w.k, x) + w.phase);
                    }
                    d[axis] = 1.0 + g.clamp(lo, hi);
                }
                SymMat::diagonal(self.dim, &d)
            }
        }
    }

    /// Square root of a(x): the rescaling transform A_x.
    pub fn a_sqrt(&self, x: &Point) -> SymMat {
        geom::matrix_sqrt(&self.a(x)).expect("generated fields are SPD by construction")
    }

    pub fn b(&self, x: &Point) -> Point {
        let mut out = self.b_const;
        for (axis, waves) in self.b_waves.iter().enumerate() {
            for w in waves {
                out[axis] += w.amp * math::sin(geom::dot(&w.k, x) + w.phase);
            }
        }
        out
    }

    pub fn c(&self, _x: &Point) -> f64 {
        self.c_const
    }

    pub fn has_drift(&self) -> bool {
        !self.b_waves.is_empty() || geom::norm(&self.b_const) > 0.0
    }

    /// Operator norm bound for A_x over generated fields.
    pub fn a_sqrt_norm_bound(&self) -> f64 {
        math::sqrt(1.0 + self.lambda)
    }

    /// Sampled audit of the ellipticity, Hölder and symmetry invariants over
    /// the box of half-width `hw` around the bump center.
    pub fn audit(&self, pairs: usize, seed: u64, hw: f64) -> FieldAudit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| -> Point {
            let mut p = geom::ORIGIN;
            for d in 0..self.dim {
                p[d] = self.center[d] + rng.gen_range(-hw..hw);
            }
            p
        };
        let mut audit = FieldAudit {
            hoelder_quotient: 0.0,
            min_eig: f64::INFINITY,
            max_eig: f64::NEG_INFINITY,
            sup_b: 0.0,
            sup_c: 0.0,
            max_asymmetry: 0.0,
        };
        for _ in 0..pairs {
            let y = draw(&mut rng);
            let z = draw(&mut rng);
            let ay = self.a(&y);
            let az = self.a(&z);
            let sep = dist(&y, &z);
            if sep > 1e-12 {
                let mut entry = 0.0f64;
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        entry = entry.max((ay.m[i][j] - az.m[i][j]).abs());
                    }
                }
                audit.hoelder_quotient =
                    audit.hoelder_quotient.max(entry / math::powf(sep, self.alpha));
            }
            audit.min_eig = audit.min_eig.min(ay.min_eigenvalue());
            audit.max_eig = audit.max_eig.max(ay.max_eigenvalue());
            audit.max_asymmetry = audit.max_asymmetry.max(ay.asymmetry());
            audit.sup_b = audit.sup_b.max(geom::norm(&self.b(&y)));
            audit.sup_c = audit.sup_c.max(self.c(&y).abs());
        }
        audit
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FieldAudit {
    pub hoelder_quotient: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    pub sup_b: f64,
    pub sup_c: f64,
    pub max_asymmetry: f64,
}

impl FieldAudit {
    pub fn check(&self, lambda: f64) -> Result<()> {
        let slack = 1e-9;
        if self.hoelder_quotient > lambda + slack {
            return Err(Error::FieldAudit(format!(
                "Hölder quotient {} exceeds lambda {}",
                self.hoelder_quotient, lambda
            )));
        }
        if self.min_eig < 1.0 / (1.0 + lambda) - slack || self.max_eig > 1.0 + lambda + slack {
            return Err(Error::FieldAudit(format!(
                "eigenvalues [{}, {}] escape [{}, {}]",
                self.min_eig,
                self.max_eig,
                1.0 / (1.0 + lambda),
                1.0 + lambda
            )));
        }
        if self.sup_b > lambda + slack || self.sup_c > lambda + slack {
            return Err(Error::FieldAudit(format!(
                "drift/potential bounds violated: |b| {} |c| {}",
                self.sup_b, self.sup_c
            )));
        }
        if self.max_asymmetry > 1e-14 {
            return Err(Error::FieldAudit(format!("asymmetry {}", self.max_asymmetry)));
        }
        Ok(())
    }
}

/// Builds a coefficient field of the requested mode and audits it at its own
/// (lambda, alpha) on 10^4 sampled pairs.
pub fn make_hoelder_field(
    seed: u64,
    lambda: f64,
    alpha: f64,
    dim: usize,
    mode: FieldMode,
) -> Result<CoefficientField> {
    if dim != 2 && dim != 3 {
        return Err(Error::BadDim(dim));
    }
    if lambda < 0.0 {
        return Err(Error::BadParameter(format!("lambda {lambda} must be >= 0")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadParameter(format!("alpha {alpha} must lie in (0,1)")));
    }
    let mut f = CoefficientField::identity(dim);
    f.seed = seed;
    f.lambda = lambda;
    f.alpha = alpha;
    f.mode = mode;
    match mode {
        FieldMode::Identity => {}
        FieldMode::RadialBump => {}
        FieldMode::RandomSmoothed => {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1));
            let n_waves = 6;
            let budget = 0.95 * lambda;
            for _axis in 0..dim {
                let mut waves = Vec::new();
                let mut weight = 0.0;
                let mut raw: Vec<(Point, f64, f64)> = Vec::new();
                for _ in 0..n_waves {
                    let mut k = geom::ORIGIN;
                    for d in 0..dim {
                        k[d] = rng.gen_range(-4.0..4.0);
                    }
                    let amp: f64 = rng.gen_range(-1.0..1.0);
                    let phase: f64 = rng.gen_range(0.0..(2.0 * math::PI));
                    let kn = geom::norm(&k).max(0.1);
                    weight += amp.abs() * math::powf(2.0, 1.0 - alpha) * math::powf(kn, alpha);
                    raw.push((k, phase, amp));
                }
                let scale = if weight > 0.0 { budget / weight } else { 0.0 };
                for (k, phase, amp) in raw {
                    waves.push(Wave { k, phase, amp: amp * scale });
                }
                f.a_waves.push(waves);
            }
            // bounded continuous drift, |b| <= lambda
            for _axis in 0..dim {
                let mut waves = Vec::new();
                let mut sup = 0.0;
                let mut raw: Vec<(Point, f64, f64)> = Vec::new();
                for _ in 0..3 {
                    let mut k = geom::ORIGIN;
                    for d in 0..dim {
                        k[d] = rng.gen_range(-3.0..3.0);
                    }
                    let amp: f64 = rng.gen_range(-1.0..1.0);
                    let phase: f64 = rng.gen_range(0.0..(2.0 * math::PI));
                    sup += amp.abs();
                    raw.push((k, phase, amp));
                }
                let scale =
                    if sup > 0.0 { 0.9 * lambda / (sup * math::sqrt(dim as f64)) } else { 0.0 };
                for (k, phase, amp) in raw {
                    waves.push(Wave { k, phase, amp: amp * scale });
                }
                f.b_waves.push(waves);
            }
        }
    }
    let audit = f.audit(10_000, seed ^ 0x5eed, 1.0);
    audit.check(lambda)?;
    Ok(f)
}

/// An exact reference solution: value and gradient in closed form.
#[derive(Debug, Clone)]
pub struct AnalyticSolution {
    pub dim: usize,
    pub degree: usize,
    /// Axes along which the solution is exactly invariant, when any.
    pub invariant_axes: Vec<usize>,
    poly: Polynomial,
    grad: Vec<Polynomial>,
}

impl AnalyticSolution {
    pub fn from_polynomial(poly: Polynomial) -> Self {
        let dim = poly.dim;
        let degree = poly.total_degree();
        let grad = poly.gradient();
        let invariant_axes = (0..dim).filter(|&a| poly.derivative(a).is_zero(0.0)).collect();
        AnalyticSolution { dim, degree, invariant_axes, poly, grad }
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }
}

impl Solution for AnalyticSolution {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Point) -> f64 {
        self.poly.eval(x)
    }

    fn gradient(&self, x: &Point) -> Point {
        let mut g = geom::ORIGIN;
        for (a, ga) in self.grad.iter().enumerate() {
            g[a] = ga.eval(x);
        }
        g
    }

    fn clearance(&self, _x: &Point) -> f64 {
        f64::INFINITY
    }
}

/// Wraps a homogeneous harmonic polynomial as an exact solution of the
/// constant-coefficient equation.
pub fn harmonic_polynomial_solution(p: &HarmonicPolynomial) -> AnalyticSolution {
    AnalyticSolution::from_polynomial(p.poly.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::sphere_norm;

    #[test]
    fn identity_field_is_identity() {
        let f = make_hoelder_field(0, 0.0, 0.5, 2, FieldMode::Identity).unwrap();
        let a = f.a(&[0.3, -0.2, 0.0]);
        assert!(a.op_dist(&SymMat::identity(2)) == 0.0);
        assert_eq!(geom::norm(&f.b(&[0.1, 0.1, 0.0])), 0.0);
        assert_eq!(f.c(&[0.1, 0.1, 0.0]), 0.0);
    }

    #[test]
    fn bump_field_hoelder_quotient() {
        let f = make_hoelder_field(1, 0.3, 0.5, 2, FieldMode::RadialBump).unwrap();
        let audit = f.audit(10_000, 42, 1.0);
        assert!(audit.hoelder_quotient <= 0.3 + 1e-12, "{}", audit.hoelder_quotient);
        // the quotient is actually attained near the bump center
        assert!(audit.hoelder_quotient > 0.1);
    }

    #[test]
    fn bump_field_eigenvalue_sweep() {
        let f = make_hoelder_field(2, 0.3, 0.5, 2, FieldMode::RadialBump).unwrap();
        let mut min_eig = f64::INFINITY;
        for i in 0..64 {
            for j in 0..64 {
                let p = [-1.0 + 2.0 * (i as f64) / 63.0, -1.0 + 2.0 * (j as f64) / 63.0, 0.0];
                min_eig = min_eig.min(f.a(&p).min_eigenvalue());
            }
        }
        assert!(min_eig >= 1.0 / 1.3 - 1e-12);
    }

    #[test]
    fn random_field_passes_its_own_audit() {
        for seed in [3u64, 17, 99] {
            for dim in [2usize, 3] {
                let f = make_hoelder_field(seed, 0.3, 0.4, dim, FieldMode::RandomSmoothed).unwrap();
                let audit = f.audit(10_000, seed + 1, 1.0);
                audit.check(0.3).unwrap();
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_hoelder_field(0, -0.1, 0.5, 2, FieldMode::Identity).is_err());
        assert!(make_hoelder_field(0, 0.1, 1.0, 2, FieldMode::Identity).is_err());
        assert!(make_hoelder_field(0, 0.1, 0.5, 4, FieldMode::Identity).is_err());
    }

    #[test]
    fn analytic_solution_gradient() {
        // P = x^2 - y^2: value 1 and gradient (2, 0) at (1, 0)
        let p = Polynomial::from_terms(2, &[([2, 0, 0], 1.0), ([0, 2, 0], -1.0)]);
        let s = AnalyticSolution::from_polynomial(p);
        assert!((s.value(&[1.0, 0.0, 0.0]) - 1.0).abs() < 1e-15);
        let g = s.gradient(&[1.0, 0.0, 0.0]);
        assert!((g[0] - 2.0).abs() < 1e-15 && g[1].abs() < 1e-15);
        // P = x: gradient is (1, 0) everywhere
        let l = AnalyticSolution::from_polynomial(Polynomial::coordinate(2, 0));
        let g = l.gradient(&[0.4, -0.7, 0.0]);
        assert!((g[0] - 1.0).abs() < 1e-15 && g[1].abs() < 1e-15);
    }

    #[test]
    fn finite_difference_laplacian_of_cubic() {
        // Re((x+iy)^3), finite-difference Laplacian below 1e-6 at step 1e-3
        let p = Polynomial::from_terms(2, &[([3, 0, 0], 1.0), ([1, 2, 0], -3.0)]);
        assert!(sphere_norm(&p.laplacian()) == 0.0);
        let s = AnalyticSolution::from_polynomial(p);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-3;
        for _ in 0..100 {
            let x = [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9), 0.0];
            let mut lap = 0.0;
            for a in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[a] += h;
                xm[a] -= h;
                lap += (s.value(&xp) - 2.0 * s.value(&x) + s.value(&xm)) / (h * h);
            }
            assert!(lap.abs() < 1e-6, "lap={lap}");
        }
    }

    #[test]
    fn invariant_axes_metadata() {
        let p = Polynomial::from_terms(3, &[([2, 0, 0], 1.0), ([0, 2, 0], -1.0)]);
        let s = AnalyticSolution::from_polynomial(p);
        assert_eq!(s.invariant_axes, alloc::vec![2]);
        assert_eq!(s.degree, 2);
    }
}
