//! The rescaling map u_{x,r}, sphere and ball averages, doubling index,
//! Almgren frequency, and the almost-monotonicity / pinching diagnostics.

use alloc::vec::Vec;

use crate::field::{CoefficientField, FieldMode, Solution};
use crate::geom::{add, scale, Point, SymMat};
use crate::math;
use crate::quad::{gauss_legendre, BallRule, SphereRule};
use crate::{Error, Result};

/// Un-normalized squared sphere averages below this are treated as the
/// excluded locally-constant enemies.
pub const DEGENERACY_THRESHOLD: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    /// Subtract u(x) before rescaling (assumption for the critical-set
    /// theorem, c = 0).
    Centered,
    /// No subtraction (assumption for the singular-set theorem).
    Uncentered,
}

/// The normalized window y -> u_{x,r}(y) = (u(x + r A_x y) - u(x)) / H^{1/2}.
pub struct RescaledWindow<'a> {
    pub base: Point,
    pub r: f64,
    pub mode: WindowMode,
    pub a_sqrt: SymMat,
    pub u0: f64,
    /// sqrt of the un-normalized squared sphere average at radius 1.
    pub norm: f64,
    pub dim: usize,
    a_sqrt_opnorm: f64,
    u: &'a dyn Solution,
}

impl<'a> RescaledWindow<'a> {
    pub fn physical(&self, y: &Point) -> Point {
        add(&self.base, &scale(&self.a_sqrt.apply(y), self.r))
    }

    /// Un-normalized window value.
    pub fn eval_raw(&self, y: &Point) -> f64 {
        self.u.value(&self.physical(y)) - self.u0
    }

    /// Normalized window value.
    pub fn eval(&self, y: &Point) -> f64 {
        self.eval_raw(y) / self.norm
    }

    /// Gradient of the normalized window: r A_x^T grad u / norm.
    pub fn eval_gradient(&self, y: &Point) -> Point {
        let g = self.u.gradient(&self.physical(y));
        let gt = self.a_sqrt.apply(&g); // A_x symmetric
        scale(&gt, self.r / self.norm)
    }

    /// Checks that the window is evaluable on |y| <= rho.
    pub fn ensure_radius(&self, rho: f64) -> Result<()> {
        let needed = self.r * self.a_sqrt_opnorm * rho;
        let have = self.u.clearance(&self.base);
        if needed > have {
            return Err(Error::OutOfDomain { needed, have });
        }
        Ok(())
    }
}

impl<'a> Solution for RescaledWindow<'a> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, y: &Point) -> f64 {
        self.eval(y)
    }

    fn gradient(&self, y: &Point) -> Point {
        self.eval_gradient(y)
    }

    fn clearance(&self, y: &Point) -> f64 {
        self.u.clearance(&self.physical(y)) / (self.r * self.a_sqrt_opnorm)
    }
}

/// Builds the rescaled window at (x, r), normalized so the squared sphere
/// average at radius 1 is one. Fails on degenerate (locally constant)
/// inputs and when the B_2 image leaves the domain.
pub fn rescale<'a>(
    u: &'a dyn Solution,
    field: &CoefficientField,
    x: &Point,
    r: f64,
    mode: WindowMode,
) -> Result<RescaledWindow<'a>> {
    if u.dim() != field.dim {
        return Err(Error::DimMismatch(u.dim(), field.dim));
    }
    let r_cap = 1.0 / math::sqrt(1.0 + field.lambda);
    if !(r > 0.0 && r <= r_cap) {
        return Err(Error::BadParameter(alloc::format!(
            "scale {r} outside (0, (1+lambda)^-1/2 = {r_cap}]"
        )));
    }
    let a = field.a(x);
    let a_sqrt = crate::geom::matrix_sqrt(&a)?;
    let a_sqrt_opnorm = math::sqrt(a.max_eigenvalue());
    let mut w = RescaledWindow {
        base: *x,
        r,
        mode,
        a_sqrt,
        u0: 0.0,
        norm: 1.0,
        dim: u.dim(),
        a_sqrt_opnorm,
        u,
    };
    w.ensure_radius(2.0)?;
    if mode == WindowMode::Centered {
        w.u0 = u.value(x);
    }
    let rule = SphereRule::new(u.dim());
    let mut sq = 0.0;
    for (node, wt) in rule.nodes.iter().zip(rule.weights.iter()) {
        let v = w.eval_raw(node);
        sq += wt * v * v;
    }
    if sq <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateWindow(sq));
    }
    w.norm = math::sqrt(sq);
    Ok(w)
}

/// Sphere average of an evaluator at radius rho about the origin:
/// 256-node trapezoid on the circle, product Gauss rule on the 2-sphere.
pub fn sphere_average(dim: usize, f: impl FnMut(&Point) -> f64, rho: f64) -> f64 {
    SphereRule::new(dim).average(&[0.0; 3], rho, f)
}

/// Ball average of an evaluator over |y| <= rho.
pub fn ball_average(dim: usize, f: impl FnMut(&Point) -> f64, rho: f64) -> f64 {
    BallRule::new(dim).average(&[0.0; 3], rho, f)
}

fn window_sphere_sq(w: &RescaledWindow, rule: &SphereRule, rho: f64) -> f64 {
    let mut acc = 0.0;
    for (node, wt) in rule.nodes.iter().zip(rule.weights.iter()) {
        let p = scale(node, rho);
        let v = w.eval_raw(&p);
        acc += wt * v * v;
    }
    acc
}

fn window_ball_sq(w: &RescaledWindow, rule: &BallRule, rho: f64) -> f64 {
    let mut acc = 0.0;
    for (r, wr) in rule.radii.iter().zip(rule.radial_weights.iter()) {
        acc += wr * window_sphere_sq(w, &rule.sphere, rho * r);
    }
    acc
}

/// Doubling index D(x, r): log base 4 of the ratio of the squared sphere
/// averages of the rescaled window at radii 2 and 1.
pub fn doubling_index(
    u: &dyn Solution,
    field: &CoefficientField,
    x: &Point,
    r: f64,
    mode: WindowMode,
) -> Result<f64> {
    let w = rescale(u, field, x, r, mode)?;
    let rule = SphereRule::new(u.dim());
    let s1 = window_sphere_sq(&w, &rule, 1.0);
    let s2 = window_sphere_sq(&w, &rule, 2.0);
    if s1 <= DEGENERACY_THRESHOLD || s2 <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateWindow(s1.min(s2)));
    }
    Ok(math::log4(s2 / s1))
}

/// Doubling index over balls at (x, r).
pub fn ball_doubling_index(
    u: &dyn Solution,
    field: &CoefficientField,
    x: &Point,
    r: f64,
    mode: WindowMode,
) -> Result<f64> {
    let w = rescale(u, field, x, r, mode)?;
    let rule = BallRule::new(u.dim());
    let b1 = window_ball_sq(&w, &rule, 1.0);
    let b2 = window_ball_sq(&w, &rule, 2.0);
    if b1 <= DEGENERACY_THRESHOLD || b2 <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateWindow(b1.min(b2)));
    }
    Ok(math::log4(b2 / b1))
}

/// Sphere average H(x, r) of (u - u(x))^2, directly on u (no rescaling).
pub fn h_value(u: &dyn Solution, x: &Point, r: f64, mode: WindowMode) -> Result<f64> {
    if u.clearance(x) < r {
        return Err(Error::OutOfDomain { needed: r, have: u.clearance(x) });
    }
    let u0 = match mode {
        WindowMode::Centered => u.value(x),
        WindowMode::Uncentered => 0.0,
    };
    let rule = SphereRule::new(u.dim());
    Ok(rule.average(x, r, |p| {
        let v = u.value(p) - u0;
        v * v
    }))
}

/// Normalized Almgren frequency N(x, r) = r Dirichlet(B_r) / boundary L^2.
/// Intended for identity leading coefficients (harmonic comparisons).
pub fn frequency(u: &dyn Solution, x: &Point, r: f64) -> Result<f64> {
    if u.clearance(x) < r {
        return Err(Error::OutOfDomain { needed: r, have: u.clearance(x) });
    }
    let dim = u.dim();
    let ball = BallRule::new(dim);
    let grad_sq = ball.average(x, r, |p| {
        let g = u.gradient(p);
        g[0] * g[0] + g[1] * g[1] + g[2] * g[2]
    });
    let h = h_value(u, x, r, WindowMode::Centered)?;
    if h <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateWindow(h));
    }
    Ok(r * r * grad_sq / (dim as f64 * h))
}

/// Residual of the identity H(r2) = H(r1) exp(2 int N/s ds) on [r1, r2].
pub fn h_identity_audit(u: &dyn Solution, x: &Point, r1: f64, r2: f64) -> Result<f64> {
    if r1 > r2 {
        return Err(Error::BadParameter("need r1 <= r2".into()));
    }
    let h1 = h_value(u, x, r1, WindowMode::Centered)?;
    let h2 = h_value(u, x, r2, WindowMode::Centered)?;
    if h1 <= DEGENERACY_THRESHOLD || h2 <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateWindow(h1.min(h2)));
    }
    if r1 == r2 {
        return Ok(0.0);
    }
    // int N/s ds = int N(e^t) dt over [ln r1, ln r2], by panels of Gauss
    let (lo, hi) = (math::ln(r1), math::ln(r2));
    let panels = (math::ceil((hi - lo) / 0.35) as usize).max(1);
    let (nodes, weights) = gauss_legendre(16);
    let mut integral = 0.0;
    for p in 0..panels {
        let a = lo + (hi - lo) * p as f64 / panels as f64;
        let b = lo + (hi - lo) * (p + 1) as f64 / panels as f64;
        for (t, wt) in nodes.iter().zip(weights.iter()) {
            let s = math::exp(0.5 * (b - a) * t + 0.5 * (a + b));
            integral += 0.5 * (b - a) * wt * frequency(u, x, s)?;
        }
    }
    Ok((math::ln(h2) - math::ln(h1) - 2.0 * integral).abs())
}

/// Ratio used in the ball-vs-sphere comparison: returns (J / H, H) where
/// J is the radial integral int_0^1 s^{n-1} H(rs) ds (the paper's ball
/// normalization, i.e. the standard ball average divided by n).
pub fn ball_sphere_ratio(u: &dyn Solution, x: &Point, r: f64) -> Result<(f64, f64)> {
    let dim = u.dim();
    let u0 = u.value(x);
    let ball = BallRule::new(dim);
    let j = ball.average(x, r, |p| {
        let v = u.value(p) - u0;
        v * v
    }) / dim as f64;
    let h = h_value(u, x, r, WindowMode::Centered)?;
    if h <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateWindow(h));
    }
    Ok((j / h, h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleFlag {
    Ok,
    Degenerate,
    OutOfDomain,
}

#[derive(Debug, Clone)]
pub struct ScaleEntry {
    pub r: f64,
    pub d: Option<f64>,
    pub n: Option<f64>,
    pub h: Option<f64>,
    pub flag: ScaleFlag,
}

/// Doubling-index values over a dyadic scale ladder at one base point.
#[derive(Debug, Clone)]
pub struct DoublingProfile {
    pub x: Point,
    pub mode: WindowMode,
    pub entries: Vec<ScaleEntry>,
}

impl DoublingProfile {
    pub fn valid_entries(&self) -> impl Iterator<Item = &ScaleEntry> {
        self.entries.iter().filter(|e| e.flag == ScaleFlag::Ok)
    }
}

pub fn dyadic_ladder(r_max: f64, rungs: usize) -> Vec<f64> {
    (0..=rungs).map(|i| r_max * math::powi(0.5, i as i32)).collect()
}

/// Evaluates D, H (and N for identity leading coefficients) on the ladder
/// r_i = r_max 2^{-i}; scales failing preconditions are flagged, not fatal.
pub fn profile(
    u: &dyn Solution,
    field: &CoefficientField,
    x: &Point,
    r_max: f64,
    rungs: usize,
    mode: WindowMode,
) -> DoublingProfile {
    let with_frequency = field.mode == FieldMode::Identity && mode == WindowMode::Centered;
    let mut entries = Vec::with_capacity(rungs + 1);
    for r in dyadic_ladder(r_max, rungs) {
        let d = doubling_index(u, field, x, r, mode);
        let flag = match &d {
            Ok(_) => ScaleFlag::Ok,
            Err(Error::DegenerateWindow(_)) => ScaleFlag::Degenerate,
            Err(_) => ScaleFlag::OutOfDomain,
        };
        let n = if with_frequency { frequency(u, x, r).ok() } else { None };
        let h = h_value(u, x, r, mode).ok();
        entries.push(ScaleEntry { r, d: d.ok(), n, h, flag });
    }
    DoublingProfile { x: *x, mode, entries }
}

#[derive(Debug, Clone)]
pub struct MonotonicityViolation {
    pub s: f64,
    pub r: f64,
    pub excess: f64,
}

#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub violations: Vec<MonotonicityViolation>,
    /// min D over the two smallest valid rungs, for the D >= 1 - eps claim.
    pub min_d_small: Option<f64>,
    /// min and max D over all valid rungs.
    pub min_d: Option<f64>,
    pub max_d: Option<f64>,
}

/// Enumerates all ladder pairs 2s <= r and reports positive excesses of
/// D(x, s) - D(x, r) - eps.
pub fn almost_monotonicity_audit(p: &DoublingProfile, eps: f64) -> MonotonicityReport {
    let valid: Vec<(f64, f64)> =
        p.valid_entries().filter_map(|e| e.d.map(|d| (e.r, d))).collect();
    let mut violations = Vec::new();
    for i in 0..valid.len() {
        for j in (i + 1)..valid.len() {
            let (r, dr) = valid[i];
            let (s, ds) = valid[j];
            if 2.0 * s <= r * (1.0 + 1e-12) {
                let excess = ds - dr - eps;
                if excess > 0.0 {
                    violations.push(MonotonicityViolation { s, r, excess });
                }
            }
        }
    }
    let min_d = valid.iter().map(|(_, d)| *d).fold(None, |acc: Option<f64>, d| {
        Some(acc.map_or(d, |a| a.min(d)))
    });
    let max_d = valid.iter().map(|(_, d)| *d).fold(None, |acc: Option<f64>, d| {
        Some(acc.map_or(d, |a| a.max(d)))
    });
    let mut small: Vec<f64> = valid.iter().rev().take(2).map(|(_, d)| *d).collect();
    small.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    MonotonicityReport { violations, min_d_small: small.first().cloned(), min_d, max_d }
}

/// Indices of the base-4 sub-ladder where the doubling index moves by at
/// least eps: I = { i : |D(x, q 4^-i) - D(x, q 4^-i-1)| >= eps }. The
/// profile must carry a base-2 ladder so consecutive base-4 rungs are two
/// rungs apart.
pub fn non_pinching_scales(p: &DoublingProfile, eps: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let e = &p.entries;
    let mut i = 0usize;
    while 2 * i + 2 < e.len() {
        if let (Some(d0), Some(d1)) = (e[2 * i].d, e[2 * i + 2].d) {
            if e[2 * i].flag == ScaleFlag::Ok
                && e[2 * i + 2].flag == ScaleFlag::Ok
                && (d0 - d1).abs() >= eps
            {
                out.push(i);
            }
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{
        harmonic_polynomial_solution, make_hoelder_field, AnalyticSolution, FieldMode,
    };
    use crate::geom::ORIGIN;
    use crate::hhp;
    use crate::poly::Polynomial;
    use rand::Rng as _;
    use rand::SeedableRng as _;

    fn identity(dim: usize) -> CoefficientField {
        CoefficientField::identity(dim)
    }

    fn linear2() -> AnalyticSolution {
        AnalyticSolution::from_polynomial(Polynomial::coordinate(2, 0))
    }

    fn mixed2() -> AnalyticSolution {
        // x + x^2 - y^2
        AnalyticSolution::from_polynomial(Polynomial::from_terms(
            2,
            &[([1, 0, 0], 1.0), ([2, 0, 0], 1.0), ([0, 2, 0], -1.0)],
        ))
    }

    #[test]
    fn window_of_linear_is_sqrt2_y1() {
        let u = linear2();
        let f = identity(2);
        let w = rescale(&u, &f, &ORIGIN, 0.5, WindowMode::Centered).unwrap();
        for y in [[1.0, 0.0, 0.0], [0.3, -0.8, 0.0], [0.0, 1.0, 0.0]] {
            assert!((w.eval(&y) - math::sqrt(2.0) * y[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_solution_is_degenerate() {
        let u = AnalyticSolution::from_polynomial(Polynomial::constant(2, 5.0));
        let f = identity(2);
        assert!(matches!(
            rescale(&u, &f, &ORIGIN, 0.5, WindowMode::Centered),
            Err(Error::DegenerateWindow(_))
        ));
    }

    #[test]
    fn anisotropic_rescaling_composes() {
        let f = CoefficientField::constant_diagonal(2, &[4.0, 1.0, 1.0], 3.0);
        let u = linear2();
        let w = rescale(&u, &f, &ORIGIN, 0.25, WindowMode::Centered).unwrap();
        // A_x = diag(2,1): raw window at e1 is r * 2
        assert!((w.eval_raw(&[1.0, 0.0, 0.0]) - 0.5).abs() < 1e-12);
        // normalized window is still sqrt(2) y1
        assert!((w.eval(&[1.0, 0.0, 0.0]) - math::sqrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn sphere_average_examples() {
        // normalized linear window
        let avg = sphere_average(2, |y| 2.0 * y[0] * y[0], 1.0);
        assert!((avg - 1.0).abs() < 1e-14);
        // homogeneity: (y1^2 - y2^2)^2 averages to rho^4/2 in 2D
        let avg = sphere_average(
            2,
            |y| {
                let v = y[0] * y[0] - y[1] * y[1];
                v * v
            },
            0.7,
        );
        assert!((avg - 0.5 * math::powi(0.7, 4)).abs() < 1e-14);
        let avg = sphere_average(2, |_| 1.0, 1.3);
        assert!((avg - 1.0).abs() < 1e-14);
    }

    #[test]
    fn doubling_of_homogeneous_is_degree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for dim in [2usize, 3] {
            let f = identity(dim);
            for d in 1..=8 {
                let p = hhp::random_hhp(dim, d, &mut rng).unwrap();
                let u = harmonic_polynomial_solution(&p);
                for _ in 0..3 {
                    let r: f64 = rng.gen_range(0.01..0.9);
                    let di = doubling_index(&u, &f, &ORIGIN, r, WindowMode::Centered).unwrap();
                    assert!((di - d as f64).abs() < 1e-6, "dim={dim} d={d} r={r} D={di}");
                }
            }
        }
    }

    #[test]
    fn doubling_of_linear_everywhere() {
        let u = linear2();
        let f = identity(2);
        for x in [[0.0, 0.0, 0.0], [0.4, -0.3, 0.0]] {
            let d = doubling_index(&u, &f, &x, 0.2, WindowMode::Centered).unwrap();
            assert!((d - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn doubling_near_regular_point_is_one() {
        let u = AnalyticSolution::from_polynomial(Polynomial::from_terms(
            2,
            &[([2, 0, 0], 1.0), ([0, 2, 0], -1.0)],
        ));
        let f = identity(2);
        let d = doubling_index(&u, &f, &[0.5, 0.0, 0.0], 0.01, WindowMode::Centered).unwrap();
        assert!((d - 1.0).abs() < 0.05, "D={d}");
    }

    #[test]
    fn translation_covariance() {
        let x0 = [0.3, -0.2, 0.0];
        let p = Polynomial::from_terms(2, &[([2, 0, 0], 1.0), ([0, 2, 0], -1.0)]);
        // P(. - x0) via expansion: (x-a)^2 - (y-b)^2
        let shifted = Polynomial::from_terms(
            2,
            &[
                ([2, 0, 0], 1.0),
                ([1, 0, 0], -2.0 * x0[0]),
                ([0, 0, 0], x0[0] * x0[0] - x0[1] * x0[1]),
                ([0, 2, 0], -1.0),
                ([0, 1, 0], 2.0 * x0[1]),
            ],
        );
        let f = identity(2);
        let u0 = AnalyticSolution::from_polynomial(p);
        let u1 = AnalyticSolution::from_polynomial(shifted);
        for r in [0.4, 0.1, 0.025] {
            let d0 = doubling_index(&u0, &f, &ORIGIN, r, WindowMode::Centered).unwrap();
            let d1 = doubling_index(&u1, &f, &x0, r, WindowMode::Centered).unwrap();
            assert!((d0 - d1).abs() < 1e-10);
        }
    }

    #[test]
    fn scale_composition_identity() {
        let u = mixed2();
        let f = identity(2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..6 {
            let r: f64 = rng.gen_range(0.1..0.5);
            let s: f64 = rng.gen_range(0.1..0.45);
            let direct = doubling_index(&u, &f, &ORIGIN, r * s, WindowMode::Centered).unwrap();
            let w = rescale(&u, &f, &ORIGIN, r, WindowMode::Centered).unwrap();
            let composed = doubling_index(&w, &f, &ORIGIN, s, WindowMode::Centered).unwrap();
            assert!((direct - composed).abs() < 1e-6, "r={r} s={s}");
        }
    }

    #[test]
    fn ball_doubling_examples() {
        let f = identity(2);
        let p = hhp::basis(2, 3).unwrap()[0].clone();
        let u = harmonic_polynomial_solution(&p);
        let d = ball_doubling_index(&u, &f, &ORIGIN, 0.3, WindowMode::Centered).unwrap();
        assert!((d - 3.0).abs() < 1e-6);
        let lin = linear2();
        let d = ball_doubling_index(&lin, &f, &[0.2, 0.1, 0.0], 0.2, WindowMode::Centered).unwrap();
        assert!((d - 1.0).abs() < 1e-10);
        // off-center point of a degree-3 polynomial: bracketed by [1, 3]
        let d = ball_doubling_index(&u, &f, &[0.21, -0.13, 0.0], 0.05, WindowMode::Centered)
            .unwrap();
        assert!(d > 1.0 - 0.05 && d < 3.0 + 0.05, "D={d}");
    }

    #[test]
    fn frequency_examples() {
        let f = identity(2);
        let _ = f;
        for d in 1..=5 {
            let p = hhp::basis(2, d).unwrap()[0].clone();
            let u = harmonic_polynomial_solution(&p);
            for r in [0.8, 0.3, 0.05] {
                let n = frequency(&u, &ORIGIN, r).unwrap();
                assert!((n - d as f64).abs() < 1e-8, "d={d} r={r} N={n}");
            }
        }
        let lin = linear2();
        let n = frequency(&lin, &[0.3, 0.3, 0.0], 0.5).unwrap();
        assert!((n - 1.0).abs() < 1e-10);
        // x + 0.1(x^2-y^2): N increasing, N(0+) = 1
        let u = AnalyticSolution::from_polynomial(Polynomial::from_terms(
            2,
            &[([1, 0, 0], 1.0), ([2, 0, 0], 0.1), ([0, 2, 0], -0.1)],
        ));
        let n_small = frequency(&u, &ORIGIN, 0.01).unwrap();
        let n_mid = frequency(&u, &ORIGIN, 0.5).unwrap();
        let n_big = frequency(&u, &ORIGIN, 1.5).unwrap();
        assert!((n_small - 1.0).abs() < 1e-3);
        assert!(n_small < n_mid && n_mid < n_big);
    }

    #[test]
    fn harmonic_sandwich() {
        let u = mixed2();
        let f = identity(2);
        for r in [0.4, 0.2, 0.1, 0.05] {
            let d = doubling_index(&u, &f, &ORIGIN, r, WindowMode::Centered).unwrap();
            let n1 = frequency(&u, &ORIGIN, r).unwrap();
            let n2 = frequency(&u, &ORIGIN, 2.0 * r).unwrap();
            assert!(n1 <= d + 1e-4 && d <= n2 + 1e-4, "r={r}: {n1} {d} {n2}");
        }
    }

    #[test]
    fn ball_sphere_bound() {
        let u = mixed2();
        let f = identity(2);
        for r in [0.3, 0.1] {
            let d = doubling_index(&u, &f, &ORIGIN, r, WindowMode::Centered).unwrap();
            let (ratio, _) = ball_sphere_ratio(&u, &ORIGIN, r).unwrap();
            let n = 2.0;
            assert!(ratio >= 1.0 / (n + 2.0 * d) - 1e-6, "r={r} ratio={ratio}");
            assert!(ratio <= 1.0 / n + 1e-6, "r={r} ratio={ratio}");
        }
    }

    #[test]
    fn h_identity_examples() {
        // exact homogeneous: both sides are 2d log(r2/r1)
        let p = hhp::basis(2, 2).unwrap()[0].clone();
        let u = harmonic_polynomial_solution(&p);
        let res = h_identity_audit(&u, &ORIGIN, 0.1, 0.2).unwrap();
        assert!(res < 1e-10, "residual {res}");
        // mixed harmonic
        let u = mixed2();
        let res = h_identity_audit(&u, &ORIGIN, 0.1, 0.2).unwrap();
        assert!(res < 1e-3, "residual {res}");
        assert_eq!(h_identity_audit(&u, &ORIGIN, 0.15, 0.15).unwrap(), 0.0);
    }

    #[test]
    fn profile_and_monotonicity() {
        let f = identity(2);
        let p = hhp::basis(2, 2).unwrap()[0].clone();
        let u = harmonic_polynomial_solution(&p);
        let prof = profile(&u, &f, &ORIGIN, 0.5, 10, WindowMode::Centered);
        assert_eq!(prof.entries.len(), 11);
        for e in prof.valid_entries() {
            assert!((e.d.unwrap() - 2.0).abs() < 1e-6);
        }
        let rep = almost_monotonicity_audit(&prof, 1e-6);
        assert!(rep.violations.is_empty());

        // harmonic mixed-degree: exact monotonicity, so no violations even
        // at tiny eps
        let u = mixed2();
        let prof = profile(&u, &f, &ORIGIN, 0.5, 10, WindowMode::Centered);
        let rep = almost_monotonicity_audit(&prof, 1e-3);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert!(rep.min_d_small.unwrap() > 0.99);
    }

    #[test]
    fn profile_flags_degenerate_scales() {
        let u = AnalyticSolution::from_polynomial(Polynomial::constant(2, 1.0));
        let f = identity(2);
        let prof = profile(&u, &f, &ORIGIN, 0.5, 4, WindowMode::Centered);
        assert!(prof.entries.iter().all(|e| e.flag == ScaleFlag::Degenerate));
        // uncentered mode sees the constant
        let prof = profile(&u, &f, &ORIGIN, 0.5, 4, WindowMode::Uncentered);
        for e in prof.valid_entries() {
            assert!(e.d.unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn non_pinching_scale_counts() {
        let f = identity(2);
        // exact homogeneous: empty set
        let p = hhp::basis(2, 2).unwrap()[0].clone();
        let u = harmonic_polynomial_solution(&p);
        let prof = profile(&u, &f, &ORIGIN, 0.5, 16, WindowMode::Centered);
        assert!(non_pinching_scales(&prof, 0.01).is_empty());
        // x + x^2 - y^2 transitions from 2 to 1: finitely many rungs move
        let u = mixed2();
        let prof = profile(&u, &f, &ORIGIN, 0.5, 16, WindowMode::Centered);
        let moved = non_pinching_scales(&prof, 0.05);
        assert!(!moved.is_empty());
        assert!(moved.len() <= 4, "{moved:?}");
        // eps above the total variation: empty
        assert!(non_pinching_scales(&prof, 2.0).is_empty());
    }

    #[test]
    fn scale_cap_enforced() {
        let u = linear2();
        let f = make_hoelder_field(1, 0.3, 0.5, 2, FieldMode::RadialBump).unwrap();
        let cap = 1.0 / math::sqrt(1.3);
        assert!(rescale(&u, &f, &ORIGIN, cap * 1.01, WindowMode::Centered).is_err());
        assert!(rescale(&u, &f, &ORIGIN, cap * 0.99, WindowMode::Centered).is_ok());
    }
}
