//! Fixed quadrature rules for sphere and ball averages.
//!
//! The orders are frozen: 256 trapezoidal nodes on the circle (spectrally
//! accurate), a 16x32 Gauss-Legendre/uniform product rule on the 2-sphere
//! (exact for spherical polynomials well past degree 23) and 24 radial
//! Gauss nodes for ball averages. Keeping them fixed removes a tuning knob
//! from every audit built on top.

use alloc::vec::Vec;

use crate::geom::Point;
use crate::math;

pub const CIRCLE_NODES: usize = 256;
pub const SPHERE_POLAR_NODES: usize = 16;
pub const SPHERE_AZIMUTH_NODES: usize = 32;
pub const RADIAL_NODES: usize = 24;

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = math::cos(math::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            pp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        nodes.push(x);
        weights.push(w);
    }
    let mut all_nodes = Vec::with_capacity(n);
    let mut all_weights = Vec::with_capacity(n);
    for i in 0..n {
        if i < n - m {
            all_nodes.push(-nodes[n - m - 1 - i]);
            all_weights.push(weights[n - m - 1 - i]);
        } else {
            all_nodes.push(nodes[i - (n - m)]);
            all_weights.push(weights[i - (n - m)]);
        }
    }
    (all_nodes, all_weights)
}

/// Unit-sphere quadrature: nodes on |y| = 1 with weights summing to 1, so
/// the weighted sum is the sphere average.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(dim: usize) -> Self {
        match dim {
            2 => {
                let n = CIRCLE_NODES;
                let mut nodes = Vec::with_capacity(n);
                let w = 1.0 / n as f64;
                for j in 0..n {
                    let th = 2.0 * math::PI * (j as f64) / (n as f64);
                    nodes.push([math::cos(th), math::sin(th), 0.0]);
                }
                SphereRule { dim, nodes, weights: alloc::vec![w; n] }
            }
            3 => Self::product3(SPHERE_POLAR_NODES, SPHERE_AZIMUTH_NODES),
            _ => panic!("sphere rule only for dim 2 or 3"),
        }
    }

    /// Product Gauss(cos theta) x uniform(phi) rule on S^2.
    pub fn product3(n_polar: usize, n_azimuth: usize) -> Self {
        let (ts, ws) = gauss_legendre(n_polar);
        let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
        let mut weights = Vec::with_capacity(n_polar * n_azimuth);
        for (t, wt) in ts.iter().zip(ws.iter()) {
            let st = math::sqrt((1.0 - t * t).max(0.0));
            for j in 0..n_azimuth {
                let phi = 2.0 * math::PI * (j as f64) / (n_azimuth as f64);
                nodes.push([st * math::cos(phi), st * math::sin(phi), *t]);
                weights.push(wt * 0.5 / n_azimuth as f64);
            }
        }
        SphereRule { dim: 3, nodes, weights }
    }

    /// Average of `f` over the sphere of radius `rho` centered at `center`.
    pub fn average(&self, center: &Point, rho: f64, mut f: impl FnMut(&Point) -> f64) -> f64 {
        let mut acc = 0.0;
        for (node, w) in self.nodes.iter().zip(self.weights.iter()) {
            let p = [
                center[0] + rho * node[0],
                center[1] + rho * node[1],
                center[2] + rho * node[2],
            ];
            acc += w * f(&p);
        }
        acc
    }
}

/// Ball-average rule: radial Gauss nodes against the surface measure
/// r^{n-1}, combined with a sphere rule per shell. Weights sum to 1.
#[derive(Debug, Clone)]
pub struct BallRule {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub radial_weights: Vec<f64>,
    pub sphere: SphereRule,
}

impl BallRule {
    pub fn new(dim: usize) -> Self {
        let (xs, ws) = gauss_legendre(RADIAL_NODES);
        let n = dim as f64;
        let mut radii = Vec::with_capacity(RADIAL_NODES);
        let mut radial_weights = Vec::with_capacity(RADIAL_NODES);
        // map [-1,1] -> [0,1]; ball average = n * int_0^1 r^{n-1} S(r) dr
        for (x, w) in xs.iter().zip(ws.iter()) {
            let r = 0.5 * (x + 1.0);
            radii.push(r);
            radial_weights.push(0.5 * w * n * math::powf(r, n - 1.0));
        }
        BallRule { dim, radii, radial_weights, sphere: SphereRule::new(dim) }
    }

    /// Average of `f` over the ball of radius `rho` centered at `center`.
    pub fn average(&self, center: &Point, rho: f64, mut f: impl FnMut(&Point) -> f64) -> f64 {
        let mut acc = 0.0;
        for (r, wr) in self.radii.iter().zip(self.radial_weights.iter()) {
            let shell = self.sphere.average(center, rho * r, &mut f);
            acc += wr * shell;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_weights_sum_to_two() {
        for n in [4, 9, 16, 24] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn gauss_integrates_high_degree_polynomial() {
        // int_{-1}^{1} x^14 dx = 2/15 with 8 nodes (exact to degree 15)
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(w.iter()).map(|(x, w)| w * math::powi(*x, 14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn circle_average_of_cos2() {
        let rule = SphereRule::new(2);
        let avg = rule.average(&[0.0; 3], 1.0, |p| p[0] * p[0]);
        assert!((avg - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sphere_average_of_monomials() {
        let rule = SphereRule::new(3);
        // <x^2> = 1/3, <x^4> = 1/5, <x^2 y^2> = 1/15 on S^2
        let m2 = rule.average(&[0.0; 3], 1.0, |p| p[0] * p[0]);
        let m4 = rule.average(&[0.0; 3], 1.0, |p| math::powi(p[0], 4));
        let mxy = rule.average(&[0.0; 3], 1.0, |p| p[0] * p[0] * p[1] * p[1]);
        assert!((m2 - 1.0 / 3.0).abs() < 1e-14);
        assert!((m4 - 1.0 / 5.0).abs() < 1e-14);
        assert!((mxy - 1.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_rule_exact_to_degree_23() {
        let rule = SphereRule::new(3);
        // z^22 has average 1/23 (odd powers vanish); degree-22 even monomial
        let m = rule.average(&[0.0; 3], 1.0, |p| math::powi(p[2], 22));
        assert!((m - 1.0 / 23.0).abs() < 1e-13);
        let odd = rule.average(&[0.0; 3], 1.0, |p| math::powi(p[2], 23));
        assert!(odd.abs() < 1e-13);
    }

    #[test]
    fn ball_average_of_r2() {
        // over B_1: avg |x|^2 = n/(n+2)
        for dim in [2usize, 3] {
            let rule = BallRule::new(dim);
            let avg = rule.average(&[0.0; 3], 1.0, |p| p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            let expect = dim as f64 / (dim as f64 + 2.0);
            assert!((avg - expect).abs() < 1e-13, "dim={dim} avg={avg}");
        }
    }

    #[test]
    fn averages_scale_with_radius_and_center() {
        let rule = SphereRule::new(2);
        let avg = rule.average(&[1.0, 2.0, 0.0], 0.5, |p| (p[0] - 1.0) * (p[0] - 1.0));
        assert!((avg - 0.5 * 0.25).abs() < 1e-15);
    }
}
