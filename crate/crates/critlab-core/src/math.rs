//! libm-backed float math, so the crate works without `std` and produces
//! bit-identical results in both `std` and `no_std` builds.

pub use libm::{atan2, cbrt, cos, exp, hypot, sin, sqrt};

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// log base 4, the scale used by the doubling index.
pub fn log4(x: f64) -> f64 {
    0.5 * libm::log2(x)
}

pub fn powf(x: f64, e: f64) -> f64 {
    libm::pow(x, e)
}

pub fn powi(x: f64, e: i32) -> f64 {
    let mut acc = 1.0;
    let mut base = if e < 0 { 1.0 / x } else { x };
    let mut n = e.unsigned_abs();
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn round(x: f64) -> f64 {
    libm::round(x)
}

pub const PI: f64 = core::f64::consts::PI;

/// Least-squares slope of y against x. Returns `None` with fewer than two
/// distinct abscissae.
pub fn lsq_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in 0..n {
        sx += xs[i];
        sy += ys[i];
    }
    let (mx, my) = (sx / nf, sy / nf);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..n {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    Some(sxy / sxx)
}
