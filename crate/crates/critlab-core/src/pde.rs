//! Discretization and solution of the divergence-form equation on uniform
//! grids: flux-form five-point (2D) / seven-point (3D) scheme with
//! face-averaged coefficients, preconditioned Krylov solvers, and cubic
//! interpolation of the nodal data.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::{CoefficientField, Solution};
use crate::geom::{Point, ORIGIN};
use crate::math;
use crate::{Error, Result};

/// Relative residual demanded from the linear solves; two orders below the
/// smallest audit tolerance used downstream.
pub const TOL_SOLVE: f64 = 1e-10;

const MAX_ITERS: usize = 60_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub center: Point,
    pub half_width: f64,
    pub n_cells: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(dim: usize, center: Point, half_width: f64, n_cells: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::BadDim(dim));
        }
        if n_cells < 16 {
            return Err(Error::BadParameter("n_cells must be >= 16".into()));
        }
        if !(half_width > 0.0) {
            return Err(Error::BadParameter("half_width must be positive".into()));
        }
        Ok(Grid { dim, center, half_width, n_cells, h: 2.0 * half_width / n_cells as f64 })
    }

    #[inline]
    pub fn nodes_per_axis(&self) -> usize {
        self.n_cells + 1
    }

    pub fn node_count(&self) -> usize {
        let m = self.nodes_per_axis();
        if self.dim == 2 {
            m * m
        } else {
            m * m * m
        }
    }

    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.center[axis] - self.half_width + i as f64 * self.h
    }

    pub fn node_point(&self, idx: usize) -> Point {
        let m = self.nodes_per_axis();
        let i = idx % m;
        let j = (idx / m) % m;
        let k = idx / (m * m);
        let mut p = ORIGIN;
        p[0] = self.coord(0, i);
        p[1] = self.coord(1, j);
        if self.dim == 3 {
            p[2] = self.coord(2, k);
        }
        p
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let m = self.nodes_per_axis();
        let i = idx % m;
        let j = (idx / m) % m;
        let k = idx / (m * m);
        i == 0 || i == m - 1 || j == 0 || j == m - 1 || (self.dim == 3 && (k == 0 || k == m - 1))
    }

    /// Distance from x to the box boundary (negative outside).
    pub fn boundary_clearance(&self, x: &Point) -> f64 {
        let mut c = f64::INFINITY;
        for d in 0..self.dim {
            c = c.min(self.half_width - (x[d] - self.center[d]).abs());
        }
        c
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveReport {
    pub residual: f64,
    pub iterations: usize,
}

/// A scalar field sampled at grid nodes with cubic interpolation.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub report: SolveReport,
}

impl GridSolution {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::BadParameter("value count does not match grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParameter("non-finite nodal value".into()));
        }
        Ok(GridSolution { grid, values, report: SolveReport::default() })
    }

    /// Samples a closed-form function at the nodes.
    pub fn sample(grid: Grid, f: impl Fn(&Point) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|i| f(&grid.node_point(i))).collect();
        GridSolution { grid, values, report: SolveReport::default() }
    }

    #[inline]
    fn axis_stencil(&self, axis: usize, x: f64) -> (usize, [f64; 4]) {
        let m = self.grid.nodes_per_axis();
        let t = (x - (self.grid.center[axis] - self.grid.half_width)) / self.grid.h;
        let i = math::floor(t) as isize;
        let base = (i - 1).clamp(0, m as isize - 4) as usize;
        let s = t - base as f64;
        let w = [
            -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
            s * (s - 2.0) * (s - 3.0) / 2.0,
            -s * (s - 1.0) * (s - 3.0) / 2.0,
            s * (s - 1.0) * (s - 2.0) / 6.0,
        ];
        (base, w)
    }

    /// Cubic Lagrange interpolation; exact on per-axis cubics and at nodes.
    pub fn interpolate(&self, x: &Point) -> f64 {
        let m = self.grid.nodes_per_axis();
        let (bx, wx) = self.axis_stencil(0, x[0]);
        let (by, wy) = self.axis_stencil(1, x[1]);
        if self.grid.dim == 2 {
            let mut acc = 0.0;
            for (dj, wj) in wy.iter().enumerate() {
                let row = (by + dj) * m + bx;
                let mut racc = 0.0;
                for (di, wi) in wx.iter().enumerate() {
                    racc += wi * self.values[row + di];
                }
                acc += wj * racc;
            }
            acc
        } else {
            let (bz, wz) = self.axis_stencil(2, x[2]);
            let mut acc = 0.0;
            for (dk, wk) in wz.iter().enumerate() {
                let mut pacc = 0.0;
                for (dj, wj) in wy.iter().enumerate() {
                    let row = ((bz + dk) * m + (by + dj)) * m + bx;
                    let mut racc = 0.0;
                    for (di, wi) in wx.iter().enumerate() {
                        racc += wi * self.values[row + di];
                    }
                    pacc += wj * racc;
                }
                acc += wk * pacc;
            }
            acc
        }
    }
}

impl Solution for GridSolution {
    fn dim(&self) -> usize {
        self.grid.dim
    }

    fn value(&self, x: &Point) -> f64 {
        self.interpolate(x)
    }

    /// Centered differences of the interpolant with step h.
    fn gradient(&self, x: &Point) -> Point {
        let h = self.grid.h;
        let mut g = ORIGIN;
        for d in 0..self.grid.dim {
            let mut xp = *x;
            let mut xm = *x;
            xp[d] += h;
            xm[d] -= h;
            g[d] = (self.interpolate(&xp) - self.interpolate(&xm)) / (2.0 * h);
        }
        g
    }

    fn clearance(&self, x: &Point) -> f64 {
        self.grid.boundary_clearance(x) - 2.0 * self.grid.h
    }
}

/// Matrix-free flux-form stencil with Dirichlet boundary. Vectors live on
/// the full node set; boundary slots are masked to zero inside the Krylov
/// space.
struct Stencil {
    grid: Grid,
    /// face[d][idx]: averaged a_dd on the face between idx and idx + e_d.
    face: Vec<Vec<f64>>,
    b_nodes: Option<Vec<Point>>,
    c_nodes: Option<Vec<f64>>,
    interior: Vec<bool>,
    strides: [usize; 3],
}

impl Stencil {
    fn assemble(field: &CoefficientField, grid: &Grid) -> Result<Self> {
        if field.dim != grid.dim {
            return Err(Error::DimMismatch(field.dim, grid.dim));
        }
        let n = grid.node_count();
        let m = grid.nodes_per_axis();
        let strides = [1usize, m, m * m];
        // the contracted scheme has no mixed-derivative stencil, so the
        // leading coefficients must be diagonal
        let mut worst_offdiag = 0.0f64;
        for idx in (0..n).step_by(7) {
            worst_offdiag = worst_offdiag.max(field.a(&grid.node_point(idx)).max_offdiag());
        }
        if worst_offdiag > 1e-12 {
            return Err(Error::NonDiagonalCoefficients(worst_offdiag));
        }
        let mut adiag: Vec<Point> = Vec::with_capacity(n);
        for idx in 0..n {
            let a = field.a(&grid.node_point(idx));
            adiag.push([a.m[0][0], a.m[1][1], a.m[2][2]]);
        }
        let mut face = Vec::with_capacity(grid.dim);
        for d in 0..grid.dim {
            let mut f = vec![0.0; n];
            for (idx, fv) in f.iter_mut().enumerate() {
                let up = idx + strides[d];
                if up < n && on_same_line(idx, up, d, m, grid.dim) {
                    *fv = 0.5 * (adiag[idx][d] + adiag[up][d]);
                }
            }
            face.push(f);
        }
        let b_nodes = if field.has_drift() {
            Some((0..n).map(|i| field.b(&grid.node_point(i))).collect())
        } else {
            None
        };
        let c_nodes = if field.c(&ORIGIN) != 0.0 {
            Some((0..n).map(|i| field.c(&grid.node_point(i))).collect())
        } else {
            None
        };
        let interior = (0..n).map(|i| !grid.is_boundary(i)).collect();
        Ok(Stencil { grid: *grid, face, b_nodes, c_nodes, interior, strides })
    }

    fn is_symmetric(&self) -> bool {
        self.b_nodes.is_none()
    }

    /// out = L u on interior nodes, 0 on boundary slots.
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let h2 = self.grid.h * self.grid.h;
        let two_h = 2.0 * self.grid.h;
        for idx in 0..u.len() {
            if !self.interior[idx] {
                out[idx] = 0.0;
                continue;
            }
            let mut acc = 0.0;
            for d in 0..self.grid.dim {
                let s = self.strides[d];
                let up = idx + s;
                let dn = idx - s;
                acc += (self.face[d][idx] * (u[up] - u[idx])
                    - self.face[d][dn] * (u[idx] - u[dn]))
                    / h2;
                if let Some(b) = &self.b_nodes {
                    let bd = b[idx][d];
                    if bd != 0.0 {
                        acc += bd * (u[up] - u[dn]) / two_h;
                    }
                }
            }
            if let Some(c) = &self.c_nodes {
                acc += c[idx] * u[idx];
            }
            out[idx] = acc;
        }
    }

    /// Diagonal of -L (positive for elliptic data), used as a Jacobi
    /// preconditioner.
    fn neg_diagonal(&self) -> Vec<f64> {
        let h2 = self.grid.h * self.grid.h;
        let mut diag = vec![1.0; self.interior.len()];
        for (idx, dv) in diag.iter_mut().enumerate() {
            if !self.interior[idx] {
                continue;
            }
            let mut acc = 0.0;
            for d in 0..self.grid.dim {
                acc += (self.face[d][idx] + self.face[d][idx - self.strides[d]]) / h2;
            }
            if let Some(c) = &self.c_nodes {
                acc -= c[idx];
            }
            *dv = if acc.abs() > 1e-300 { acc } else { 1.0 };
        }
        diag
    }
}

fn on_same_line(a: usize, b: usize, axis: usize, m: usize, dim: usize) -> bool {
    // guard against wrap-around when stepping +stride at the border
    let (ai, aj, ak) = (a % m, (a / m) % m, a / (m * m));
    let (bi, bj, bk) = (b % m, (b / m) % m, b / (m * m));
    match axis {
        0 => aj == bj && ak == bk && bi == ai + 1,
        1 => ai == bi && ak == bk && bj == aj + 1,
        _ => ai == bi && aj == bj && bk == ak + 1 && dim == 3,
    }
}

fn dot_masked(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Preconditioned CG on A = -L (SPD for c <= 0). Solves A x = rhs with x, rhs
/// zero on boundary slots.
fn solve_cg(st: &Stencil, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, SolveReport)> {
    let n = rhs.len();
    let rhs_norm = math::sqrt(dot_masked(rhs, rhs));
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok((x, SolveReport { residual: 0.0, iterations: 0 }));
    }
    let inv_diag: Vec<f64> = st.neg_diagonal().iter().map(|d| 1.0 / d).collect();
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot_masked(&r, &z);
    for it in 0..MAX_ITERS {
        st.apply(&p, &mut ap);
        for v in ap.iter_mut() {
            *v = -*v;
        }
        let pap = dot_masked(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::IndefiniteOperator(pap));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = math::sqrt(dot_masked(&r, &r));
        if rn <= tol * rhs_norm {
            return Ok((x, SolveReport { residual: rn / rhs_norm, iterations: it + 1 }));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot_masked(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rn = math::sqrt(dot_masked(&r, &r));
    Err(Error::SolverDiverged { residual: rn / rhs_norm, iterations: MAX_ITERS })
}

/// Jacobi-preconditioned BiCGStab on L itself, for the drift term.
fn solve_bicgstab(st: &Stencil, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, SolveReport)> {
    let n = rhs.len();
    let rhs_norm = math::sqrt(dot_masked(rhs, rhs));
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok((x, SolveReport { residual: 0.0, iterations: 0 }));
    }
    let inv_diag: Vec<f64> = st.neg_diagonal().iter().map(|d| -1.0 / d).collect();
    let mut r = rhs.to_vec();
    let r0 = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    for it in 0..MAX_ITERS {
        let rho_new = dot_masked(&r0, &r);
        if rho_new.abs() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        for i in 0..n {
            phat[i] = p[i] * inv_diag[i];
        }
        st.apply(&phat, &mut v);
        alpha = rho / dot_masked(&r0, &v);
        let mut s = r.clone();
        for i in 0..n {
            s[i] -= alpha * v[i];
        }
        let sn = math::sqrt(dot_masked(&s, &s));
        if sn <= tol * rhs_norm {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok((x, SolveReport { residual: sn / rhs_norm, iterations: it + 1 }));
        }
        for i in 0..n {
            shat[i] = s[i] * inv_diag[i];
        }
        st.apply(&shat, &mut t);
        let tt = dot_masked(&t, &t);
        if tt == 0.0 {
            break;
        }
        omega = dot_masked(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        let rn = math::sqrt(dot_masked(&r, &r));
        if rn <= tol * rhs_norm {
            return Ok((x, SolveReport { residual: rn / rhs_norm, iterations: it + 1 }));
        }
        if omega.abs() < 1e-300 {
            break;
        }
    }
    let mut resid = vec![0.0; n];
    st.apply(&x, &mut resid);
    for i in 0..n {
        resid[i] -= rhs[i];
    }
    let rn = math::sqrt(dot_masked(&resid, &resid));
    Err(Error::SolverDiverged { residual: rn / rhs_norm, iterations: MAX_ITERS })
}

/// Solves the Dirichlet problem for the divergence-form operator on the
/// grid. Boundary nodes take the exact given data; the discrete residual of
/// the flux-form scheme on interior nodes is driven below `TOL_SOLVE`
/// relative.
pub fn solve_dirichlet(
    field: &CoefficientField,
    grid: &Grid,
    boundary: &dyn Fn(&Point) -> f64,
) -> Result<GridSolution> {
    let st = Stencil::assemble(field, grid)?;
    let n = grid.node_count();
    let mut u_bd = vec![0.0; n];
    for idx in 0..n {
        if !st.interior[idx] {
            let v = boundary(&grid.node_point(idx));
            if !v.is_finite() {
                return Err(Error::BadParameter("non-finite boundary value".into()));
            }
            u_bd[idx] = v;
        }
    }
    let mut rhs = vec![0.0; n];
    st.apply(&u_bd, &mut rhs);
    let (mut sol, report);
    if st.is_symmetric() {
        // A = -L, rhs = +L u_bd
        (sol, report) = solve_cg(&st, &rhs, TOL_SOLVE)?;
    } else {
        for v in rhs.iter_mut() {
            *v = -*v;
        }
        (sol, report) = solve_bicgstab(&st, &rhs, TOL_SOLVE)?;
    }
    for idx in 0..n {
        if !st.interior[idx] {
            sol[idx] = u_bd[idx];
        }
    }
    let mut out = GridSolution::from_values(*grid, sol)?;
    out.report = report;
    Ok(out)
}

/// Discrete residual of the flux-form scheme for a given nodal field,
/// relative to the scale of the boundary-induced load. Audit helper.
pub fn discrete_residual(field: &CoefficientField, sol: &GridSolution) -> Result<f64> {
    let st = Stencil::assemble(field, &sol.grid)?;
    let n = sol.grid.node_count();
    let mut out = vec![0.0; n];
    st.apply(&sol.values, &mut out);
    let mut u_bd = vec![0.0; n];
    for idx in 0..n {
        if !st.interior[idx] {
            u_bd[idx] = sol.values[idx];
        }
    }
    let mut load = vec![0.0; n];
    st.apply(&u_bd, &mut load);
    let scale = math::sqrt(dot_masked(&load, &load)).max(1e-300);
    Ok(math::sqrt(dot_masked(&out, &out)) / scale)
}

/// Solves the Laplace Dirichlet problem on the axis-aligned bounding box of
/// the given ball, with boundary data interpolated from `source`.
pub fn solve_laplace_inherit(
    source: &dyn Solution,
    center: &Point,
    rho: f64,
    n_cells: usize,
) -> Result<GridSolution> {
    let dim = source.dim();
    let grid = Grid::new(dim, *center, rho, n_cells)?;
    // every boundary node must be evaluable in the source
    let corner_dist = rho * math::sqrt(dim as f64);
    if source.clearance(center) < corner_dist {
        return Err(Error::OutOfDomain {
            needed: corner_dist,
            have: source.clearance(center),
        });
    }
    let identity = CoefficientField::identity(dim);
    solve_dirichlet(&identity, &grid, &|p| source.value(p))
}
